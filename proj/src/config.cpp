#include "spg/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "spg/errors.hpp"

namespace spg {

namespace {

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw InputError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

YAML::Node required(const YAML::Node& node, const std::string& where, const char* key) {
  const YAML::Node child = node[key];
  if (!child) throw InputError(where + ": missing key '" + key + "'");
  return child;
}

Eigen::VectorXd read_vector(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) throw InputError(what + ": expected a list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = node[i].as<double>();
  return v;
}

Eigen::MatrixXd read_matrix(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() == 0)
    throw InputError(what + ": expected a nonempty list of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  const Eigen::Index cols = read_vector(node[0], what).size();
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd r = read_vector(node[static_cast<std::size_t>(i)], what);
    if (r.size() != cols) throw InputError(what + ": ragged rows");
    M.row(i) = r.transpose();
  }
  return M;
}

// Either {rows: [[n..., b], ...]} or {lower: [...], upper: [...]}.
Polytope read_polytope(const YAML::Node& node, const std::string& where) {
  check_keys(node, where, {"rows", "lower", "upper"});
  if (node["rows"]) {
    if (node["lower"] || node["upper"])
      throw InputError(where + ": give either rows or lower/upper, not both");
    const Eigen::MatrixXd R = read_matrix(node["rows"], where + ".rows");
    if (R.cols() < 2) throw InputError(where + ".rows: each row needs a normal and an offset");
    return Polytope(R.leftCols(R.cols() - 1), R.col(R.cols() - 1));
  }
  const Eigen::VectorXd lo = read_vector(required(node, where, "lower"), where + ".lower");
  const Eigen::VectorXd hi = read_vector(required(node, where, "upper"), where + ".upper");
  if (lo.size() != hi.size()) throw InputError(where + ": lower/upper sizes differ");
  return Polytope::box(lo, hi);
}

DisturbanceSet read_disturbance(const YAML::Node& node) {
  const std::string where = "disturbance";
  check_keys(node, where, {"kind", "radius", "dim"});
  const auto kind = required(node, where, "kind").as<std::string>();
  if (kind == "box") {
    if (node["dim"]) throw InputError(where + ": 'dim' is implied by the radius list for a box");
    return DisturbanceSet::box(read_vector(required(node, where, "radius"), where + ".radius"));
  }
  if (kind == "euclidean-ball")
    return DisturbanceSet::ball(required(node, where, "dim").as<int>(),
                                required(node, where, "radius").as<double>());
  throw InputError(where + ": unknown kind '" + kind + "'");
}

}  // namespace

LadderOptions ProblemConfig::ladder_options() const {
  LadderOptions o;
  o.k_prime = penalty.k_prime;
  o.eps_tight = eps_tight;
  o.k_cap = k_cap;
  return o;
}

void ProblemConfig::validate() const {
  system.validate();
  const int n = system.n(), m = system.m();
  if (feedback.K.rows() != m || feedback.K.cols() != n)
    throw ContractViolation("feedback K must be m x n");
  if (safe_set.dim() != n) throw ContractViolation("safe set dimension must equal n");
  if (input_set.dim() != m) throw ContractViolation("input set dimension must equal m");
  if (disturbance.dim() != system.p()) throw ContractViolation("disturbance dimension must equal p");
  penalty.validate(m);
  // bounding_box throws when a set is empty or unbounded
  try {
    (void)safe_set.bounding_box();
  } catch (const ContractViolation& e) {
    throw ContractViolation(std::string("safe set: ") + e.what());
  }
  try {
    (void)input_set.bounding_box();
  } catch (const ContractViolation& e) {
    throw ContractViolation(std::string("input set: ") + e.what());
  }
  if (!(eps_tight > 0.0 && eps_tight < 1.0)) throw ContractViolation("eps_tight must lie in (0, 1)");
  if (k_cap < 1) throw ContractViolation("k_cap must be positive");
}

ProblemConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  ProblemConfig cfg;
  try {
    check_keys(root, "config",
               {"system", "feedback", "safe_set", "input_set", "disturbance", "penalty",
                "construction"});

    const auto sys = required(root, "config", "system");
    check_keys(sys, "system", {"A", "B", "E", "dt"});
    cfg.system.A = read_matrix(required(sys, "system", "A"), "system.A");
    cfg.system.B = read_matrix(required(sys, "system", "B"), "system.B");
    cfg.system.E = read_matrix(required(sys, "system", "E"), "system.E");
    if (sys["dt"]) cfg.system.dt = sys["dt"].as<double>();

    const auto fb = required(root, "config", "feedback");
    check_keys(fb, "feedback", {"K"});
    cfg.feedback.K = read_matrix(required(fb, "feedback", "K"), "feedback.K");

    cfg.safe_set = read_polytope(required(root, "config", "safe_set"), "safe_set");
    cfg.input_set = read_polytope(required(root, "config", "input_set"), "input_set");
    cfg.disturbance = read_disturbance(required(root, "config", "disturbance"));

    if (const auto pen = root["penalty"]) {
      check_keys(pen, "penalty", {"k_prime", "theta", "phi_a", "S", "eps_zero_tol"});
      if (pen["k_prime"]) cfg.penalty.k_prime = pen["k_prime"].as<int>();
      if (pen["theta"]) cfg.penalty.theta = pen["theta"].as<double>();
      if (pen["phi_a"]) cfg.penalty.phi_a = pen["phi_a"].as<double>();
      if (pen["S"]) cfg.penalty.S = read_matrix(pen["S"], "penalty.S");
      if (pen["eps_zero_tol"]) cfg.penalty.eps_zero_tol = pen["eps_zero_tol"].as<double>();
    }
    if (const auto con = root["construction"]) {
      check_keys(con, "construction", {"eps_tight", "k_cap"});
      if (con["eps_tight"]) cfg.eps_tight = con["eps_tight"].as<double>();
      if (con["k_cap"]) cfg.k_cap = con["k_cap"].as<int>();
    }
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  } catch (const ContractViolation& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (cfg.penalty.S.size() == 0)
    cfg.penalty.S = cfg.penalty.weight(static_cast<int>(cfg.system.B.cols()));
  try {
    cfg.validate();
  } catch (const ContractViolation& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SafeSetLadder build_ladder(const ProblemConfig& cfg) {
  cfg.validate();
  return build_ladder(cfg.system, cfg.feedback, cfg.safe_set, cfg.input_set, cfg.disturbance,
                      cfg.ladder_options());
}

ProblemConfig acc_config() {
  ProblemConfig cfg;
  const double dt = 0.25;
  cfg.system.dt = dt;
  cfg.system.A.resize(2, 2);
  cfg.system.A << 1.0, dt, 0.0, 1.0;
  cfg.system.B.resize(2, 1);
  cfg.system.B << -dt * dt / 2.0, -dt;
  cfg.system.E.resize(2, 1);
  cfg.system.E << dt * dt / 2.0, dt;
  cfg.feedback.K.resize(1, 2);
  cfg.feedback.K << 0.2842, 0.8056;
  cfg.safe_set = Polytope::box(Eigen::Vector2d(10.0, -5.0), Eigen::Vector2d(20.0, 5.0));
  cfg.input_set = Polytope::box(Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, 2.0));
  cfg.disturbance = DisturbanceSet::box(Eigen::VectorXd::Constant(1, 1.0));
  cfg.penalty.k_prime = 8;
  cfg.penalty.theta = 2.0;
  cfg.penalty.phi_a = 0.01;
  cfg.penalty.S = Eigen::MatrixXd::Constant(1, 1, 0.01);
  return cfg;
}

}  // namespace spg
