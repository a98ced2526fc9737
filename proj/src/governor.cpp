#include "spg/governor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spg/errors.hpp"

namespace spg {

void PenaltyConfig::validate(int m) const {
  if (!(theta > 1.0)) throw ContractViolation("penalty: theta must exceed 1");
  if (!(phi_a >= 0.0)) throw ContractViolation("penalty: phi_a must be nonnegative");
  if (k_prime < 0) throw ContractViolation("penalty: k_prime must be nonnegative");
  const Eigen::MatrixXd W = weight(m);
  if (W.rows() != m || W.cols() != m) throw ContractViolation("penalty: S must be m x m");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + W.cwiseAbs().maxCoeff()))
    throw ContractViolation("penalty: S must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success) throw ContractViolation("penalty: S must be positive definite");
}

Eigen::MatrixXd PenaltyConfig::weight(int m) const {
  if (S.size() == 0) return 0.01 * Eigen::MatrixXd::Identity(m, m);
  return S;
}

double phi_eval(const PenaltyConfig& cfg, double eps) { return eps + cfg.phi_a * eps * eps; }

bool phi_props(const PenaltyConfig& cfg) {
  if (phi_eval(cfg, 0.0) != 0.0) return false;
  const double h = 1e-7;
  const double slope = (phi_eval(cfg, h) - phi_eval(cfg, 0.0)) / h;
  if (std::abs(slope - 1.0) > 1e-5) return false;
  const double step = 1e-2;
  for (int i = 1; i < 1000; ++i) {
    const double e = i * step;
    const double second =
        (phi_eval(cfg, e + step) - 2.0 * phi_eval(cfg, e) + phi_eval(cfg, e - step)) / (step * step);
    if (second < -1e-9) return false;
  }
  return true;
}

double slack_weight(const PenaltyConfig& cfg, int k) {
  return std::pow(cfg.theta, cfg.k_prime + 2 - k);
}

double zero_tolerance(const SafeSetLadder& ladder, const PenaltyConfig& cfg) {
  if (cfg.eps_zero_tol > 0.0) return cfg.eps_zero_tol;
  double gmax = 0.0;
  for (const auto& g : ladder.groups)
    if (g.rows() > 0) gmax = std::max(gmax, g.c.cwiseAbs().maxCoeff());
  return 1e-6 * (1.0 + gmax);
}

namespace {

// With `presolve`, group rows that hold for every u in U are left out; they
// cannot bind because every slack is nonnegative.
// `group_rows`, when given, receives the group index of each leading row.
QuadraticProgram build_qp(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom, bool presolve,
                          std::vector<int>* group_rows = nullptr) {
  const int n = ladder.system.n();
  const int m = ladder.system.m();
  cfg.validate(m);
  if (cfg.k_prime != ladder.k_prime)
    throw ContractViolation("assemble: ladder built with k' = " + std::to_string(ladder.k_prime) +
                            ", config has k' = " + std::to_string(cfg.k_prime));
  if (x.size() != n) throw ContractViolation("assemble: state has wrong dimension");
  if (u_nom.size() != m) throw ContractViolation("assemble: nominal input has wrong dimension");

  const int slacks = cfg.k_prime + 2;
  const int nz = m + slacks;
  const Eigen::MatrixXd S = cfg.weight(m);
  presolve = presolve && ladder.input_support.size() == ladder.groups.size();

  QuadraticProgram qp;
  qp.H = Eigen::MatrixXd::Zero(nz, nz);
  qp.f = Eigen::VectorXd::Zero(nz);
  qp.H.topLeftCorner(m, m) = 2.0 * S;
  qp.f.head(m) = -2.0 * S * u_nom;
  for (int k = 0; k < slacks; ++k) {
    const double w = slack_weight(cfg, k);
    qp.H(m + k, m + k) = cfg.phi_a > 0.0 ? 2.0 * cfg.phi_a * w : kSlackCurvatureFloor;
    qp.f(m + k) = w;
  }

  // First pass: count kept rows and record their group and right-hand side.
  std::vector<std::pair<int, int>> kept;  // (group, row)
  std::vector<double> rhs;
  for (int k = 0; k < slacks; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const auto& grp = ladder.groups[idx];
    for (int j = 0; j < grp.rows(); ++j) {
      const double b = grp.c(j) - grp.Cx.row(j).dot(x);
      if (presolve && ladder.input_support[idx](j) + 1e-9 * (1.0 + std::abs(b)) <= b) continue;
      kept.emplace_back(k, j);
      rhs.push_back(b);
    }
  }
  const int rows = static_cast<int>(kept.size()) + ladder.input_set.num_rows() + slacks;

  qp.G = Eigen::MatrixXd::Zero(rows, nz);
  qp.g = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (const auto& [k, j] : kept) {
    qp.G.block(r, 0, 1, m) = ladder.groups[static_cast<std::size_t>(k)].Cu.row(j);
    qp.G(r, m + k) = -1.0;
    qp.g(r) = rhs[static_cast<std::size_t>(r)];
    if (group_rows) group_rows->push_back(k);
    ++r;
  }
  const int qu = ladder.input_set.num_rows();
  qp.G.block(r, 0, qu, m) = ladder.input_set.normals();
  qp.g.segment(r, qu) = ladder.input_set.offsets();
  r += qu;
  qp.G(r++, m) = -1.0;  // eps_0 >= 0
  for (int k = 0; k + 1 < slacks; ++k, ++r) {
    qp.G(r, m + k) = 1.0;
    qp.G(r, m + k + 1) = -1.0;
  }
  return qp;
}

}  // namespace

QuadraticProgram assemble(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom) {
  return build_qp(ladder, cfg, x, u_nom, false);
}

GovernorSolution govern(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom,
                        const SolverSettings& settings) {
  std::vector<int> group_rows;
  const QuadraticProgram qp = build_qp(ladder, cfg, x, u_nom, true, &group_rows);
  const int m = ladder.system.m();
  const int slacks = cfg.k_prime + 2;

  // Feasible seed: an admissible input with each slack set to the running
  // maximum of the group violations up to its depth. Rows dropped by the
  // presolve are satisfied by every u in U and do not affect the maximum.
  Eigen::VectorXd start = Eigen::VectorXd::Zero(m + slacks);
  const Eigen::VectorXd u0 =
      ladder.input_set.contains_point(u_nom, 0.0) ? u_nom : ladder.input_anchor;
  start.head(m) = u0;
  for (std::size_t r = 0; r < group_rows.size(); ++r) {
    const int k = group_rows[r];
    const auto i = static_cast<Eigen::Index>(r);
    const double violation = qp.G.row(i).head(m).dot(u0) - qp.g(i);
    start(m + k) = std::max(start(m + k), violation);
  }
  for (int k = 1; k < slacks; ++k) start(m + k) = std::max(start(m + k), start(m + k - 1));

  const QpSolution sol = solve_from(qp, start, settings);
  if (sol.status != QpStatus::optimal)
    throw NumericalError("governor QP finished with status " + to_string(sol.status));

  GovernorSolution out;
  out.u = sol.z.head(m);
  out.eps = sol.z.tail(slacks);
  out.status = sol.status;
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  out.objective = 0.5 * sol.z.dot(qp.H * sol.z) + qp.f.dot(sol.z) +
                  u_nom.dot(cfg.weight(m) * u_nom);
  out.zero_tol = zero_tolerance(ladder, cfg);
  out.k_star = -1;
  for (int k = 0; k < slacks; ++k)
    if (out.eps(k) <= out.zero_tol) out.k_star = k;
  return out;
}

nlohmann::json to_json(const GovernorSolution& sol) {
  return {{"u", vector_to_json(sol.u)},
          {"eps", vector_to_json(sol.eps)},
          {"k_star", sol.k_star},
          {"protected", sol.k_star == static_cast<int>(sol.eps.size()) - 1},
          {"status", to_string(sol.status)},
          {"kkt_residual", sol.kkt_residual},
          {"iterations", sol.iterations},
          {"objective", sol.objective},
          {"zero_tol", sol.zero_tol}};
}

nlohmann::json to_json(const PenaltyConfig& cfg) {
  nlohmann::json j = {{"theta", cfg.theta},
                      {"phi_a", cfg.phi_a},
                      {"k_prime", cfg.k_prime},
                      {"eps_zero_tol", cfg.eps_zero_tol}};
  if (cfg.S.size() > 0) j["S"] = matrix_to_json(cfg.S);
  return j;
}

PenaltyConfig penalty_from_json(const nlohmann::json& j) {
  try {
    PenaltyConfig cfg;
    cfg.theta = j.at("theta").get<double>();
    cfg.phi_a = j.at("phi_a").get<double>();
    cfg.k_prime = j.at("k_prime").get<int>();
    cfg.eps_zero_tol = j.value("eps_zero_tol", 0.0);
    if (j.contains("S")) cfg.S = matrix_from_json(j.at("S"), "S");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("penalty JSON: ") + e.what());
  }
}

}  // namespace spg
