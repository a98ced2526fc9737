// spg: build safe-set ladders, run the governor, simulate, and reproduce the
// adaptive cruise control cases.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "spg/acc.hpp"
#include "spg/config.hpp"
#include "spg/errors.hpp"
#include "spg/oracle.hpp"
#include "spg/sim.hpp"

namespace {

using namespace spg;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitGate = 1;
constexpr int kExitInput = 2;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t')) ++end;
    if (end == begin || !end || *end != '\0' || !std::isfinite(v))
      throw InputError(what + ": cannot parse '" + text + "' as a comma-separated vector");
    values.push_back(v);
  }
  if (values.empty()) throw InputError(what + ": empty vector");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct Problem {
  SafeSetLadder ladder;
  PenaltyConfig penalty;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

nlohmann::json ladder_document(const Problem& p) {
  nlohmann::json j = to_json(p.ladder);
  j["penalty"] = to_json(p.penalty);
  return j;
}

// --ladder wins over --config; the built-in ACC instance is the fallback.
Problem load_problem(const std::string& config_path, const std::string& ladder_path) {
  Problem p;
  if (!ladder_path.empty()) {
    const nlohmann::json j = read_json(ladder_path);
    p.ladder = ladder_from_json(j);
    if (j.contains("penalty")) {
      p.penalty = penalty_from_json(j.at("penalty"));
    } else {
      p.penalty.k_prime = p.ladder.k_prime;
    }
    if (p.penalty.k_prime != p.ladder.k_prime)
      throw InputError("ladder JSON: penalty k_prime does not match the ladder");
    return p;
  }
  const ProblemConfig cfg = config_path.empty() ? acc_config() : load_config(config_path);
  p.ladder = build_ladder(cfg);
  p.penalty = cfg.penalty;
  return p;
}

Eigen::VectorXd nominal_or_zero(const std::string& text, int m) {
  if (text.empty()) return Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = parse_vector(text, "--u-nom");
  if (u.size() != m) throw InputError("--u-nom must have " + std::to_string(m) + " entries");
  return u;
}

int cmd_build_sets(const std::string& config_path, const std::string& out_path) {
  Problem p = load_problem(config_path, "");
  const NestingReport rep = check_nesting(p.ladder);
  std::cout << "k' = " << p.ladder.k_prime << ", determination index "
            << p.ladder.determination_index << "\n";
  for (std::size_t k = 0; k < p.ladder.tilde_sets.size(); ++k)
    std::cout << "  X~" << k << ": " << p.ladder.tilde_sets[k].num_rows() << " rows\n";
  std::cout << "  X_inf: " << p.ladder.x_inf.num_rows() << " rows\n";
  for (std::size_t k = 0; k < rep.consecutive.size(); ++k)
    std::cout << "  X~" << k + 1 << " in X~" << k << ": " << (rep.consecutive[k] ? "ok" : "FAIL")
              << "\n";
  std::cout << "  X_inf in X~" << p.ladder.k_prime << ": " << (rep.x_inf_in_last ? "ok" : "FAIL")
            << "\n  X_inf in X0: " << (rep.x_inf_in_x0 ? "ok" : "FAIL")
            << "\n  X~0 equals X0: " << (rep.base_equals_x0 ? "ok" : "FAIL") << "\n";
  if (!out_path.empty()) write_text(out_path, ladder_document(p).dump(1) + "\n");
  return rep.all() ? kExitOk : kExitGate;
}

int cmd_govern(const std::string& config_path, const std::string& ladder_path,
               const std::string& x_text, const std::string& u_text) {
  const Eigen::VectorXd x = parse_vector(x_text, "--x");
  Problem p = load_problem(config_path, ladder_path);
  if (x.size() != p.ladder.system.n())
    throw InputError("--x must have " + std::to_string(p.ladder.system.n()) + " entries");
  const Eigen::VectorXd u_nom = nominal_or_zero(u_text, p.ladder.system.m());
  const GovernorSolution sol = govern(p.ladder, p.penalty, x, u_nom);
  std::cout << to_json(sol).dump(2) << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& ladder_path, int case_id,
                 const std::string& x0_text, const std::string& w_text, int steps,
                 const std::string& u_text, const std::string& out_path) {
  Problem p = load_problem(config_path, ladder_path);
  acc::Case c;
  if (case_id != 0) {
    c = acc::make_case(case_id);
  } else {
    if (x0_text.empty()) throw InputError("simulate needs --case or --x0");
    c.x0 = parse_vector(x0_text, "--x0");
    c.profile = w_text.empty()
                    ? DisturbanceProfile::worst_case_vertex()
                    : DisturbanceProfile::constant(parse_vector(w_text, "--w"));
    c.steps = 100;
  }
  if (steps > 0) c.steps = steps;
  if (c.x0.size() != p.ladder.system.n())
    throw InputError("initial state must have " + std::to_string(p.ladder.system.n()) + " entries");
  const auto nominal = constant_nominal(nominal_or_zero(u_text, p.ladder.system.m()));
  const SimTrace trace = run(p.ladder, p.penalty, c.x0, nominal, c.profile, c.steps);
  if (out_path.empty()) {
    write_csv(std::cout, trace);
  } else {
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write '" + out_path + "'");
    write_csv(out, trace);
  }
  return kExitOk;
}

void print_agreement(const AgreementReport& rep) {
  std::cout << "agreement " << rep.agree << "/" << rep.samples << "\n"
            << "protected states " << rep.protected_cases << ", max |u - u_oracle| "
            << rep.max_u_deviation << ", max KKT residual " << rep.max_kkt_residual << "\n"
            << "mean wall time: govern " << rep.mean_govern_s << " s, series "
            << rep.mean_series_s << " s\n";
}

int cmd_verify(const std::string& config_path, const std::string& ladder_path, int samples,
               std::uint64_t seed, const std::string& lower_text, const std::string& upper_text,
               const std::string& u_text, const std::string& out_path) {
  Problem p = load_problem(config_path, ladder_path);
  const int n = p.ladder.system.n();
  Eigen::VectorXd lower, upper;
  if (lower_text.empty() != upper_text.empty())
    throw InputError("--lower and --upper go together");
  if (!lower_text.empty()) {
    lower = parse_vector(lower_text, "--lower");
    upper = parse_vector(upper_text, "--upper");
    if (lower.size() != n || upper.size() != n || (upper - lower).minCoeff() < 0.0)
      throw InputError("--lower/--upper must be ordered " + std::to_string(n) + "-vectors");
  } else {
    // X0's bounding box widened by 20% of its extent on each side.
    const auto [lo, hi] = p.ladder.safe_set.bounding_box();
    lower = lo - 0.2 * (hi - lo);
    upper = hi + 0.2 * (hi - lo);
  }
  const Eigen::VectorXd u_nom = nominal_or_zero(u_text, p.ladder.system.m());
  const AgreementReport rep =
      verify_agreement(p.ladder, p.penalty, lower, upper, u_nom, samples, seed);
  print_agreement(rep);
  if (!out_path.empty()) write_text(out_path, to_json(rep).dump(2) + "\n");
  return rep.agree == rep.samples && rep.max_u_deviation <= 1e-4 ? kExitOk : kExitGate;
}

int cmd_reproduce_acc(const std::string& out_dir, int samples, std::uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  const ProblemConfig cfg = acc_config();

  auto t0 = Clock::now();
  Problem p{build_ladder(cfg), cfg.penalty};
  const double build_s = seconds_since(t0);
  write_text((dir / "ladder.json").string(), ladder_document(p).dump(1) + "\n");

  std::vector<acc::Gate> gates;
  const auto nominal = constant_nominal(Eigen::VectorXd::Zero(1));
  for (int id = 1; id <= 3; ++id) {
    const acc::Case c = acc::make_case(id);
    t0 = Clock::now();
    const SimTrace trace = run(p.ladder, p.penalty, c.x0, nominal, c.profile, c.steps);
    const double sim_s = seconds_since(t0);
    std::ofstream csv(dir / ("case" + std::to_string(id) + ".csv"));
    if (!csv) throw InputError("cannot write into '" + out_dir + "'");
    write_csv(csv, trace);
    // Runtime budgets include the shared ladder construction.
    if (id == 1) gates.push_back(acc::case1_gate(p.ladder, trace, build_s + sim_s));
    if (id == 2) gates.push_back(acc::case2_gate(trace, build_s + sim_s));
    if (id == 3) gates.push_back(acc::case3_gate(p.ladder, trace));
  }

  const AgreementReport rep = verify_agreement(p.ladder, p.penalty, acc::sample_lower(),
                                               acc::sample_upper(), Eigen::VectorXd::Zero(1),
                                               samples, seed, 100);
  gates.push_back(acc::agreement_gate(rep));
  gates.push_back(acc::timing_gate(rep));
  gates.push_back(acc::nesting_gate(p.ladder));

  std::ostringstream summary;
  bool all = true;
  for (const auto& g : gates) {
    summary << acc::format(g) << "\n";
    all = all && g.pass;
  }
  summary << (all ? "all gates passed" : "gate failure") << "\n";
  write_text((dir / "summary.txt").string(), summary.str());
  std::cout << summary.str();
  return all ? kExitOk : kExitGate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety protection and extension governor for constrained linear systems"};
  app.require_subcommand(1);

  std::string config_path, ladder_path, out_path, x_text, u_text, x0_text, w_text, lower_text,
      upper_text;
  int steps = 0, case_id = 0, samples = 200;
  std::uint64_t seed = 1;

  auto* build = app.add_subcommand("build-sets", "Build the safe-set ladder and check nesting");
  build->add_option("--config", config_path, "YAML problem config (default: built-in ACC)");
  build->add_option("--out", out_path, "Write the ladder JSON here");

  auto* gov = app.add_subcommand("govern", "Solve one governor step and print it as JSON");
  gov->add_option("--ladder", ladder_path, "Ladder JSON from build-sets");
  gov->add_option("--config", config_path, "YAML config (ladder built on the fly)");
  gov->add_option("--x", x_text, "State, comma separated")->required();
  gov->add_option("--u-nom", u_text, "Nominal input (default 0)");

  auto* sim = app.add_subcommand("simulate", "Closed-loop simulation to CSV");
  sim->add_option("--ladder", ladder_path, "Ladder JSON from build-sets");
  sim->add_option("--config", config_path, "YAML config (ladder built on the fly)");
  sim->add_option("--case", case_id, "ACC case 1, 2 or 3")->check(CLI::Range(1, 3));
  sim->add_option("--x0", x0_text, "Initial state when no --case is given");
  sim->add_option("--w", w_text, "Constant disturbance (default: worst-case vertex)");
  sim->add_option("--u-nom", u_text, "Constant nominal input (default 0)");
  sim->add_option("--steps", steps, "Number of steps")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_path, "CSV path (default stdout)");

  auto* rep = app.add_subcommand("reproduce-acc", "Run the ACC cases and acceptance gates");
  rep->add_option("--out", out_path, "Output directory")->required();
  rep->add_option("--samples", samples, "Oracle agreement samples")->check(CLI::PositiveNumber);
  rep->add_option("--seed", seed, "Sampling seed");

  auto* ver = app.add_subcommand("verify", "Compare the governor against the series oracle");
  ver->add_option("--ladder", ladder_path, "Ladder JSON from build-sets");
  ver->add_option("--config", config_path, "YAML config (ladder built on the fly)");
  ver->add_option("--samples", samples, "Number of sampled states")->check(CLI::PositiveNumber);
  ver->add_option("--seed", seed, "Sampling seed");
  ver->add_option("--lower", lower_text, "Sampling box lower corner");
  ver->add_option("--upper", upper_text, "Sampling box upper corner");
  ver->add_option("--u-nom", u_text, "Nominal input (default 0)");
  ver->add_option("--out", out_path, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*build) return cmd_build_sets(config_path, out_path);
    if (*gov) return cmd_govern(config_path, ladder_path, x_text, u_text);
    if (*sim)
      return cmd_simulate(config_path, ladder_path, case_id, x0_text, w_text, steps, u_text,
                          out_path);
    if (*rep) return cmd_reproduce_acc(out_path, samples, seed);
    if (*ver)
      return cmd_verify(config_path, ladder_path, samples, seed, lower_text, upper_text, u_text,
                        out_path);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitGate;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
