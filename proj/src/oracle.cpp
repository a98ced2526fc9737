#include "spg/oracle.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "spg/errors.hpp"

namespace spg {

namespace {

// Rows over u: groups [0, count) evaluated at x, then the U rows.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> input_rows(const SafeSetLadder& ladder, int count,
                                                       const Eigen::VectorXd& x) {
  const ConstraintGroup stack = ladder.stacked(count);
  const Polytope& U = ladder.input_set;
  Eigen::MatrixXd G(stack.rows() + U.num_rows(), ladder.system.m());
  Eigen::VectorXd g(G.rows());
  G << stack.Cu, U.normals();
  g << stack.c - stack.Cx * x, U.offsets();
  return {G, g};
}

}  // namespace

OracleResult solve_series(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom,
                          const SolverSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  const int m = ladder.system.m();
  cfg.validate(m);
  if (x.size() != ladder.system.n() || u_nom.size() != m)
    throw ContractViolation("solve_series: dimension mismatch");
  const double tol = zero_tolerance(ladder, cfg);
  const int all_groups = ladder.k_prime + 2;

  OracleResult res;
  {
    auto [G, g] = input_rows(ladder, all_groups, x);
    const ViolationResult phase1 = minimize_violation(G, g, std::nullopt, settings);
    if (phase1.max_violation <= tol) {
      QuadraticProgram qp;
      const Eigen::MatrixXd S = cfg.weight(m);
      qp.H = 2.0 * S;
      qp.f = -2.0 * S * u_nom;
      qp.G = G;
      qp.g = g.array() + phase1.max_violation;
      const QpSolution sol = solve_from(qp, phase1.z, settings);
      if (sol.status != QpStatus::optimal)
        throw NumericalError("oracle protection QP finished with status " + to_string(sol.status));
      res.per_problem_status.push_back(ProblemStatus::feasible);
      res.u = sol.z;
      res.depth = ladder.k_prime + 1;
      res.wall_time = std::chrono::steady_clock::now() - t0;
      return res;
    }
    res.per_problem_status.push_back(ProblemStatus::infeasible);
  }

  for (int k = ladder.k_prime; k >= 0; --k) {
    auto [G, g] = input_rows(ladder, k + 1, x);
    const ViolationResult phase1 = minimize_violation(G, g, std::nullopt, settings);
    if (phase1.max_violation <= tol) {
      res.per_problem_status.push_back(ProblemStatus::feasible);
      res.u = phase1.z;
      res.depth = k;
      break;
    }
    res.per_problem_status.push_back(ProblemStatus::infeasible);
  }
  res.wall_time = std::chrono::steady_clock::now() - t0;
  return res;
}

nlohmann::json to_json(const OracleResult& res) {
  nlohmann::json statuses = nlohmann::json::array();
  for (auto s : res.per_problem_status)
    statuses.push_back(s == ProblemStatus::feasible ? "feasible" : "infeasible");
  nlohmann::json j = {{"depth", res.depth},
                      {"per_problem_status", statuses},
                      {"wall_time_s", res.wall_time.count()}};
  j["u"] = res.u ? vector_to_json(*res.u) : nlohmann::json(nullptr);
  return j;
}

AgreementReport verify_agreement(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& u_nom, int samples, std::uint64_t seed,
                                 int timed, const SolverSettings& settings) {
  const int n = ladder.system.n();
  if (lower.size() != n || upper.size() != n || (upper - lower).minCoeff() < 0.0)
    throw ContractViolation("verify_agreement: sampling box must be n-dimensional and ordered");
  if (samples < 1) throw ContractViolation("verify_agreement: need at least one sample");
  const int window = timed > 0 ? std::min(timed, samples) : samples;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AgreementReport rep;
  rep.samples = samples;
  double govern_total = 0.0, series_total = 0.0;
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x(j) = lower(j) + (upper(j) - lower(j)) * unit(rng);

    const auto t0 = std::chrono::steady_clock::now();
    const GovernorSolution gov = govern(ladder, cfg, x, u_nom, settings);
    const auto t1 = std::chrono::steady_clock::now();
    const OracleResult orc = solve_series(ladder, cfg, x, u_nom, settings);
    const auto t2 = std::chrono::steady_clock::now();
    if (i < window) {
      govern_total += std::chrono::duration<double>(t1 - t0).count();
      series_total += std::chrono::duration<double>(t2 - t1).count();
    }

    rep.max_kkt_residual = std::max(rep.max_kkt_residual, gov.kkt_residual);
    if (gov.k_star == orc.depth) {
      ++rep.agree;
    } else {
      rep.mismatches.push_back(i);
    }
    if (orc.depth == ladder.k_prime + 1 && gov.k_star == orc.depth) {
      ++rep.protected_cases;
      rep.max_u_deviation =
          std::max(rep.max_u_deviation, (gov.u - *orc.u).lpNorm<Eigen::Infinity>());
    }
  }
  rep.mean_govern_s = govern_total / window;
  rep.mean_series_s = series_total / window;
  return rep;
}

nlohmann::json to_json(const AgreementReport& rep) {
  return {{"samples", rep.samples},
          {"agree", rep.agree},
          {"protected_cases", rep.protected_cases},
          {"max_u_deviation", rep.max_u_deviation},
          {"max_kkt_residual", rep.max_kkt_residual},
          {"mean_govern_s", rep.mean_govern_s},
          {"mean_series_s", rep.mean_series_s},
          {"mismatches", rep.mismatches}};
}

}  // namespace spg
