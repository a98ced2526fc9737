#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <vector>

#include "spg/governor.hpp"

namespace spg {

enum class ProblemStatus { feasible, infeasible };

/// Outcome of the naive route: solve the protection problem, and if it is
/// infeasible test the extension problems from depth k' down to 0.
struct OracleResult {
  std::optional<Eigen::VectorXd> u;
  /// k'+1 when protection is feasible, else the largest feasible depth, -1
  /// when none is.
  int depth = -1;
  /// Protection problem first, then depths k', k'-1, ... as they were solved.
  std::vector<ProblemStatus> per_problem_status;
  std::chrono::duration<double> wall_time{0.0};
};

/// Solves each problem from scratch (phase 1 included). Depth-k feasibility
/// uses the cumulative rows of groups 0..k together with U; a problem counts
/// as feasible when its smallest achievable max-violation is within the
/// governor's zero tolerance.
OracleResult solve_series(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom,
                          const SolverSettings& settings = {});

nlohmann::json to_json(const OracleResult& res);

/// Governor vs. oracle over states drawn uniformly from [lower, upper].
struct AgreementReport {
  int samples = 0;
  int agree = 0;
  int protected_cases = 0;
  /// Largest |u - u_oracle|_inf over protected states.
  double max_u_deviation = 0.0;
  double max_kkt_residual = 0.0;
  double mean_govern_s = 0.0;
  double mean_series_s = 0.0;
  /// Sample indices where k* and the oracle depth differ.
  std::vector<int> mismatches;
};

/// Seeded with std::mt19937_64; the nominal input is u_nom for every state.
/// Wall times are averaged over the first `timed` samples (all when <= 0).
AgreementReport verify_agreement(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& u_nom, int samples, std::uint64_t seed,
                                 int timed = 0, const SolverSettings& settings = {});

nlohmann::json to_json(const AgreementReport& rep);

}  // namespace spg
