#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include "spg/qp.hpp"
#include "spg/safesets.hpp"

namespace spg {

/// Slack penalty configuration. The slack cost at depth k is
/// theta^(k'+2-k) * phi(eps_k) with phi(eps) = eps + a*eps^2.
struct PenaltyConfig {
  double theta = 2.0;
  double phi_a = 0.01;
  int k_prime = 8;
  /// m x m adjustment weight; an empty matrix means 0.01 * I.
  Eigen::MatrixXd S;
  /// Threshold for reading eps_k as zero; <= 0 selects 1e-6 * (1 + max|c|)
  /// over the ladder offsets.
  double eps_zero_tol = 0.0;

  /// Throws ContractViolation unless theta > 1, a >= 0, k' >= 0 and S is
  /// symmetric positive definite of size m.
  void validate(int m) const;
  Eigen::MatrixXd weight(int m) const;
};

/// Curvature floor placed on each slack when phi is linear (a = 0).
inline constexpr double kSlackCurvatureFloor = 1e-8;

double phi_eval(const PenaltyConfig& cfg, double eps);
/// phi(0) = 0, phi'(0) = 1 (finite difference) and phi'' >= 0 on [0, 10].
bool phi_props(const PenaltyConfig& cfg);
/// theta^(k'+2-k) for k = 0..k'+1.
double slack_weight(const PenaltyConfig& cfg, int k);

double zero_tolerance(const SafeSetLadder& ladder, const PenaltyConfig& cfg);

/// Decision vector z = (u, eps_0..eps_{k'+1}).
QuadraticProgram assemble(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom);

struct GovernorSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd eps;
  /// k'+1 means protected (next state robustly in the infinite-step set);
  /// -1 means no depth can be enforced.
  int k_star = -1;
  QpStatus status = QpStatus::optimal;
  double kkt_residual = 0.0;
  int iterations = 0;
  double objective = 0.0;
  double zero_tol = 0.0;
};

/// Throws NumericalError if the QP does not reach an optimal status.
GovernorSolution govern(const SafeSetLadder& ladder, const PenaltyConfig& cfg,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& u_nom,
                        const SolverSettings& settings = {});

nlohmann::json to_json(const GovernorSolution& sol);
nlohmann::json to_json(const PenaltyConfig& cfg);
PenaltyConfig penalty_from_json(const nlohmann::json& j);

}  // namespace spg
