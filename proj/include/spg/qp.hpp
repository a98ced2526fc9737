#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace spg {

/// Tolerances for the dense active-set solver. Kept in one record so every
/// caller (governor, oracle, polyhedral LPs) agrees on the same numbers.
struct SolverSettings {
  int max_iterations = 100000;
  /// Rows with G z - g above this (scaled by 1 + |g|_inf) count as violated.
  double feasibility_tol = 1e-9;
  /// Multipliers above -multiplier_tol * (1 + max|mu|) are treated as >= 0.
  double multiplier_tol = 1e-11;
  /// Curvature added to LPs so they can run through the QP path.
  double lp_regularization = 1e-9;
  /// Half-width of the box added around LP decision variables.
  double lp_box = 1e6;
  /// Proximal re-solves after the first regularized LP solve.
  int lp_refinements = 2;
  /// Consecutive zero-length steps before switching to Bland's rule.
  int degenerate_switch = 50;
};

/// min 0.5 z'Hz + f'z  s.t.  G z <= g
struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;

  int n() const { return static_cast<int>(f.size()); }
  int rows() const { return static_cast<int>(g.size()); }
  /// Throws ContractViolation on inconsistent dimensions or asymmetric H.
  void validate() const;
};

enum class QpStatus { optimal, infeasible, max_iterations };

std::string to_string(QpStatus status);

struct QpSolution {
  Eigen::VectorXd z;
  /// One nonnegative multiplier per row of G.
  Eigen::VectorXd multipliers;
  QpStatus status = QpStatus::max_iterations;
  /// max(primal violation / (1+|g|), stationarity / (1+|f|), complementarity)
  double kkt_residual = 0.0;
  int iterations = 0;
  /// For infeasible problems: y >= 0 with |G'y| ~ 0 and g'y < 0.
  Eigen::VectorXd farkas;
};

/// Solves a strictly convex QP with a primal active-set method. A phase-1
/// problem finds the starting point. Throws ContractViolation if H is not
/// positive definite.
QpSolution solve(const QuadraticProgram& qp, const SolverSettings& settings = {});

/// Same as solve() but starts from a caller-supplied point that must satisfy
/// G z <= g (within feasibility_tol). Skips phase 1.
QpSolution solve_from(const QuadraticProgram& qp, const Eigen::VectorXd& start,
                      const SolverSettings& settings = {});

/// Result of minimizing the largest row violation s = max_i (G z - g)_i^+.
struct ViolationResult {
  double max_violation = 0.0;
  Eigen::VectorXd z;
  /// Multipliers of the G rows in the phase-1 problem; sum to ~1 when the
  /// system is infeasible and then form a Farkas certificate.
  Eigen::VectorXd multipliers;
  bool converged = true;
};

/// Phase-1 problem: min s  s.t.  G z - s <= g, s >= 0, started from `start`
/// (zero when absent).
ViolationResult minimize_violation(const Eigen::MatrixXd& G, const Eigen::VectorXd& g,
                                   const std::optional<Eigen::VectorXd>& start = std::nullopt,
                                   const SolverSettings& settings = {});

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd z;
  double value = 0.0;
};

/// max c'z  s.t.  G z <= g, solved through the QP path with a small proximal
/// curvature term and a large bounding box. `feasible_start`, when given,
/// must satisfy the rows and lets the solver skip phase 1.
LpResult maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& g,
                  const std::optional<Eigen::VectorXd>& feasible_start = std::nullopt,
                  const SolverSettings& settings = {});

/// Diagnostics shared by tests and the solver itself.
struct KktReport {
  double primal = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  double dual = 0.0;
};

KktReport kkt_report(const QuadraticProgram& qp, const Eigen::VectorXd& z,
                     const Eigen::VectorXd& multipliers);

}  // namespace spg
