#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "spg/governor.hpp"

namespace spg {

enum class ProfileKind { constant, piecewise_constant, worst_case_vertex };

/// Disturbance realization w_t. Schedule entries (t_start, w) hold until the
/// next entry; values outside W are allowed (out-of-model excursions).
struct DisturbanceProfile {
  ProfileKind kind = ProfileKind::constant;
  std::vector<std::pair<int, Eigen::VectorXd>> schedule;

  static DisturbanceProfile constant(Eigen::VectorXd w);
  static DisturbanceProfile piecewise(std::vector<std::pair<int, Eigen::VectorXd>> schedule);
  static DisturbanceProfile worst_case_vertex();

  void validate(const DisturbanceSet& W) const;
  /// Scheduled value at time t (not valid for worst_case_vertex).
  Eigen::VectorXd at(int t) const;
};

using NominalController = std::function<Eigen::VectorXd(int t, const Eigen::VectorXd& x)>;

NominalController constant_nominal(Eigen::VectorXd u);

struct SimStep {
  int t = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u_nom;
  Eigen::VectorXd u;
  Eigen::VectorXd w;
  Eigen::VectorXd eps;
  int k_star = -1;
  bool in_x0 = false;
  bool in_xinf = false;
};

struct SimTrace {
  std::vector<SimStep> steps;
  /// State after the last recorded step.
  Eigen::VectorXd final_state;
};

/// Flags use this absolute tolerance on normalized rows.
inline constexpr double kMembershipTol = 1e-9;

SimTrace run(const SafeSetLadder& ladder, const PenaltyConfig& cfg, const Eigen::VectorXd& x0,
             const NominalController& nominal, const DisturbanceProfile& profile, int steps,
             const SolverSettings& settings = {});

/// Vertex of W with the smallest margin of the successor state to the
/// infinite-step set; ties go to the lexicographically smallest vertex.
Eigen::VectorXd worst_case_vertex(const SafeSetLadder& ladder, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u);

/// Header t,x1..,u_nom1..,u1..,w1..,k_star,eps0..,in_X0,in_Xinf; doubles in
/// %.17g.
void write_csv(std::ostream& os, const SimTrace& trace);

}  // namespace spg
