#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <vector>

#include "spg/polytope.hpp"

namespace spg {

/// x+ = A x + B u + E w
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd E;
  double dt = 1.0;  // metadata only

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(E.cols()); }
  void validate() const;
  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& w) const;
};

/// Virtual law u = K x + v used only to shape the safe sets.
struct VirtualFeedback {
  Eigen::MatrixXd K;
};

Eigen::MatrixXd closed_loop(const LinearSystem& sys, const VirtualFeedback& fb);
double spectral_radius(const Eigen::MatrixXd& M);
/// Throws ContractViolation mentioning "spectral radius" unless A + BK is
/// Schur with at least `margin` to spare.
void require_schur(const LinearSystem& sys, const VirtualFeedback& fb, double margin = 1e-6);

/// Depth label used for the infinite-step group.
inline constexpr int kInfiniteDepth = -1;

/// Rows Cx x + Cu u <= c in (x,u)-space, each row jointly unit-normalized.
struct ConstraintGroup {
  Eigen::MatrixXd Cx;
  Eigen::MatrixXd Cu;
  Eigen::VectorXd c;
  int depth = 0;

  int rows() const { return static_cast<int>(c.size()); }
  bool is_infinite() const { return depth == kInfiniteDepth; }
  /// Cx x + Cu u - c; nonpositive entries are satisfied rows.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

struct SafeSetLadder {
  /// Deduplicated groups for depths 0..k', then the infinite-step group.
  std::vector<ConstraintGroup> groups;
  /// Groups before deduplication, same ordering.
  std::vector<ConstraintGroup> raw_groups;
  /// k-step safe sets for k = 0..k'.
  std::vector<Polytope> tilde_sets;
  Polytope x_inf;
  int k_prime = 0;
  /// Horizon at which the infinite-step construction stopped changing.
  int determination_index = 0;
  LinearSystem system;
  VirtualFeedback feedback;
  Polytope safe_set;
  Polytope input_set;
  DisturbanceSet disturbance;
  /// A point of U, used to seed governor solves.
  Eigen::VectorXd input_anchor;
  /// input_support[k](j) = max over u in U of groups[k].Cu.row(j) u. A row
  /// whose right-hand side exceeds this can never bind.
  std::vector<Eigen::VectorXd> input_support;

  const ConstraintGroup& infinite_group() const { return groups.back(); }
  /// Stacks groups [0, count) into one row block.
  ConstraintGroup stacked(int count) const;
};

/// Pi_k over (x, v): X0 and U constraints propagated t = 0..k steps along the
/// virtual closed loop with disturbance tightening. Redundancy-removed.
/// `empty`, when given, reports whether the resulting set is empty.
Polytope build_pi_k(const LinearSystem& sys, const VirtualFeedback& fb, const Polytope& X0,
                    const Polytope& U, const DisturbanceSet& W, int k, bool* empty = nullptr);

/// Projection of Pi onto its first n coordinates.
Polytope build_tilde_x(const Polytope& pi, int n);

struct InfiniteSetInfo {
  int determination_index = 0;
  Polytope omega;  // tightened steady-state v constraints
  Polytope pi_inf;
};

/// Infinite-step safe set: Pi_k intersected with X0 x Omega', grown until it
/// stops changing (at most k_cap), then projected. `min_horizon` forces the
/// horizon used for the final set to be at least that value.
Polytope build_x_inf(const LinearSystem& sys, const VirtualFeedback& fb, const Polytope& X0,
                     const Polytope& U, const DisturbanceSet& W, double eps_tight, int k_cap,
                     int min_horizon = 0, InfiniteSetInfo* info = nullptr);

/// Rows over (x,u) with row <= 0 iff A x + B u + E w lies in `target` for
/// every w in W.
ConstraintGroup build_group(const Polytope& target, const LinearSystem& sys,
                            const DisturbanceSet& W, int depth);

/// Removes from each group rows already present in an earlier group.
std::vector<ConstraintGroup> dedupe_ladder(const std::vector<ConstraintGroup>& groups,
                                           double tol = 1e-9);

struct LadderOptions {
  int k_prime = 8;
  double eps_tight = 1e-3;
  int k_cap = 50;
};

SafeSetLadder build_ladder(const LinearSystem& sys, const VirtualFeedback& fb,
                           const Polytope& X0, const Polytope& U, const DisturbanceSet& W,
                           const LadderOptions& options);

/// Fills ladder.input_support from ladder.groups and ladder.input_set.
void attach_input_support(SafeSetLadder& ladder, const SolverSettings& settings = {});

struct NestingReport {
  /// consecutive[k] is contains(tilde_k, tilde_{k+1}).
  std::vector<bool> consecutive;
  bool x_inf_in_last = false;
  bool x_inf_in_x0 = false;
  bool base_equals_x0 = false;
  bool all() const;
};

NestingReport check_nesting(const SafeSetLadder& ladder);

inline constexpr int kLadderSchemaVersion = 1;

nlohmann::json to_json(const SafeSetLadder& ladder);
SafeSetLadder ladder_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* what);

}  // namespace spg
