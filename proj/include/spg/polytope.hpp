#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <vector>

#include "spg/qp.hpp"

namespace spg {

/// H-representation {x : N x <= b}. Rows are stored canonicalized: every
/// normal has unit Euclidean norm, vacuous rows are dropped and exact
/// duplicates removed. An infeasible zero-normal row is replaced by the pair
/// x_1 <= -1, -x_1 <= -1 so the empty set stays representable with unit
/// normals.
class Polytope {
 public:
  Polytope() = default;
  explicit Polytope(int dim);
  Polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets);

  static Polytope box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  int dim() const { return dim_; }
  int num_rows() const { return static_cast<int>(offsets_.size()); }
  const Eigen::MatrixXd& normals() const { return normals_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }

  /// min_j (b_j - n_j'x); nonnegative inside, the signed distance to the
  /// nearest facet plane otherwise.
  double margin(const Eigen::VectorXd& x) const;
  bool contains_point(const Eigen::VectorXd& x, double tol = 1e-9) const;

  /// Row-wise concatenation (re-canonicalized).
  Polytope intersect(const Polytope& other) const;

  /// LP-based emptiness test.
  bool is_empty(const SolverSettings& settings = {}) const;
  /// A point satisfying every row, if one exists.
  std::optional<Eigen::VectorXd> feasible_point(const SolverSettings& settings = {}) const;

  /// Axis-aligned bounds via 2*dim LPs; throws if unbounded or empty.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box(
      const SolverSettings& settings = {}) const;

  bool operator==(const Polytope& other) const {
    return dim_ == other.dim_ && normals_ == other.normals_ && offsets_ == other.offsets_;
  }

 private:
  int dim_ = 0;
  Eigen::MatrixXd normals_;
  Eigen::VectorXd offsets_;
};

/// Re-runs canonicalization on an existing polytope. Idempotent bit-for-bit.
Polytope canonicalize(const Polytope& p);

/// Same row set after canonicalization, up to row order, within `tol`.
bool same_rows(const Polytope& a, const Polytope& b, double tol = 1e-9);

enum class DisturbanceKind { box, euclidean_ball };

/// Bounded disturbance set: a box with per-coordinate half-widths or a
/// Euclidean ball with scalar radius.
class DisturbanceSet {
 public:
  DisturbanceSet() = default;
  static DisturbanceSet box(Eigen::VectorXd radius);
  static DisturbanceSet ball(int dim, double radius);

  DisturbanceKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(radius_.size()); }
  /// Per-coordinate half-widths (box) or the radius repeated (ball).
  const Eigen::VectorXd& radius() const { return radius_; }
  bool contains(const Eigen::VectorXd& w, double tol = 1e-12) const;
  /// Vertices of a box set, sign patterns in lexicographic order with -
  /// before +. Throws for ball sets.
  std::vector<Eigen::VectorXd> vertices() const;

 private:
  DisturbanceKind kind_ = DisturbanceKind::box;
  Eigen::VectorXd radius_;
};

/// h_W(a) = max_{w in W} a'w.
double support(const DisturbanceSet& w, const Eigen::VectorXd& a);

/// Orthogonal projection onto the coordinates in `keep` (ascending order in
/// the result) by Fourier-Motzkin elimination with redundancy removal after
/// every eliminated coordinate.
Polytope project_out(const Polytope& p, const std::vector<int>& keep,
                     const SolverSettings& settings = {});

/// Drops rows whose removal does not change the point set.
Polytope remove_redundant(const Polytope& p, const SolverSettings& settings = {});

struct ContainmentResult {
  bool contained = false;
  /// Some row of the outer set was unbounded over the inner set.
  bool unbounded = false;
  /// Largest b_j-excess found (max_{x in Q} n_j'x - b_j).
  double worst_excess = 0.0;
};

/// Q subset of P via one LP per row of P.
ContainmentResult check_containment(const Polytope& outer, const Polytope& inner,
                                    double tol = 1e-9,
                                    const SolverSettings& settings = {});
bool contains(const Polytope& outer, const Polytope& inner, double tol = 1e-9,
              const SolverSettings& settings = {});

nlohmann::json to_json(const Polytope& p);
Polytope polytope_from_json(const nlohmann::json& j);

}  // namespace spg
