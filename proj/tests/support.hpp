#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "spg/config.hpp"
#include "spg/governor.hpp"
#include "spg/qp.hpp"
#include "spg/safesets.hpp"

namespace spg::test {

/// ACC instance and ladder, built once per test binary.
inline const ProblemConfig& acc() {
  static const ProblemConfig cfg = acc_config();
  return cfg;
}

inline const SafeSetLadder& acc_ladder() {
  static const SafeSetLadder ladder = build_ladder(acc());
  return ladder;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Eigen::VectorXd uniform(std::mt19937_64& rng, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
  return x;
}

/// Exhaustive active-set oracle for small strictly convex QPs: solves the
/// equality-constrained KKT system for every subset of rows and keeps the
/// point that is primal feasible with nonnegative multipliers.
struct BruteForceResult {
  bool feasible = false;
  Eigen::VectorXd z;
  double objective = 0.0;
};

inline BruteForceResult brute_force_qp(const QuadraticProgram& qp, double tol = 1e-9) {
  const int n = qp.n();
  const int r = qp.rows();
  BruteForceResult best;
  for (unsigned mask = 0; mask < (1u << r); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < r; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const int a = static_cast<int>(act.size());
    if (a > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + a, n + a);
    Eigen::VectorXd rhs(n + a);
    K.topLeftCorner(n, n) = qp.H;
    rhs.head(n) = -qp.f;
    for (int k = 0; k < a; ++k) {
      K.block(0, n + k, n, 1) = qp.G.row(act[static_cast<std::size_t>(k)]).transpose();
      K.block(n + k, 0, 1, n) = qp.G.row(act[static_cast<std::size_t>(k)]);
      rhs(n + k) = qp.g(act[static_cast<std::size_t>(k)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + a) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    const Eigen::VectorXd mu = sol.tail(a);
    if (a > 0 && mu.minCoeff() < -tol) continue;
    if (r > 0 && (qp.G * z - qp.g).maxCoeff() > tol * (1.0 + qp.g.cwiseAbs().maxCoeff())) continue;
    const double obj = 0.5 * z.dot(qp.H * z) + qp.f.dot(z);
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.z = z;
      best.objective = obj;
    }
  }
  return best;
}

/// Random strictly convex QP with a known feasible point; a few rows are
/// made tight there to exercise degenerate vertices.
inline QuadraticProgram random_qp(std::mt19937_64& rng, int n, int rows) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  QuadraticProgram qp;
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = normal(rng);
  qp.H = R.transpose() * R + 0.1 * Eigen::MatrixXd::Identity(n, n);
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.f.resize(n);
  for (int i = 0; i < n; ++i) qp.f(i) = 3.0 * normal(rng);
  Eigen::VectorXd z0(n);
  for (int i = 0; i < n; ++i) z0(i) = normal(rng);
  qp.G.resize(rows, n);
  qp.g.resize(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n; ++j) qp.G(i, j) = normal(rng);
    const double slack = unit(rng) < 0.2 ? 0.0 : unit(rng);
    qp.g(i) = qp.G.row(i).dot(z0) + slack;
  }
  return qp;
}

/// Scalar-input feasibility by interval intersection: is there u with
/// a_i u <= b_i + tol for every row? Returns the interval [lo, hi] if so.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool empty() const { return lo > hi; }
};

inline Interval scalar_interval(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  Interval out;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double rhs = b(i) + tol;
    if (a(i) > 0.0) {
      out.hi = std::min(out.hi, rhs / a(i));
    } else if (a(i) < 0.0) {
      out.lo = std::max(out.lo, rhs / a(i));
    } else if (rhs < 0.0) {
      out.lo = 1.0;
      out.hi = 0.0;
    }
  }
  return out;
}

/// Rows of groups [first, last) of `groups` plus U, written over the scalar u.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> scalar_rows(
    const SafeSetLadder& ladder, const std::vector<ConstraintGroup>& groups, std::size_t first,
    std::size_t last, const Eigen::VectorXd& x) {
  std::vector<double> a, b;
  for (std::size_t k = first; k < last; ++k)
    for (int j = 0; j < groups[k].rows(); ++j) {
      a.push_back(groups[k].Cu(j, 0));
      b.push_back(groups[k].c(j) - groups[k].Cx.row(j).dot(x));
    }
  const Polytope& U = ladder.input_set;
  for (int j = 0; j < U.num_rows(); ++j) {
    a.push_back(U.normals()(j, 0));
    b.push_back(U.offsets()(j));
  }
  return {Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())),
          Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()))};
}

/// Largest depth whose cumulative rows admit an input in U (k'+1 for the
/// infinite-step rows), -1 if none; scalar inputs only.
inline int interval_depth(const SafeSetLadder& ladder, const Eigen::VectorXd& x, double tol) {
  const auto& raw = ladder.raw_groups;
  {
    auto [a, b] = scalar_rows(ladder, raw, raw.size() - 1, raw.size(), x);
    if (!scalar_interval(a, b, tol).empty()) return ladder.k_prime + 1;
  }
  for (int k = ladder.k_prime; k >= 0; --k) {
    auto [a, b] = scalar_rows(ladder, raw, 0, static_cast<std::size_t>(k + 1), x);
    if (!scalar_interval(a, b, tol).empty()) return k;
  }
  return -1;
}

}  // namespace spg::test
