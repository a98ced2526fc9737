#include "spg/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spg/errors.hpp"

namespace spg {

namespace {

constexpr double kVacuousNorm = 1e-12;
constexpr double kUnitSlack = 1e-14;
constexpr double kEliminationZero = 1e-10;

struct Rows {
  Eigen::MatrixXd normals;
  Eigen::VectorXd offsets;
};

Rows canonical_rows(const Eigen::MatrixXd& normals, const Eigen::VectorXd& offsets, int dim) {
  std::vector<Eigen::VectorXd> kept_n;
  std::vector<double> kept_b;
  bool infeasible = false;

  auto push_unique = [&](const Eigen::VectorXd& n, double b) {
    for (std::size_t k = 0; k < kept_b.size(); ++k)
      if (kept_b[k] == b && kept_n[k] == n) return;
    kept_n.push_back(n);
    kept_b.push_back(b);
  };

  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    Eigen::VectorXd n = normals.row(i).transpose();
    double b = offsets(i);
    const double norm = n.norm();
    if (norm < kVacuousNorm) {
      if (b < 0.0) infeasible = true;
      continue;
    }
    if (std::abs(norm - 1.0) > kUnitSlack) {
      n /= norm;
      b /= norm;
    }
    push_unique(n, b);
  }
  if (infeasible) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(0) = 1.0;
    push_unique(e, -1.0);
    push_unique(-e, -1.0);
  }

  Rows out;
  out.normals.resize(static_cast<Eigen::Index>(kept_b.size()), dim);
  out.offsets.resize(static_cast<Eigen::Index>(kept_b.size()));
  for (std::size_t k = 0; k < kept_b.size(); ++k) {
    out.normals.row(static_cast<Eigen::Index>(k)) = kept_n[k].transpose();
    out.offsets(static_cast<Eigen::Index>(k)) = kept_b[k];
  }
  return out;
}

Polytope empty_polytope(int dim) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(1, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(1, -1.0);
  return Polytope(n, b);
}

// One Fourier-Motzkin step: eliminates column `col` and returns rows over the
// remaining columns.
Rows eliminate(const Eigen::MatrixXd& N, const Eigen::VectorXd& b, int col) {
  const int d = static_cast<int>(N.cols());
  std::vector<int> pos, neg, zero;
  for (Eigen::Index i = 0; i < N.rows(); ++i) {
    const double a = N(i, col);
    if (a > kEliminationZero) pos.push_back(static_cast<int>(i));
    else if (a < -kEliminationZero) neg.push_back(static_cast<int>(i));
    else zero.push_back(static_cast<int>(i));
  }
  auto drop_col = [&](const Eigen::VectorXd& row) {
    Eigen::VectorXd out(d - 1);
    for (int j = 0, k = 0; j < d; ++j)
      if (j != col) out(k++) = row(j);
    return out;
  };

  const std::size_t count = zero.size() + pos.size() * neg.size();
  Rows out;
  out.normals.resize(static_cast<Eigen::Index>(count), d - 1);
  out.offsets.resize(static_cast<Eigen::Index>(count));
  Eigen::Index r = 0;
  for (int i : zero) {
    out.normals.row(r) = drop_col(N.row(i).transpose()).transpose();
    out.offsets(r++) = b(i);
  }
  for (int p : pos) {
    const double sp = 1.0 / N(p, col);
    for (int q : neg) {
      const double sq = -1.0 / N(q, col);
      const Eigen::VectorXd combined = sp * N.row(p).transpose() + sq * N.row(q).transpose();
      out.normals.row(r) = drop_col(combined).transpose();
      out.offsets(r++) = sp * b(p) + sq * b(q);
    }
  }
  return out;
}

}  // namespace

Polytope::Polytope(int dim) : dim_(dim), normals_(0, dim), offsets_(0) {
  if (dim <= 0) throw ContractViolation("Polytope: dimension must be positive");
}

Polytope::Polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets)
    : dim_(static_cast<int>(normals.cols())) {
  if (dim_ <= 0) throw ContractViolation("Polytope: dimension must be positive");
  if (normals.rows() != offsets.size())
    throw ContractViolation("Polytope: normals and offsets disagree on row count");
  if (!normals.allFinite() || !offsets.allFinite())
    throw ContractViolation("Polytope: non-finite row data");
  Rows rows = canonical_rows(normals, offsets, dim_);
  normals_ = std::move(rows.normals);
  offsets_ = std::move(rows.offsets);
}

Polytope Polytope::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const auto d = lower.size();
  if (upper.size() != d) throw ContractViolation("Polytope::box: bound sizes differ");
  Eigen::MatrixXd n(2 * d, d);
  Eigen::VectorXd b(2 * d);
  n.setZero();
  for (Eigen::Index i = 0; i < d; ++i) {
    n(2 * i, i) = 1.0;
    b(2 * i) = upper(i);
    n(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lower(i);
  }
  return Polytope(n, b);
}

double Polytope::margin(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ContractViolation("Polytope::margin: dimension mismatch");
  if (num_rows() == 0) return std::numeric_limits<double>::infinity();
  return (offsets_ - normals_ * x).minCoeff();
}

bool Polytope::contains_point(const Eigen::VectorXd& x, double tol) const {
  return margin(x) >= -tol;
}

Polytope Polytope::intersect(const Polytope& other) const {
  if (other.dim_ != dim_) throw ContractViolation("Polytope::intersect: dimension mismatch");
  Eigen::MatrixXd n(num_rows() + other.num_rows(), dim_);
  Eigen::VectorXd b(num_rows() + other.num_rows());
  n << normals_, other.normals_;
  b << offsets_, other.offsets_;
  return Polytope(n, b);
}

std::optional<Eigen::VectorXd> Polytope::feasible_point(const SolverSettings& settings) const {
  if (num_rows() == 0) return Eigen::VectorXd::Zero(dim_);
  const ViolationResult res = minimize_violation(normals_, offsets_, std::nullopt, settings);
  if (res.max_violation > settings.feasibility_tol * (1.0 + offsets_.cwiseAbs().maxCoeff()))
    return std::nullopt;
  return res.z;
}

bool Polytope::is_empty(const SolverSettings& settings) const {
  return !feasible_point(settings).has_value();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Polytope::bounding_box(
    const SolverSettings& settings) const {
  const auto start = feasible_point(settings);
  if (!start) throw ContractViolation("bounding_box: polytope is empty");
  Eigen::VectorXd lo(dim_), hi(dim_);
  for (int i = 0; i < dim_; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
    e(i) = 1.0;
    const LpResult up = maximize(e, normals_, offsets_, start, settings);
    const LpResult down = maximize(-e, normals_, offsets_, start, settings);
    if (up.status != LpStatus::optimal || down.status != LpStatus::optimal)
      throw ContractViolation("bounding_box: polytope is unbounded");
    hi(i) = up.value;
    lo(i) = -down.value;
  }
  return {lo, hi};
}

Polytope canonicalize(const Polytope& p) {
  if (p.dim() == 0) return p;
  return Polytope(p.normals(), p.offsets());
}

bool same_rows(const Polytope& a, const Polytope& b, double tol) {
  if (a.dim() != b.dim()) return false;
  auto covered = [tol](const Polytope& x, const Polytope& y) {
    for (int i = 0; i < x.num_rows(); ++i) {
      bool found = false;
      for (int j = 0; j < y.num_rows() && !found; ++j) {
        found = (x.normals().row(i) - y.normals().row(j)).cwiseAbs().maxCoeff() <= tol &&
                std::abs(x.offsets()(i) - y.offsets()(j)) <= tol;
      }
      if (!found) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

DisturbanceSet DisturbanceSet::box(Eigen::VectorXd radius) {
  if (radius.size() == 0) throw ContractViolation("DisturbanceSet: dimension must be positive");
  if (!radius.allFinite() || radius.minCoeff() < 0.0)
    throw ContractViolation("DisturbanceSet: radius must be finite and nonnegative");
  DisturbanceSet w;
  w.kind_ = DisturbanceKind::box;
  w.radius_ = std::move(radius);
  return w;
}

DisturbanceSet DisturbanceSet::ball(int dim, double radius) {
  if (dim <= 0) throw ContractViolation("DisturbanceSet: dimension must be positive");
  if (!std::isfinite(radius) || radius < 0.0)
    throw ContractViolation("DisturbanceSet: radius must be finite and nonnegative");
  DisturbanceSet w;
  w.kind_ = DisturbanceKind::euclidean_ball;
  w.radius_ = Eigen::VectorXd::Constant(dim, radius);
  return w;
}

bool DisturbanceSet::contains(const Eigen::VectorXd& w, double tol) const {
  if (w.size() != dim()) throw ContractViolation("DisturbanceSet::contains: dimension mismatch");
  if (kind_ == DisturbanceKind::box) return ((w.cwiseAbs() - radius_).array() <= tol).all();
  return w.norm() <= radius_(0) + tol;
}

std::vector<Eigen::VectorXd> DisturbanceSet::vertices() const {
  if (kind_ != DisturbanceKind::box)
    throw ContractViolation("DisturbanceSet::vertices: only box sets have vertices");
  const int p = dim();
  if (p > 20) throw ContractViolation("DisturbanceSet::vertices: dimension too large");
  std::vector<Eigen::VectorXd> out;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) {
      const bool plus = (mask >> (p - 1 - i)) & 1u;
      v(i) = plus ? radius_(i) : -radius_(i);
    }
    out.push_back(v);
  }
  return out;
}

double support(const DisturbanceSet& w, const Eigen::VectorXd& a) {
  if (a.size() != w.dim())
    throw ContractViolation("support: direction has dimension " + std::to_string(a.size()) +
                            ", set has " + std::to_string(w.dim()));
  if (w.kind() == DisturbanceKind::box) return w.radius().dot(a.cwiseAbs());
  return w.radius()(0) * a.norm();
}

Polytope remove_redundant(const Polytope& p, const SolverSettings& settings) {
  const int r = p.num_rows();
  if (r <= 1) return p;
  const auto start = p.feasible_point(settings);
  if (!start) return p;

  const Eigen::MatrixXd& N = p.normals();
  const Eigen::VectorXd& b = p.offsets();
  std::vector<char> kept(static_cast<std::size_t>(r), 1);
  int kept_count = r;
  for (int i = 0; i < r; ++i) {
    // Other kept rows plus row i relaxed by one unit, which keeps the LP bounded.
    Eigen::MatrixXd G(kept_count, p.dim());
    Eigen::VectorXd g(kept_count);
    Eigen::Index k = 0;
    for (int j = 0; j < r; ++j) {
      if (!kept[static_cast<std::size_t>(j)]) continue;
      G.row(k) = N.row(j);
      g(k++) = j == i ? b(j) + 1.0 : b(j);
    }
    const LpResult lp = maximize(N.row(i).transpose(), G, g, start, settings);
    if (lp.status == LpStatus::optimal && lp.value <= b(i) + 1e-9 * (1.0 + std::abs(b(i)))) {
      kept[static_cast<std::size_t>(i)] = 0;
      --kept_count;
    }
  }
  Eigen::MatrixXd n(kept_count, p.dim());
  Eigen::VectorXd o(kept_count);
  Eigen::Index k = 0;
  for (int j = 0; j < r; ++j) {
    if (!kept[static_cast<std::size_t>(j)]) continue;
    n.row(k) = N.row(j);
    o(k++) = b(j);
  }
  return Polytope(n, o);
}

Polytope project_out(const Polytope& p, const std::vector<int>& keep,
                     const SolverSettings& settings) {
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty() || static_cast<int>(sorted.size()) >= p.dim())
    throw ContractViolation("project_out: keep must be a nonempty strict subset of coordinates");
  if (sorted.front() < 0 || sorted.back() >= p.dim())
    throw ContractViolation("project_out: coordinate index out of range");

  const int out_dim = static_cast<int>(sorted.size());
  if (p.is_empty(settings)) return empty_polytope(out_dim);

  std::vector<int> drop;
  for (int j = p.dim() - 1; j >= 0; --j)
    if (!std::binary_search(sorted.begin(), sorted.end(), j)) drop.push_back(j);

  Polytope current = remove_redundant(p, settings);
  for (int col : drop) {
    Rows rows = eliminate(current.normals(), current.offsets(), col);
    if (rows.normals.cols() == 0) break;
    current = remove_redundant(Polytope(rows.normals, rows.offsets), settings);
  }
  return current;
}

ContainmentResult check_containment(const Polytope& outer, const Polytope& inner, double tol,
                                    const SolverSettings& settings) {
  if (outer.dim() != inner.dim())
    throw ContractViolation("contains: dimension mismatch");
  ContainmentResult res;
  res.contained = true;
  const auto start = inner.feasible_point(settings);
  if (!start) return res;
  res.worst_excess = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < outer.num_rows(); ++j) {
    const LpResult lp = maximize(outer.normals().row(j).transpose(), inner.normals(),
                                 inner.offsets(), start, settings);
    if (lp.status == LpStatus::unbounded) {
      res.contained = false;
      res.unbounded = true;
      res.worst_excess = std::numeric_limits<double>::infinity();
      continue;
    }
    const double excess = lp.value - outer.offsets()(j);
    res.worst_excess = std::max(res.worst_excess, excess);
    if (excess > tol * (1.0 + std::abs(outer.offsets()(j)))) res.contained = false;
  }
  return res;
}

bool contains(const Polytope& outer, const Polytope& inner, double tol,
              const SolverSettings& settings) {
  return check_containment(outer, inner, tol, settings).contained;
}

nlohmann::json to_json(const Polytope& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < p.num_rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < p.dim(); ++j) row.push_back(p.normals()(i, j));
    row.push_back(p.offsets()(i));
    rows.push_back(std::move(row));
  }
  return {{"dim", p.dim()}, {"rows", std::move(rows)}};
}

Polytope polytope_from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    if (dim <= 0) throw InputError("polytope JSON: dim must be positive");
    const auto& rows = j.at("rows");
    Eigen::MatrixXd n(static_cast<Eigen::Index>(rows.size()), dim);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(dim + 1))
        throw InputError("polytope JSON: row " + std::to_string(i) + " must have dim+1 numbers");
      for (int c = 0; c < dim; ++c) n(static_cast<Eigen::Index>(i), c) = row[static_cast<std::size_t>(c)].get<double>();
      b(static_cast<Eigen::Index>(i)) = row[static_cast<std::size_t>(dim)].get<double>();
    }
    return Polytope(n, b);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("polytope JSON: ") + e.what());
  }
}

}  // namespace spg
