#include "spg/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spg/errors.hpp"

namespace spg {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Primal active-set iterations for min 0.5|y|^2 + c'y s.t. M y <= g, i.e. the
// QP after the change of variables y = L'z with H = LL'. Starting point must
// be feasible. Rows tight at the start seed the working set.
struct ActiveSetOutcome {
  Eigen::VectorXd y;
  Eigen::VectorXd multipliers;
  int iterations = 0;
  bool converged = false;
};

std::vector<int> initial_working_set(const Eigen::MatrixXd& M, const Eigen::VectorXd& g,
                                     const Eigen::VectorXd& slack,
                                     const Eigen::VectorXd& row_norm) {
  const auto n = M.cols();
  std::vector<int> working;
  Eigen::MatrixXd basis(n, n);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < M.rows() && rank < n; ++i) {
    if (row_norm(i) == 0.0 || slack(i) > 1e-13 * (1.0 + std::abs(g(i)))) continue;
    Eigen::VectorXd v = M.row(i).transpose() / row_norm(i);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index q = 0; q < rank; ++q) v -= basis.col(q).dot(v) * basis.col(q);
    const double norm = v.norm();
    if (norm <= 1e-8) continue;
    basis.col(rank++) = v / norm;
    working.push_back(static_cast<int>(i));
  }
  return working;
}

ActiveSetOutcome run_active_set(const Eigen::MatrixXd& M, const Eigen::VectorXd& g,
                                const Eigen::VectorXd& c, Eigen::VectorXd y,
                                const SolverSettings& settings) {
  const int n = static_cast<int>(c.size());
  const int r = static_cast<int>(g.size());
  const Eigen::VectorXd row_norm = M.rowwise().norm();
  Eigen::VectorXd slack = g - M * y;

  std::vector<int> working = initial_working_set(M, g, slack, row_norm);
  std::vector<char> in_working(static_cast<std::size_t>(r), 0);
  for (int i : working) in_working[static_cast<std::size_t>(i)] = 1;
  bool last_step_full = false;
  int zero_steps = 0;

  ActiveSetOutcome out;
  out.multipliers = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd At;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr;

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const Eigen::VectorXd grad = y + c;
    const int w = static_cast<int>(working.size());

    // With A' = QR, the first w entries of Q'grad give the multipliers and
    // the rest the projected gradient in the null space of the working rows.
    Eigen::VectorXd qtg = grad;
    if (w > 0) {
      At.resize(n, w);
      for (int k = 0; k < w; ++k)
        At.col(k) = M.row(working[static_cast<std::size_t>(k)]).transpose();
      qr.compute(At);
      qtg.applyOnTheLeft(qr.householderQ().transpose());
    }

    Eigen::VectorXd step;
    if (w == 0) {
      step = -grad;
    } else if (w < n) {
      step = Eigen::VectorXd::Zero(n);
      step.tail(n - w) = -qtg.tail(n - w);
      step.applyOnTheLeft(qr.householderQ());
    } else {
      step = Eigen::VectorXd::Zero(n);
    }

    const bool stationary = w == n || last_step_full ||
                            step.norm() <= 1e-14 * (1.0 + grad.norm());
    if (stationary) {
      Eigen::VectorXd lambda;
      if (w > 0) {
        const Eigen::VectorXd rhs = -qtg.head(w);
        lambda = qr.matrixQR().topLeftCorner(w, w).triangularView<Eigen::Upper>().solve(rhs);
      }
      const double scale = 1.0 + (w > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0);
      int drop = -1;
      const bool bland = zero_steps >= settings.degenerate_switch;
      for (int k = 0; k < w; ++k) {
        if (lambda(k) >= -settings.multiplier_tol * scale) continue;
        if (drop < 0) {
          drop = k;
        } else if (bland) {
          if (working[static_cast<std::size_t>(k)] < working[static_cast<std::size_t>(drop)]) drop = k;
        } else if (lambda(k) < lambda(drop)) {
          drop = k;
        }
      }
      if (drop < 0) {
        for (int k = 0; k < w; ++k)
          out.multipliers(working[static_cast<std::size_t>(k)]) = std::max(0.0, lambda(k));
        out.y = std::move(y);
        out.converged = true;
        return out;
      }
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
      working.erase(working.begin() + drop);
      last_step_full = false;
      continue;
    }

    // Ratio test against rows outside the working set.
    const Eigen::VectorXd rates = M * step;
    const double step_norm = step.norm();
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < r; ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double rate = rates(i);
      if (rate <= 1e-12 * row_norm(i) * step_norm) continue;
      const double ratio = std::max(0.0, slack(i)) / rate;
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    y += alpha * step;
    slack = g - M * y;
    if (blocking >= 0) {
      working.push_back(blocking);
      in_working[static_cast<std::size_t>(blocking)] = 1;
      last_step_full = false;
      zero_steps = alpha == 0.0 ? zero_steps + 1 : 0;
    } else {
      last_step_full = true;
      zero_steps = 0;
    }
  }
  out.y = std::move(y);
  return out;
}

// z <-> y = L'z for H = LL'. A diagonal H skips the dense factorization.
class Transform {
 public:
  explicit Transform(const Eigen::MatrixXd& H) {
    const auto n = H.rows();
    diagonal_ = n == 0 || (H - Eigen::MatrixXd(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (diagonal_) {
      if (n > 0 && !(H.diagonal().minCoeff() > 0.0))
        throw ContractViolation("QP curvature H is not positive definite");
      root_ = H.diagonal().cwiseSqrt();
      return;
    }
    llt_.compute(H);
    if (llt_.info() != Eigen::Success)
      throw ContractViolation("QP curvature H is not positive definite");
    // LLT succeeds on some indefinite inputs with tiny negative pivots; check.
    const Eigen::VectorXd diag = llt_.matrixLLT().diagonal();
    if (!(diag.minCoeff() > 0.0)) throw ContractViolation("QP curvature H is not positive definite");
  }

  // G L^{-T}
  Eigen::MatrixXd rows(const Eigen::MatrixXd& G) const {
    if (diagonal_) return G * root_.cwiseInverse().asDiagonal();
    return llt_.matrixL().solve(G.transpose()).transpose();
  }
  // L^{-1} f
  Eigen::VectorXd linear(const Eigen::VectorXd& f) const {
    if (diagonal_) return f.cwiseQuotient(root_);
    return llt_.matrixL().solve(f);
  }
  Eigen::VectorXd to_y(const Eigen::VectorXd& z) const {
    if (diagonal_) return z.cwiseProduct(root_);
    return llt_.matrixU() * z;
  }
  Eigen::VectorXd to_z(const Eigen::VectorXd& y) const {
    if (diagonal_) return y.cwiseQuotient(root_);
    return llt_.matrixU().solve(y);
  }

 private:
  bool diagonal_ = false;
  Eigen::VectorXd root_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

QpSolution finish(const QuadraticProgram& qp, const Transform& tr, const ActiveSetOutcome& run) {
  QpSolution sol;
  sol.z = tr.to_z(run.y);
  sol.multipliers = run.multipliers;
  sol.iterations = run.iterations;
  sol.status = run.converged ? QpStatus::optimal : QpStatus::max_iterations;
  const KktReport rep = kkt_report(qp, sol.z, sol.multipliers);
  sol.kkt_residual = std::max({rep.primal / (1.0 + inf_norm(qp.g)),
                               rep.stationarity / (1.0 + inf_norm(qp.f)),
                               rep.complementarity, rep.dual});
  return sol;
}

}  // namespace

void QuadraticProgram::validate() const {
  const auto n = f.size();
  if (H.rows() != n || H.cols() != n)
    throw ContractViolation("QP: H must be n x n with n = size(f)");
  if (G.cols() != n && G.rows() > 0)
    throw ContractViolation("QP: G must have n columns");
  if (G.rows() != g.size()) throw ContractViolation("QP: G and g row counts differ");
  if (!H.allFinite() || !f.allFinite() || !G.allFinite() || !g.allFinite())
    throw ContractViolation("QP: non-finite data");
  const double asym = n == 0 ? 0.0 : (H - H.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * (1.0 + H.cwiseAbs().maxCoeff()))
    throw ContractViolation("QP: H is not symmetric");
}

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iterations: return "max-iterations";
  }
  return "unknown";
}

KktReport kkt_report(const QuadraticProgram& qp, const Eigen::VectorXd& z,
                     const Eigen::VectorXd& multipliers) {
  KktReport rep;
  const Eigen::VectorXd resid = qp.G * z - qp.g;
  if (resid.size() > 0) {
    rep.primal = std::max(0.0, resid.maxCoeff());
    rep.complementarity = multipliers.cwiseProduct(resid).cwiseAbs().maxCoeff();
    rep.dual = std::max(0.0, -multipliers.minCoeff());
  }
  const Eigen::VectorXd stat = qp.H * z + qp.f + qp.G.transpose() * multipliers;
  rep.stationarity = inf_norm(stat);
  return rep;
}

QpSolution solve_from(const QuadraticProgram& qp, const Eigen::VectorXd& start,
                      const SolverSettings& settings) {
  qp.validate();
  if (start.size() != qp.n()) throw ContractViolation("QP: start has wrong dimension");
  const Transform tr(qp.H);
  return finish(qp, tr, run_active_set(tr.rows(qp.G), qp.g, tr.linear(qp.f), tr.to_y(start),
                                       settings));
}

ViolationResult minimize_violation(const Eigen::MatrixXd& G, const Eigen::VectorXd& g,
                                   const std::optional<Eigen::VectorXd>& start,
                                   const SolverSettings& settings) {
  const int n = static_cast<int>(G.cols());
  const int r = static_cast<int>(G.rows());
  const Eigen::VectorXd z0 = start ? *start : Eigen::VectorXd::Zero(n);
  if (z0.size() != n) throw ContractViolation("phase 1: start has wrong dimension");

  ViolationResult res;
  if (r == 0) {
    res.z = z0;
    res.multipliers.resize(0);
    return res;
  }
  const double delta = settings.lp_regularization;
  QuadraticProgram aux;
  aux.H = delta * Eigen::MatrixXd::Identity(n + 1, n + 1);
  aux.f = Eigen::VectorXd::Zero(n + 1);
  aux.f.head(n) = -delta * z0;
  aux.f(n) = 1.0;
  aux.G = Eigen::MatrixXd::Zero(r + 1, n + 1);
  aux.G.topLeftCorner(r, n) = G;
  aux.G.col(n).head(r).setConstant(-1.0);
  aux.G(r, n) = -1.0;
  aux.g = Eigen::VectorXd::Zero(r + 1);
  aux.g.head(r) = g;

  Eigen::VectorXd s0(n + 1);
  s0.head(n) = z0;
  s0(n) = std::max(0.0, (G * z0 - g).maxCoeff());
  const QpSolution sol = solve_from(aux, s0, settings);
  res.z = sol.z.head(n);
  res.max_violation = std::max(0.0, (G * res.z - g).maxCoeff());
  res.multipliers = sol.multipliers.head(r);
  res.converged = sol.status == QpStatus::optimal;
  return res;
}

QpSolution solve(const QuadraticProgram& qp, const SolverSettings& settings) {
  qp.validate();
  Transform check(qp.H);  // reject non-PD curvature before iterating
  (void)check;
  const ViolationResult phase1 = minimize_violation(qp.G, qp.g, std::nullopt, settings);
  const double tol = settings.feasibility_tol * (1.0 + inf_norm(qp.g));
  if (phase1.max_violation > tol) {
    QpSolution sol;
    sol.status = phase1.converged ? QpStatus::infeasible : QpStatus::max_iterations;
    sol.z = phase1.z;
    sol.multipliers = Eigen::VectorXd::Zero(qp.rows());
    sol.farkas = phase1.multipliers;
    const double total = sol.farkas.sum();
    if (total > 0.0) sol.farkas /= total;
    const KktReport rep = kkt_report(qp, sol.z, sol.multipliers);
    sol.kkt_residual = rep.primal / (1.0 + inf_norm(qp.g));
    return sol;
  }
  return solve_from(qp, phase1.z, settings);
}

LpResult maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& g,
                  const std::optional<Eigen::VectorXd>& feasible_start,
                  const SolverSettings& settings) {
  const int n = static_cast<int>(c.size());
  const int r = static_cast<int>(G.rows());
  if (G.cols() != n && r > 0) throw ContractViolation("LP: G must have size(c) columns");
  const double box = settings.lp_box;

  QuadraticProgram qp;
  qp.H = settings.lp_regularization * Eigen::MatrixXd::Identity(n, n);
  qp.G.resize(r + 2 * n, n);
  if (r > 0) qp.G.topRows(r) = G;
  qp.G.middleRows(r, n) = Eigen::MatrixXd::Identity(n, n);
  qp.G.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  qp.g.resize(r + 2 * n);
  if (r > 0) qp.g.head(r) = g;
  qp.g.tail(2 * n).setConstant(box);

  LpResult out;
  Eigen::VectorXd center;
  if (feasible_start) {
    center = *feasible_start;
  } else {
    const ViolationResult phase1 = minimize_violation(qp.G, qp.g, std::nullopt, settings);
    if (phase1.max_violation > settings.feasibility_tol * (1.0 + inf_norm(g))) {
      out.status = LpStatus::infeasible;
      out.z = phase1.z;
      return out;
    }
    center = phase1.z;
  }

  for (int pass = 0; pass <= settings.lp_refinements; ++pass) {
    qp.f = -c - settings.lp_regularization * center;
    const QpSolution sol = solve_from(qp, center, settings);
    if (sol.status != QpStatus::optimal)
      throw NumericalError("LP: active-set iteration limit reached");
    const bool moved = (sol.z - center).cwiseAbs().maxCoeff() > 0.0;
    center = sol.z;
    if (!moved) break;
  }
  out.z = center;
  out.value = c.dot(center);
  out.status = center.cwiseAbs().maxCoeff() >= 0.5 * box ? LpStatus::unbounded
                                                         : LpStatus::optimal;
  return out;
}

}  // namespace spg
