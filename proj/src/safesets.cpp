#include "spg/safesets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spg/errors.hpp"

namespace spg {

namespace {

struct RowBlock {
  Eigen::MatrixXd N;
  Eigen::VectorXd b;
};

RowBlock stack(const std::vector<RowBlock>& blocks, int cols) {
  Eigen::Index rows = 0;
  for (const auto& blk : blocks) rows += blk.N.rows();
  RowBlock out{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
  Eigen::Index r = 0;
  for (const auto& blk : blocks) {
    out.N.middleRows(r, blk.N.rows()) = blk.N;
    out.b.segment(r, blk.b.size()) = blk.b;
    r += blk.N.rows();
  }
  return out;
}

// Shared propagation data for Pi_k and Omega'.
class Propagation {
 public:
  Propagation(const LinearSystem& sys, const VirtualFeedback& fb, const Polytope& X0,
              const Polytope& U, const DisturbanceSet& W)
      : sys_(sys), fb_(fb), X0_(X0), U_(U), W_(W) {
    const int n = sys.n();
    Ac_ = closed_loop(sys, fb);
    steady_ = (Eigen::MatrixXd::Identity(n, n) - Ac_).partialPivLu().solve(sys.B);
  }

  // Rows of Pi_k over (x, v).
  RowBlock pi_rows(int k) const {
    const int n = sys_.n(), m = sys_.m();
    const int q0 = X0_.num_rows(), qu = U_.num_rows();
    RowBlock out{Eigen::MatrixXd((k + 1) * (q0 + qu), n + m), Eigen::VectorXd((k + 1) * (q0 + qu))};
    Eigen::VectorXd tight0 = Eigen::VectorXd::Zero(q0);
    Eigen::VectorXd tightu = Eigen::VectorXd::Zero(qu);
    Eigen::MatrixXd Act = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd& K = fb_.K;
    Eigen::Index r = 0;
    for (int t = 0; t <= k; ++t) {
      const Eigen::MatrixXd Lambda = (Eigen::MatrixXd::Identity(n, n) - Act) * steady_;
      const Eigen::MatrixXd KAct = K * Act;
      const Eigen::MatrixXd vmap = K * Lambda + Eigen::MatrixXd::Identity(m, m);
      for (int j = 0; j < q0; ++j, ++r) {
        const Eigen::RowVectorXd gam = X0_.normals().row(j);
        out.N.row(r) << gam * Act, gam * Lambda;
        out.b(r) = X0_.offsets()(j) - tight0(j);
      }
      for (int j = 0; j < qu; ++j, ++r) {
        const Eigen::RowVectorXd gam = U_.normals().row(j);
        out.N.row(r) << gam * KAct, gam * vmap;
        out.b(r) = U_.offsets()(j) - tightu(j);
      }
      accumulate(Act, tight0, tightu);
      Act = Ac_ * Act;
    }
    return out;
  }

  // Rows of X0 x Omega' over (x, v); offsets use the limit of the tightening
  // sums, shrunk by eps_tight * |offset|.
  RowBlock omega_rows(double eps_tight, Polytope* omega_only) const {
    const int n = sys_.n(), m = sys_.m();
    const int q0 = X0_.num_rows(), qu = U_.num_rows();
    Eigen::VectorXd tight0 = Eigen::VectorXd::Zero(q0);
    Eigen::VectorXd tightu = Eigen::VectorXd::Zero(qu);
    Eigen::MatrixXd Act = Eigen::MatrixXd::Identity(n, n);
    for (int t = 0; t < 100000; ++t) {
      if (Act.cwiseAbs().maxCoeff() < 1e-17) break;
      accumulate(Act, tight0, tightu);
      Act = Ac_ * Act;
    }
    auto shrink = [eps_tight](double gamma) { return gamma - eps_tight * std::abs(gamma); };

    RowBlock v_rows{Eigen::MatrixXd(q0 + qu, m), Eigen::VectorXd(q0 + qu)};
    const Eigen::MatrixXd vmap = fb_.K * steady_ + Eigen::MatrixXd::Identity(m, m);
    for (int j = 0; j < q0; ++j) {
      v_rows.N.row(j) = X0_.normals().row(j) * steady_;
      v_rows.b(j) = shrink(X0_.offsets()(j) - tight0(j));
    }
    for (int j = 0; j < qu; ++j) {
      v_rows.N.row(q0 + j) = U_.normals().row(j) * vmap;
      v_rows.b(q0 + j) = shrink(U_.offsets()(j) - tightu(j));
    }
    if (omega_only) *omega_only = Polytope(v_rows.N, v_rows.b);

    RowBlock out{Eigen::MatrixXd::Zero(q0 + q0 + qu, n + m), Eigen::VectorXd(q0 + q0 + qu)};
    out.N.topLeftCorner(q0, n) = X0_.normals();
    out.b.head(q0) = X0_.offsets();
    out.N.bottomRightCorner(q0 + qu, m) = v_rows.N;
    out.b.tail(q0 + qu) = v_rows.b;
    return out;
  }

 private:
  void accumulate(const Eigen::MatrixXd& Act, Eigen::VectorXd& tight0,
                  Eigen::VectorXd& tightu) const {
    const Eigen::MatrixXd ActE = Act * sys_.E;
    const Eigen::MatrixXd KActE = fb_.K * ActE;
    for (int j = 0; j < X0_.num_rows(); ++j)
      tight0(j) += support(W_, (X0_.normals().row(j) * ActE).transpose());
    for (int j = 0; j < U_.num_rows(); ++j)
      tightu(j) += support(W_, (U_.normals().row(j) * KActE).transpose());
  }

  const LinearSystem& sys_;
  const VirtualFeedback& fb_;
  const Polytope& X0_;
  const Polytope& U_;
  const DisturbanceSet& W_;
  Eigen::MatrixXd Ac_;
  Eigen::MatrixXd steady_;  // (I - Ac)^{-1} B
};

void check_inputs(const LinearSystem& sys, const VirtualFeedback& fb, const Polytope& X0,
                  const Polytope& U, const DisturbanceSet& W) {
  sys.validate();
  if (fb.K.rows() != sys.m() || fb.K.cols() != sys.n())
    throw ContractViolation("feedback K must be m x n");
  if (X0.dim() != sys.n()) throw ContractViolation("X0 dimension must equal n");
  if (U.dim() != sys.m()) throw ContractViolation("U dimension must equal m");
  if (W.dim() != sys.p()) throw ContractViolation("W dimension must equal p");
  require_schur(sys, fb);
}

bool rows_match(const ConstraintGroup& a, int i, const ConstraintGroup& b, int j, double tol) {
  return (a.Cx.row(i) - b.Cx.row(j)).cwiseAbs().maxCoeff() <= tol &&
         (a.Cu.row(i) - b.Cu.row(j)).cwiseAbs().maxCoeff() <= tol &&
         std::abs(a.c(i) - b.c(j)) <= tol * (1.0 + std::abs(a.c(i)));
}

}  // namespace

void LinearSystem::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw ContractViolation("A must be square and nonempty");
  if (B.rows() != n || B.cols() == 0) throw ContractViolation("B must be n x m with m > 0");
  if (E.rows() != n || E.cols() == 0) throw ContractViolation("E must be n x p with p > 0");
  if (!A.allFinite() || !B.allFinite() || !E.allFinite())
    throw ContractViolation("system matrices must be finite");
  if (!(dt > 0.0)) throw ContractViolation("dt must be positive");
}

Eigen::VectorXd LinearSystem::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w) const {
  if (x.size() != n() || u.size() != m() || w.size() != p())
    throw ContractViolation("LinearSystem::step: dimension mismatch");
  return A * x + B * u + E * w;
}

Eigen::MatrixXd closed_loop(const LinearSystem& sys, const VirtualFeedback& fb) {
  return sys.A + sys.B * fb.K;
}

double spectral_radius(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void require_schur(const LinearSystem& sys, const VirtualFeedback& fb, double margin) {
  const double rho = spectral_radius(closed_loop(sys, fb));
  if (!(rho < 1.0 - margin))
    throw ContractViolation("closed loop A + BK is not Schur: spectral radius " +
                            std::to_string(rho) + " >= 1");
}

Eigen::VectorXd ConstraintGroup::evaluate(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u) const {
  return Cx * x + Cu * u - c;
}

ConstraintGroup SafeSetLadder::stacked(int count) const {
  const int n = system.n(), m = system.m();
  int rows = 0;
  for (int k = 0; k < count; ++k) rows += groups[static_cast<std::size_t>(k)].rows();
  ConstraintGroup out{Eigen::MatrixXd(rows, n), Eigen::MatrixXd(rows, m), Eigen::VectorXd(rows),
                      count - 1};
  int r = 0;
  for (int k = 0; k < count; ++k) {
    const auto& grp = groups[static_cast<std::size_t>(k)];
    out.Cx.middleRows(r, grp.rows()) = grp.Cx;
    out.Cu.middleRows(r, grp.rows()) = grp.Cu;
    out.c.segment(r, grp.rows()) = grp.c;
    r += grp.rows();
  }
  return out;
}

Polytope build_pi_k(const LinearSystem& sys, const VirtualFeedback& fb, const Polytope& X0,
                    const Polytope& U, const DisturbanceSet& W, int k, bool* empty) {
  if (k < 0) throw ContractViolation("build_pi_k: k must be nonnegative");
  check_inputs(sys, fb, X0, U, W);
  const Propagation prop(sys, fb, X0, U, W);
  const RowBlock rows = prop.pi_rows(k);
  const Polytope pi(rows.N, rows.b);
  const bool is_empty = pi.is_empty();
  if (empty) *empty = is_empty;
  return is_empty ? pi : remove_redundant(pi);
}

Polytope build_tilde_x(const Polytope& pi, int n) {
  if (n <= 0 || n >= pi.dim()) throw ContractViolation("build_tilde_x: need 0 < n < dim(pi)");
  std::vector<int> keep(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) keep[static_cast<std::size_t>(i)] = i;
  return project_out(pi, keep);
}

Polytope build_x_inf(const LinearSystem& sys, const VirtualFeedback& fb, const Polytope& X0,
                     const Polytope& U, const DisturbanceSet& W, double eps_tight, int k_cap,
                     int min_horizon, InfiniteSetInfo* info) {
  if (!(eps_tight > 0.0 && eps_tight < 1.0))
    throw ContractViolation("build_x_inf: eps_tight must lie in (0, 1)");
  if (k_cap < 1) throw ContractViolation("build_x_inf: k_cap must be positive");
  check_inputs(sys, fb, X0, U, W);
  const Propagation prop(sys, fb, X0, U, W);
  Polytope omega;
  const RowBlock omega_rows = prop.omega_rows(eps_tight, &omega);
  const int cols = sys.n() + sys.m();

  auto capped = [&](int k) {
    const RowBlock rows = stack({prop.pi_rows(k), omega_rows}, cols);
    return Polytope(rows.N, rows.b);
  };

  int found = -1;
  Polytope current = capped(0);
  for (int k = 0; k < k_cap; ++k) {
    Polytope next = capped(k + 1);
    if (contains(current, next) && contains(next, current)) {
      found = k;
      break;
    }
    current = std::move(next);
  }
  if (found < 0)
    throw NumericalError("infinite-step set did not converge by k_cap = " +
                         std::to_string(k_cap));

  const int horizon = std::max(found, min_horizon);
  Polytope pi_inf = capped(horizon);
  if (!pi_inf.is_empty()) pi_inf = remove_redundant(pi_inf);
  Polytope x_inf = build_tilde_x(pi_inf, sys.n());
  if (info) {
    info->determination_index = found;
    info->omega = omega;
    info->pi_inf = pi_inf;
  }
  return x_inf;
}

ConstraintGroup build_group(const Polytope& target, const LinearSystem& sys,
                            const DisturbanceSet& W, int depth) {
  if (target.dim() != sys.n()) throw ContractViolation("build_group: target dimension must be n");
  if (W.dim() != sys.p()) throw ContractViolation("build_group: W dimension must be p");
  const int n = sys.n(), m = sys.m();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> offsets;
  for (int j = 0; j < target.num_rows(); ++j) {
    const Eigen::RowVectorXd gam = target.normals().row(j);
    Eigen::RowVectorXd row(n + m);
    row << gam * sys.A, gam * sys.B;
    double c = target.offsets()(j) - support(W, (gam * sys.E).transpose());
    const double norm = row.norm();
    if (norm < 1e-12) {
      if (c >= 0.0) continue;  // vacuous
    } else {
      row /= norm;
      c /= norm;
    }
    rows.push_back(row);
    offsets.push_back(c);
  }
  const auto q = static_cast<Eigen::Index>(rows.size());
  ConstraintGroup grp{Eigen::MatrixXd(q, n), Eigen::MatrixXd(q, m), Eigen::VectorXd(q), depth};
  for (Eigen::Index i = 0; i < q; ++i) {
    grp.Cx.row(i) = rows[static_cast<std::size_t>(i)].head(n);
    grp.Cu.row(i) = rows[static_cast<std::size_t>(i)].tail(m);
    grp.c(i) = offsets[static_cast<std::size_t>(i)];
  }
  return grp;
}

std::vector<ConstraintGroup> dedupe_ladder(const std::vector<ConstraintGroup>& groups,
                                           double tol) {
  std::vector<ConstraintGroup> out;
  out.reserve(groups.size());
  for (const auto& grp : groups) {
    std::vector<int> keep;
    for (int i = 0; i < grp.rows(); ++i) {
      bool seen = false;
      for (const auto& prev : out)
        for (int j = 0; j < prev.rows() && !seen; ++j) seen = rows_match(grp, i, prev, j, tol);
      for (int j : keep)
        if (!seen) seen = rows_match(grp, i, grp, j, tol);
      if (!seen) keep.push_back(i);
    }
    const auto q = static_cast<Eigen::Index>(keep.size());
    ConstraintGroup kept{Eigen::MatrixXd(q, grp.Cx.cols()), Eigen::MatrixXd(q, grp.Cu.cols()),
                         Eigen::VectorXd(q), grp.depth};
    for (Eigen::Index r = 0; r < q; ++r) {
      const int src = keep[static_cast<std::size_t>(r)];
      kept.Cx.row(r) = grp.Cx.row(src);
      kept.Cu.row(r) = grp.Cu.row(src);
      kept.c(r) = grp.c(src);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

SafeSetLadder build_ladder(const LinearSystem& sys, const VirtualFeedback& fb,
                           const Polytope& X0, const Polytope& U, const DisturbanceSet& W,
                           const LadderOptions& options) {
  if (options.k_prime < 0) throw ContractViolation("k_prime must be nonnegative");
  check_inputs(sys, fb, X0, U, W);
  if (X0.is_empty()) throw ContractViolation("X0 is empty");
  (void)U.bounding_box();  // throws unless U is nonempty and bounded

  SafeSetLadder ladder;
  ladder.system = sys;
  ladder.feedback = fb;
  ladder.safe_set = X0;
  ladder.input_set = U;
  ladder.disturbance = W;
  ladder.k_prime = options.k_prime;
  ladder.input_anchor = *U.feasible_point();

  for (int k = 0; k <= options.k_prime; ++k)
    ladder.tilde_sets.push_back(build_tilde_x(build_pi_k(sys, fb, X0, U, W, k), sys.n()));

  InfiniteSetInfo info;
  ladder.x_inf = build_x_inf(sys, fb, X0, U, W, options.eps_tight, options.k_cap,
                             options.k_prime, &info);
  ladder.determination_index = info.determination_index;

  for (int k = 0; k <= options.k_prime; ++k)
    ladder.raw_groups.push_back(build_group(ladder.tilde_sets[static_cast<std::size_t>(k)], sys, W, k));
  ladder.raw_groups.push_back(build_group(ladder.x_inf, sys, W, kInfiniteDepth));
  ladder.groups = dedupe_ladder(ladder.raw_groups);
  attach_input_support(ladder);
  return ladder;
}

void attach_input_support(SafeSetLadder& ladder, const SolverSettings& settings) {
  const Polytope& U = ladder.input_set;
  ladder.input_support.clear();
  for (const auto& grp : ladder.groups) {
    Eigen::VectorXd h(grp.rows());
    for (int j = 0; j < grp.rows(); ++j) {
      const Eigen::VectorXd a = grp.Cu.row(j).transpose();
      if (a.cwiseAbs().maxCoeff() == 0.0) {
        h(j) = 0.0;
        continue;
      }
      const LpResult lp = maximize(a, U.normals(), U.offsets(), ladder.input_anchor, settings);
      h(j) = lp.status == LpStatus::optimal ? lp.value : std::numeric_limits<double>::infinity();
    }
    ladder.input_support.push_back(std::move(h));
  }
}

bool NestingReport::all() const {
  return std::all_of(consecutive.begin(), consecutive.end(), [](bool b) { return b; }) &&
         x_inf_in_last && x_inf_in_x0 && base_equals_x0;
}

NestingReport check_nesting(const SafeSetLadder& ladder) {
  NestingReport rep;
  const auto& sets = ladder.tilde_sets;
  for (std::size_t k = 0; k + 1 < sets.size(); ++k)
    rep.consecutive.push_back(contains(sets[k], sets[k + 1]));
  rep.x_inf_in_last = contains(sets.back(), ladder.x_inf);
  rep.x_inf_in_x0 = contains(ladder.safe_set, ladder.x_inf);
  rep.base_equals_x0 = same_rows(sets.front(), ladder.safe_set);
  return rep;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array of rows");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw InputError(std::string(what) + ": rows must be nonempty arrays");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw InputError(std::string(what) + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw InputError(std::string(what) + ": non-numeric entry");
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return M;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(std::string(what) + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

nlohmann::json group_to_json(const ConstraintGroup& g) {
  nlohmann::json depth = g.is_infinite() ? nlohmann::json("inf") : nlohmann::json(g.depth);
  return {{"depth", depth},
          {"Cx", matrix_to_json(g.Cx)},
          {"Cu", matrix_to_json(g.Cu)},
          {"c", vector_to_json(g.c)}};
}

ConstraintGroup group_from_json(const nlohmann::json& j, int n, int m) {
  ConstraintGroup g;
  const auto& depth = j.at("depth");
  g.depth = depth.is_string() ? kInfiniteDepth : depth.get<int>();
  if (depth.is_string() && depth.get<std::string>() != "inf")
    throw InputError("ladder JSON: group depth must be an integer or \"inf\"");
  g.c = vector_from_json(j.at("c"), "group c");
  const auto q = g.c.size();
  g.Cx = q == 0 ? Eigen::MatrixXd(0, n) : matrix_from_json(j.at("Cx"), "group Cx");
  g.Cu = q == 0 ? Eigen::MatrixXd(0, m) : matrix_from_json(j.at("Cu"), "group Cu");
  if (g.Cx.rows() != q || g.Cu.rows() != q || g.Cx.cols() != n || g.Cu.cols() != m)
    throw InputError("ladder JSON: group dimensions are inconsistent");
  return g;
}

nlohmann::json disturbance_to_json(const DisturbanceSet& W) {
  if (W.kind() == DisturbanceKind::box)
    return {{"kind", "box"}, {"radius", vector_to_json(W.radius())}};
  return {{"kind", "euclidean-ball"}, {"dim", W.dim()}, {"radius", W.radius()(0)}};
}

DisturbanceSet disturbance_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") return DisturbanceSet::box(vector_from_json(j.at("radius"), "W radius"));
  if (kind == "euclidean-ball")
    return DisturbanceSet::ball(j.at("dim").get<int>(), j.at("radius").get<double>());
  throw InputError("unknown disturbance kind '" + kind + "'");
}

}  // namespace

nlohmann::json to_json(const SafeSetLadder& ladder) {
  nlohmann::json j;
  j["schema_version"] = kLadderSchemaVersion;
  j["k_prime"] = ladder.k_prime;
  j["determination_index"] = ladder.determination_index;
  j["system"] = {{"A", matrix_to_json(ladder.system.A)},
                 {"B", matrix_to_json(ladder.system.B)},
                 {"E", matrix_to_json(ladder.system.E)},
                 {"dt", ladder.system.dt}};
  j["feedback"] = {{"K", matrix_to_json(ladder.feedback.K)}};
  j["safe_set"] = to_json(ladder.safe_set);
  j["input_set"] = to_json(ladder.input_set);
  j["disturbance"] = disturbance_to_json(ladder.disturbance);
  j["tilde_sets"] = nlohmann::json::array();
  for (const auto& s : ladder.tilde_sets) j["tilde_sets"].push_back(to_json(s));
  j["x_inf"] = to_json(ladder.x_inf);
  j["groups"] = nlohmann::json::array();
  for (const auto& g : ladder.groups) j["groups"].push_back(group_to_json(g));
  j["raw_groups"] = nlohmann::json::array();
  for (const auto& g : ladder.raw_groups) j["raw_groups"].push_back(group_to_json(g));
  return j;
}

SafeSetLadder ladder_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kLadderSchemaVersion)
      throw InputError("ladder JSON: unsupported schema_version " + std::to_string(version));
    SafeSetLadder ladder;
    ladder.k_prime = j.at("k_prime").get<int>();
    ladder.determination_index = j.at("determination_index").get<int>();
    const auto& sys = j.at("system");
    ladder.system.A = matrix_from_json(sys.at("A"), "A");
    ladder.system.B = matrix_from_json(sys.at("B"), "B");
    ladder.system.E = matrix_from_json(sys.at("E"), "E");
    ladder.system.dt = sys.at("dt").get<double>();
    ladder.system.validate();
    ladder.feedback.K = matrix_from_json(j.at("feedback").at("K"), "K");
    ladder.safe_set = polytope_from_json(j.at("safe_set"));
    ladder.input_set = polytope_from_json(j.at("input_set"));
    ladder.disturbance = disturbance_from_json(j.at("disturbance"));
    for (const auto& s : j.at("tilde_sets")) ladder.tilde_sets.push_back(polytope_from_json(s));
    ladder.x_inf = polytope_from_json(j.at("x_inf"));
    const auto anchor = ladder.input_set.feasible_point();
    if (!anchor) throw InputError("ladder JSON: input set is empty");
    ladder.input_anchor = *anchor;
    const int n = ladder.system.n(), m = ladder.system.m();
    for (const auto& g : j.at("groups")) ladder.groups.push_back(group_from_json(g, n, m));
    for (const auto& g : j.at("raw_groups")) ladder.raw_groups.push_back(group_from_json(g, n, m));
    if (static_cast<int>(ladder.groups.size()) != ladder.k_prime + 2 ||
        static_cast<int>(ladder.tilde_sets.size()) != ladder.k_prime + 1)
      throw InputError("ladder JSON: group/set counts do not match k_prime");
    attach_input_support(ladder);
    return ladder;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("ladder JSON: ") + e.what());
  } catch (const ContractViolation& e) {
    throw InputError(std::string("ladder JSON: ") + e.what());
  }
}

}  // namespace spg
