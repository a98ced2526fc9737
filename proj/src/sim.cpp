#include "spg/sim.hpp"

#include <cstdio>
#include <ostream>
#include <string>

#include "spg/errors.hpp"

namespace spg {

DisturbanceProfile DisturbanceProfile::constant(Eigen::VectorXd w) {
  DisturbanceProfile p;
  p.kind = ProfileKind::constant;
  p.schedule.emplace_back(0, std::move(w));
  return p;
}

DisturbanceProfile DisturbanceProfile::piecewise(
    std::vector<std::pair<int, Eigen::VectorXd>> schedule) {
  DisturbanceProfile p;
  p.kind = ProfileKind::piecewise_constant;
  p.schedule = std::move(schedule);
  return p;
}

DisturbanceProfile DisturbanceProfile::worst_case_vertex() {
  DisturbanceProfile p;
  p.kind = ProfileKind::worst_case_vertex;
  return p;
}

void DisturbanceProfile::validate(const DisturbanceSet& W) const {
  if (kind == ProfileKind::worst_case_vertex) {
    if (W.kind() != DisturbanceKind::box)
      throw ContractViolation("worst-case-vertex profile requires a box disturbance set");
    return;
  }
  if (schedule.empty()) throw ContractViolation("disturbance schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].second.size() != W.dim())
      throw ContractViolation("disturbance schedule entry has wrong dimension");
    if (i > 0 && schedule[i].first <= schedule[i - 1].first)
      throw ContractViolation("disturbance schedule times must be strictly increasing");
  }
}

Eigen::VectorXd DisturbanceProfile::at(int t) const {
  if (kind == ProfileKind::worst_case_vertex)
    throw ContractViolation("worst-case-vertex profile has no schedule");
  // Before the first entry the first value applies.
  const Eigen::VectorXd* w = &schedule.front().second;
  for (const auto& [start, value] : schedule) {
    if (start > t) break;
    w = &value;
  }
  return *w;
}

NominalController constant_nominal(Eigen::VectorXd u) {
  return [u = std::move(u)](int, const Eigen::VectorXd&) { return u; };
}

Eigen::VectorXd worst_case_vertex(const SafeSetLadder& ladder, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u) {
  const auto vertices = ladder.disturbance.vertices();
  const Eigen::VectorXd* best = nullptr;
  double best_margin = 0.0;
  for (const auto& w : vertices) {
    const double margin = ladder.x_inf.margin(ladder.system.step(x, u, w));
    if (!best || margin < best_margin - 1e-12) {
      best = &w;
      best_margin = margin;
    }
  }
  return *best;
}

SimTrace run(const SafeSetLadder& ladder, const PenaltyConfig& cfg, const Eigen::VectorXd& x0,
             const NominalController& nominal, const DisturbanceProfile& profile, int steps,
             const SolverSettings& settings) {
  if (steps < 1) throw ContractViolation("simulation needs at least one step");
  if (x0.size() != ladder.system.n() || !x0.allFinite())
    throw ContractViolation("initial state must be finite with dimension n");
  profile.validate(ladder.disturbance);

  SimTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(steps));
  Eigen::VectorXd x = x0;
  for (int t = 0; t < steps; ++t) {
    SimStep step;
    step.t = t;
    step.x = x;
    step.u_nom = nominal(t, x);
    const GovernorSolution sol = govern(ladder, cfg, x, step.u_nom, settings);
    step.u = sol.u;
    step.eps = sol.eps;
    step.k_star = sol.k_star;
    step.w = profile.kind == ProfileKind::worst_case_vertex ? worst_case_vertex(ladder, x, sol.u)
                                                            : profile.at(t);
    step.in_x0 = ladder.safe_set.contains_point(x, kMembershipTol);
    step.in_xinf = ladder.x_inf.contains_point(x, kMembershipTol);
    x = ladder.system.step(x, step.u, step.w);
    trace.steps.push_back(std::move(step));
  }
  trace.final_state = x;
  return trace;
}

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << ',' << buf;
}

void put_vec(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put(os, v(i));
}

}  // namespace

void write_csv(std::ostream& os, const SimTrace& trace) {
  if (trace.steps.empty()) return;
  const auto& first = trace.steps.front();
  os << 't';
  for (Eigen::Index i = 0; i < first.x.size(); ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < first.u_nom.size(); ++i) os << ",u_nom" << i + 1;
  for (Eigen::Index i = 0; i < first.u.size(); ++i) os << ",u" << i + 1;
  for (Eigen::Index i = 0; i < first.w.size(); ++i) os << ",w" << i + 1;
  os << ",k_star";
  for (Eigen::Index i = 0; i < first.eps.size(); ++i) os << ",eps" << i;
  os << ",in_X0,in_Xinf\n";
  for (const auto& s : trace.steps) {
    os << s.t;
    put_vec(os, s.x);
    put_vec(os, s.u_nom);
    put_vec(os, s.u);
    put_vec(os, s.w);
    os << ',' << s.k_star;
    put_vec(os, s.eps);
    os << ',' << (s.in_x0 ? 1 : 0) << ',' << (s.in_xinf ? 1 : 0) << '\n';
  }
}

}  // namespace spg
