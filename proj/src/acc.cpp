#include "spg/acc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spg/errors.hpp"

namespace spg::acc {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

Case make_case(int id) {
  Case c;
  c.id = id;
  switch (id) {
    case 1:
      c.x0 = Eigen::Vector2d(15.0, 0.0);
      c.profile = DisturbanceProfile::constant(scalar(-1.0));
      c.steps = kCase1Steps;
      break;
    case 2:
      c.x0 = Eigen::Vector2d(15.0, -4.0);
      c.profile = DisturbanceProfile::constant(scalar(-1.0));
      c.steps = kCase2Steps;
      break;
    case 3:
      c.x0 = Eigen::Vector2d(15.0, 0.0);
      c.profile = DisturbanceProfile::piecewise({{0, scalar(kPulseBaseline)},
                                                 {kPulseStart, scalar(kPulseValue)},
                                                 {kPulseLast + 1, scalar(kPulseBaseline)}});
      c.steps = kCase3Steps;
      break;
    default:
      throw ContractViolation("ACC case must be 1, 2 or 3");
  }
  return c;
}

Eigen::VectorXd sample_lower() { return Eigen::Vector2d(8.0, -6.0); }
Eigen::VectorXd sample_upper() { return Eigen::Vector2d(22.0, 6.0); }

std::string format(const Gate& gate) {
  return std::string(gate.pass ? "PASS " : "FAIL ") + gate.name + ": " + gate.detail;
}

Gate case1_gate(const SafeSetLadder& ladder, const SimTrace& trace, double seconds) {
  Gate g{"case1-protection", false, ""};
  double min_margin = ladder.x_inf.margin(trace.final_state);
  for (const auto& s : trace.steps) min_margin = std::min(min_margin, ladder.x_inf.margin(s.x));
  g.pass = min_margin >= -1e-6 && min_margin <= 0.05 && seconds < 10.0;
  g.detail = fmt("min margin to X_inf %.3g (need [-1e-6, 0.05]), %.3f s", min_margin, seconds);
  return g;
}

Gate case2_gate(const SimTrace& trace, double seconds) {
  Gate g{"case2-extension", false, ""};
  static constexpr int kExpected[] = {5, 4, 3, 2, 1, 0, -1};
  bool ok = trace.steps.size() > 7;
  double worst_u = 0.0;
  for (int t = 0; ok && t <= 6; ++t) {
    const auto& s = trace.steps[static_cast<std::size_t>(t)];
    worst_u = std::max(worst_u, std::abs(s.u(0) + 2.0));
    ok = ok && s.k_star == kExpected[t];
  }
  ok = ok && worst_u <= 1e-6;
  int first_violation = -1;
  for (const auto& s : trace.steps) {
    if (!s.in_x0) {
      first_violation = s.t;
      break;
    }
  }
  const double gap7 = trace.steps.size() > 7 ? trace.steps[7].x(0) : NAN;
  ok = ok && first_violation == 7 && std::abs(gap7 - 9.53125) <= 1e-9 && seconds < 5.0;
  g.pass = ok;
  g.detail = fmt("max |u+2| %.3g, first X0 violation t=%.0f, gap7 %.17g", worst_u,
                 static_cast<double>(first_violation), gap7) +
             fmt(", %.3f s", seconds) + (ok ? ", k* = 5 4 3 2 1 0 -1" : ", k* mismatch or bound failed");
  return g;
}

Gate case3_gate(const SafeSetLadder& ladder, const SimTrace& trace) {
  Gate g{"case3-recovery", false, ""};
  int exit_t = -1;
  for (const auto& s : trace.steps) {
    if (s.t > kPulseStart && s.t <= kPulseLast + 1 && !s.in_xinf) {
      exit_t = s.t;
      break;
    }
  }
  int recover_t = -1;
  if (exit_t >= 0) {
    for (const auto& s : trace.steps) {
      if (s.t > kPulseLast && s.t <= kPulseLast + kRecoveryWindow && s.in_xinf &&
          s.k_star == ladder.k_prime + 1) {
        recover_t = s.t;
        break;
      }
    }
  }
  g.pass = exit_t >= 0 && recover_t >= 0;
  g.detail = fmt("left X_inf at t=%.0f, back with k*=k'+1 at t=%.0f (pulse ends t=%.0f)",
                 exit_t, recover_t, kPulseLast);
  return g;
}

Gate agreement_gate(const AgreementReport& rep) {
  Gate g{"oracle-agreement", false, ""};
  g.pass = rep.agree == rep.samples && rep.max_u_deviation <= 1e-4;
  g.detail = "agreement " + std::to_string(rep.agree) + "/" + std::to_string(rep.samples) +
             fmt(", max |u - u_oracle| %.3g over protected states", rep.max_u_deviation);
  return g;
}

Gate timing_gate(const AgreementReport& rep) {
  Gate g{"timing", false, ""};
  const double ratio = rep.mean_govern_s > 0.0 ? rep.mean_series_s / rep.mean_govern_s : 0.0;
  g.pass = ratio >= 5.0;
  g.detail = fmt("govern %.3g s, series %.3g s, speedup %.1fx (need >= 5x)", rep.mean_govern_s,
                 rep.mean_series_s, ratio);
  return g;
}

Gate nesting_gate(const SafeSetLadder& ladder) {
  Gate g{"set-nesting", false, ""};
  const NestingReport rep = check_nesting(ladder);
  g.pass = rep.all();
  int held = 0;
  for (bool b : rep.consecutive) held += b ? 1 : 0;
  g.detail = std::to_string(held) + "/" + std::to_string(rep.consecutive.size()) +
             " consecutive inclusions, X_inf in last: " + (rep.x_inf_in_last ? "yes" : "no") +
             ", base equals X0: " + (rep.base_equals_x0 ? "yes" : "no");
  return g;
}

}  // namespace spg::acc
