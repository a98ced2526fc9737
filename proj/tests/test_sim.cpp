#include <doctest.h>

#include <sstream>

#include "spg/acc.hpp"
#include "spg/errors.hpp"
#include "spg/sim.hpp"
#include "support.hpp"

using namespace spg;
namespace tc = spg::test;
using spg::test::acc_ladder;
using spg::test::vec;

namespace {

SimTrace run_case(int id) {
  const acc::Case c = acc::make_case(id);
  return run(acc_ladder(), tc::acc().penalty, c.x0, constant_nominal(vec({0.0})), c.profile, c.steps);
}

void check_self_consistent(const SafeSetLadder& L, const SimTrace& trace) {
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const SimStep& s = trace.steps[t];
    CHECK(s.t == static_cast<int>(t));
    const Eigen::VectorXd next = L.system.A * s.x + L.system.B * s.u + L.system.E * s.w;
    const Eigen::VectorXd& stored =
        t + 1 < trace.steps.size() ? trace.steps[t + 1].x : trace.final_state;
    CHECK(next == stored);
    CHECK(s.in_x0 == L.safe_set.contains_point(s.x, kMembershipTol));
    CHECK(s.in_xinf == L.x_inf.contains_point(s.x, kMembershipTol));
  }
}

}  // namespace

TEST_CASE("case 1 rides the boundary of X_inf") {
  const SimTrace trace = run_case(1);
  REQUIRE(trace.steps.size() == 100);
  check_self_consistent(acc_ladder(), trace);
  double lowest = 1e300;
  for (const auto& s : trace.steps) {
    CHECK(s.in_xinf);
    CHECK(s.k_star == 9);
    lowest = std::min(lowest, acc_ladder().x_inf.margin(s.x));
  }
  CHECK(lowest >= -1e-6);
  CHECK(lowest <= 0.05);
}

TEST_CASE("case 2 matches the closed-form braking trajectory") {
  const SimTrace trace = run_case(2);
  check_self_consistent(acc_ladder(), trace);
  // under u = -2, w = -1: dv += 0.25, ds += 0.25 dv + 0.03125
  double ds = 15.0, dv = -4.0;
  const int expected_k[] = {5, 4, 3, 2, 1, 0, -1};
  for (int t = 0; t <= 6; ++t) {
    const SimStep& s = trace.steps[static_cast<std::size_t>(t)];
    CHECK(std::abs(s.u(0) + 2.0) <= 1e-6);
    CHECK(s.k_star == expected_k[t]);
    CHECK(s.in_x0);
    CHECK(std::abs(s.x(0) - ds) <= 1e-9);
    CHECK(std::abs(s.x(1) - dv) <= 1e-9);
    ds += 0.25 * dv + 0.03125;
    dv += 0.25;
  }
  CHECK(ds == 9.53125);
  const SimStep& s7 = trace.steps[7];
  CHECK_FALSE(s7.in_x0);
  CHECK(std::abs(s7.x(0) - 9.53125) <= 1e-9);
}

TEST_CASE("case 3 leaves and recovers X_inf") {
  const SimTrace trace = run_case(3);
  check_self_consistent(acc_ladder(), trace);
  int left = -1, back = -1;
  for (const auto& s : trace.steps) {
    if (s.t >= acc::kPulseStart && left < 0 && !s.in_xinf) left = s.t;
    if (left >= 0 && back < 0 && s.t > acc::kPulseLast && s.in_xinf && s.k_star == 9) back = s.t;
  }
  CHECK(left > acc::kPulseStart);
  CHECK(left <= acc::kPulseLast + 1);
  CHECK(back > acc::kPulseLast);
  CHECK(back <= acc::kPulseLast + acc::kRecoveryWindow);
  for (const auto& s : trace.steps)
    if (s.t >= acc::kPulseStart && s.t <= acc::kPulseLast) CHECK(s.w(0) == acc::kPulseValue);
}

TEST_CASE("k_star steps down by at most one under admissible disturbances") {
  const auto& L = acc_ladder();
  std::mt19937_64 rng(79);
  for (int run_id = 0; run_id < 30; ++run_id) {
    const Eigen::VectorXd x0 = spg::test::uniform(rng, vec({10.0, -5.0}), vec({20.0, 5.0}));
    const double w = spg::test::uniform(rng, vec({-1.0}), vec({1.0}))(0);
    const SimTrace trace = run(L, tc::acc().penalty, x0, constant_nominal(vec({0.0})),
                               DisturbanceProfile::constant(vec({w})), 20);
    for (std::size_t t = 0; t + 1 < trace.steps.size(); ++t) {
      const int now = trace.steps[t].k_star, next = trace.steps[t + 1].k_star;
      if (now >= 0) CHECK(next >= now - 1);
      if (now == L.k_prime + 1) CHECK(next == L.k_prime + 1);
    }
  }
}

TEST_CASE("worst-case vertex selection") {
  const auto& L = acc_ladder();
  std::mt19937_64 rng(83);
  for (int s = 0; s < 100; ++s) {
    const Eigen::VectorXd x = spg::test::uniform(rng, vec({10.0, -5.0}), vec({20.0, 5.0}));
    const Eigen::VectorXd u = spg::test::uniform(rng, vec({-2.0}), vec({2.0}));
    const Eigen::VectorXd w = worst_case_vertex(L, x, u);
    const double lo = L.x_inf.margin(L.system.step(x, u, vec({-1.0})));
    const double hi = L.x_inf.margin(L.system.step(x, u, vec({1.0})));
    CHECK(w(0) == (hi < lo - 1e-12 ? 1.0 : -1.0));
  }
  const SimTrace trace = run(L, tc::acc().penalty, vec({15.0, 0.0}), constant_nominal(vec({0.0})),
                             DisturbanceProfile::worst_case_vertex(), 30);
  check_self_consistent(L, trace);
  for (const auto& s : trace.steps) {
    CHECK(std::abs(std::abs(s.w(0)) - 1.0) == 0.0);
    CHECK(s.in_xinf);
  }
}

TEST_CASE("piecewise profile lookup and validation") {
  const auto p = DisturbanceProfile::piecewise({{0, vec({0.5})}, {3, vec({-2.0})}, {5, vec({0.0})}});
  CHECK(p.at(0)(0) == 0.5);
  CHECK(p.at(2)(0) == 0.5);
  CHECK(p.at(3)(0) == -2.0);
  CHECK(p.at(100)(0) == 0.0);
  const DisturbanceSet W = DisturbanceSet::box(vec({1.0}));
  CHECK_NOTHROW(p.validate(W));
  CHECK_THROWS_AS(DisturbanceProfile::piecewise({{0, vec({0.0})}, {0, vec({1.0})}}).validate(W),
                  ContractViolation);
  CHECK_THROWS_AS(DisturbanceProfile::piecewise({{0, vec({0.0, 1.0})}}).validate(W),
                  ContractViolation);
  CHECK_THROWS_AS(DisturbanceProfile::worst_case_vertex().validate(DisturbanceSet::ball(1, 1.0)),
                  ContractViolation);
  CHECK_THROWS_AS(run(acc_ladder(), tc::acc().penalty, vec({15.0, 0.0}), constant_nominal(vec({0.0})),
                      DisturbanceProfile::constant(vec({0.0})), 0),
                  ContractViolation);
}

TEST_CASE("CSV layout and determinism") {
  const SimTrace a = run_case(2);
  const SimTrace b = run_case(2);
  std::ostringstream sa, sb;
  write_csv(sa, a);
  write_csv(sb, b);
  CHECK(sa.str() == sb.str());
  std::istringstream lines(sa.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header ==
        "t,x1,x2,u_nom1,u1,w1,k_star,eps0,eps1,eps2,eps3,eps4,eps5,eps6,eps7,eps8,eps9,in_X0,in_Xinf");
  CHECK(first.rfind("0,15,-4,0,", 0) == 0);
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows + 1 == a.steps.size());

  // %.17g round-trips every double
  std::istringstream fields(first);
  std::string cell;
  for (int i = 0; i < 5; ++i) std::getline(fields, cell, ',');
  CHECK(std::stod(cell) == a.steps[0].u(0));
}
