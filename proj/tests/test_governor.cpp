#include <doctest.h>

#include "spg/errors.hpp"
#include "spg/governor.hpp"
#include "support.hpp"

using namespace spg;
using spg::test::acc;
using spg::test::acc_ladder;
using spg::test::vec;

namespace {

Eigen::VectorXd random_state(std::mt19937_64& rng) {
  return spg::test::uniform(rng, vec({8.0, -6.0}), vec({22.0, 6.0}));
}

}  // namespace

TEST_CASE("phi values and properties") {
  PenaltyConfig cfg;
  CHECK(phi_eval(cfg, 0.0) == 0.0);
  CHECK(phi_eval(cfg, 1.0) == doctest::Approx(1.01).epsilon(1e-15));
  CHECK(phi_eval(cfg, 2.0) == doctest::Approx(2.04).epsilon(1e-15));
  CHECK(phi_props(cfg));
  cfg.phi_a = 0.0;
  CHECK(phi_props(cfg));
}

TEST_CASE("penalty validation") {
  PenaltyConfig cfg;
  CHECK_NOTHROW(cfg.validate(1));
  cfg.theta = 1.0;
  CHECK_THROWS_AS(cfg.validate(1), ContractViolation);
  cfg = PenaltyConfig{};
  cfg.phi_a = -0.1;
  CHECK_THROWS_AS(cfg.validate(1), ContractViolation);
  cfg = PenaltyConfig{};
  cfg.S = Eigen::MatrixXd::Constant(1, 1, -1.0);
  CHECK_THROWS_AS(cfg.validate(1), ContractViolation);
  cfg.S = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(cfg.validate(1), ContractViolation);
}

TEST_CASE("assembled QP layout for ACC") {
  const auto& cfg = acc();
  const auto& L = acc_ladder();
  CHECK(slack_weight(cfg.penalty, 0) == 1024.0);
  CHECK(slack_weight(cfg.penalty, 9) == 2.0);
  const QuadraticProgram qp = assemble(L, cfg.penalty, vec({15.0, 0.0}), vec({0.7}));
  CHECK(qp.n() == 1 + 10);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(11);
  z(0) = 0.7;
  const double cost = 0.5 * z.dot(qp.H * z) + qp.f.dot(z) + 0.01 * 0.7 * 0.7;
  CHECK(std::abs(cost) <= 1e-15);
  for (int k = 0; k < 10; ++k) {
    CHECK(qp.f(1 + k) == slack_weight(cfg.penalty, k));
    CHECK(qp.H(1 + k, 1 + k) == doctest::Approx(2.0 * 0.01 * slack_weight(cfg.penalty, k)));
  }
  CHECK(Eigen::LLT<Eigen::MatrixXd>(qp.H).info() == Eigen::Success);

  PenaltyConfig linear = cfg.penalty;
  linear.phi_a = 0.0;
  const QuadraticProgram lin = assemble(L, linear, vec({15.0, 0.0}), vec({0.0}));
  CHECK(lin.H(1, 1) == kSlackCurvatureFloor);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(lin.H).info() == Eigen::Success);
}

TEST_CASE("assemble rejects mismatched inputs") {
  const auto& L = acc_ladder();
  PenaltyConfig cfg = acc().penalty;
  CHECK_THROWS_AS(assemble(L, cfg, vec({15.0}), vec({0.0})), ContractViolation);
  CHECK_THROWS_AS(assemble(L, cfg, vec({15.0, 0.0}), vec({0.0, 1.0})), ContractViolation);
  cfg.k_prime = 7;
  CHECK_THROWS_AS(assemble(L, cfg, vec({15.0, 0.0}), vec({0.0})), ContractViolation);
}

TEST_CASE("protected state keeps successor in X_inf") {
  const auto& L = acc_ladder();
  const GovernorSolution sol = govern(L, acc().penalty, vec({15.0, 0.0}), vec({0.0}));
  CHECK(sol.k_star == 9);
  CHECK(sol.eps.maxCoeff() <= sol.zero_tol);
  for (double w : {-1.0, 1.0}) CHECK(L.x_inf.contains_point(L.system.step(vec({15.0, 0.0}), sol.u, vec({w})), 1e-9));
}

TEST_CASE("closing state gets full braking and depth five") {
  const GovernorSolution sol = govern(acc_ladder(), acc().penalty, vec({15.0, -4.0}), vec({0.0}));
  CHECK(std::abs(sol.u(0) + 2.0) <= 1e-6);
  CHECK(sol.k_star == 5);
  CHECK(sol.eps(5) <= sol.zero_tol);
  CHECK(sol.eps(6) > sol.zero_tol);
}

TEST_CASE("depth matches interval feasibility") {
  const auto& L = acc_ladder();
  const auto& cfg = acc();
  std::mt19937_64 rng(53);
  const double tol = zero_tolerance(L, cfg.penalty);
  int depths_seen[11] = {};
  for (int s = 0; s < 400; ++s) {
    const Eigen::VectorXd x = random_state(rng);
    const GovernorSolution sol = govern(L, cfg.penalty, x, vec({0.0}));
    const int expected = spg::test::interval_depth(L, x, tol);
    CHECK(sol.k_star == expected);
    ++depths_seen[expected + 1];
  }
  CHECK(depths_seen[0] > 0);   // no safe step
  CHECK(depths_seen[10] > 0);  // protected
}

TEST_CASE("solution invariants on random states") {
  const auto& L = acc_ladder();
  const auto& cfg = acc();
  std::mt19937_64 rng(59);
  for (int s = 0; s < 300; ++s) {
    const Eigen::VectorXd x = random_state(rng);
    const Eigen::VectorXd u_nom = spg::test::uniform(rng, vec({-3.0}), vec({3.0}));
    const GovernorSolution sol = govern(L, cfg.penalty, x, u_nom);
    CHECK(L.input_set.contains_point(sol.u, 1e-9));
    CHECK(sol.eps(0) >= -1e-8);
    for (int k = 0; k + 1 < sol.eps.size(); ++k) CHECK(sol.eps(k) <= sol.eps(k + 1) + 1e-8);
    int k_star = -1;
    for (int k = 0; k < sol.eps.size(); ++k)
      if (sol.eps(k) <= sol.zero_tol) k_star = k;
    CHECK(sol.k_star == k_star);
    CHECK(sol.kkt_residual <= 1e-8);
  }
}

TEST_CASE("exact minimizer whenever protection is possible") {
  const auto& L = acc_ladder();
  const auto& cfg = acc();
  std::mt19937_64 rng(61);
  const auto& raw = L.raw_groups;
  int protectable = 0;
  for (int s = 0; s < 400; ++s) {
    const Eigen::VectorXd x = random_state(rng);
    const double u_nom = spg::test::uniform(rng, vec({-3.0}), vec({3.0}))(0);
    auto [a, b] = spg::test::scalar_rows(L, raw, raw.size() - 1, raw.size(), x);
    const spg::test::Interval box = spg::test::scalar_interval(a, b, 0.0);
    if (box.empty() || box.hi - box.lo < 1e-6) continue;
    ++protectable;
    const double best = std::clamp(u_nom, box.lo, box.hi);
    const GovernorSolution sol = govern(L, cfg.penalty, x, vec({u_nom}));
    CHECK(sol.k_star == L.k_prime + 1);
    CHECK(std::abs(sol.u(0) - best) <= 1e-5);
  }
  CHECK(protectable >= 50);
}

TEST_CASE("nominal input passes through when already admissible") {
  const auto& L = acc_ladder();
  const auto& cfg = acc();
  std::mt19937_64 rng(67);
  int tried = 0;
  for (int s = 0; s < 4000 && tried < 100; ++s) {
    const Eigen::VectorXd x = random_state(rng);
    const Eigen::VectorXd u_nom = spg::test::uniform(rng, vec({-2.0}), vec({2.0}));
    bool margin = (L.input_set.normals() * u_nom - L.input_set.offsets()).maxCoeff() <= -1e-6;
    for (const auto& g : L.raw_groups) margin = margin && g.evaluate(x, u_nom).maxCoeff() <= -1e-6;
    if (!margin) continue;
    ++tried;
    const GovernorSolution sol = govern(L, cfg.penalty, x, u_nom);
    CHECK((sol.u - u_nom).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(sol.eps.maxCoeff() == 0.0);
  }
  CHECK(tried == 100);
}

TEST_CASE("presolved solve matches the full QP") {
  const auto& L = acc_ladder();
  const auto& cfg = acc();
  std::mt19937_64 rng(71);
  for (int s = 0; s < 200; ++s) {
    const Eigen::VectorXd x = random_state(rng);
    const Eigen::VectorXd u_nom = spg::test::uniform(rng, vec({-3.0}), vec({3.0}));
    const GovernorSolution sol = govern(L, cfg.penalty, x, u_nom);
    const QpSolution full = solve(assemble(L, cfg.penalty, x, u_nom));
    REQUIRE(full.status == QpStatus::optimal);
    CHECK((full.z.head(1) - sol.u).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((full.z.tail(10) - sol.eps).cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + sol.eps.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("govern is deterministic") {
  const auto& L = acc_ladder();
  const auto& cfg = acc();
  const Eigen::VectorXd x = vec({13.7, -2.9});
  const GovernorSolution a = govern(L, cfg.penalty, x, vec({0.4}));
  const GovernorSolution b = govern(L, cfg.penalty, x, vec({0.4}));
  CHECK(a.u == b.u);
  CHECK(a.eps == b.eps);
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("penalty JSON round trip") {
  PenaltyConfig cfg = acc().penalty;
  cfg.S = Eigen::MatrixXd::Constant(1, 1, 0.05);
  const PenaltyConfig back = penalty_from_json(nlohmann::json::parse(to_json(cfg).dump()));
  CHECK(back.theta == cfg.theta);
  CHECK(back.phi_a == cfg.phi_a);
  CHECK(back.k_prime == cfg.k_prime);
  CHECK(back.S == cfg.S);
  CHECK_THROWS_AS(penalty_from_json(nlohmann::json::object()), InputError);
}
