#include <doctest.h>

#include "spg/oracle.hpp"
#include "support.hpp"

using namespace spg;
using spg::test::acc;
using spg::test::acc_ladder;
using spg::test::vec;

TEST_CASE("oracle at the protected start state") {
  const OracleResult res = solve_series(acc_ladder(), acc().penalty, vec({15.0, 0.0}), vec({0.0}));
  CHECK(res.depth == 9);
  REQUIRE(res.u.has_value());
  CHECK(std::abs((*res.u)(0)) <= 1e-6);
  REQUIRE(res.per_problem_status.size() == 1);
  CHECK(res.per_problem_status[0] == ProblemStatus::feasible);
}

TEST_CASE("oracle at the closing state") {
  const OracleResult res = solve_series(acc_ladder(), acc().penalty, vec({15.0, -4.0}), vec({0.0}));
  CHECK(res.depth == 5);
  // protection, then k' = 8, 7, 6 infeasible and 5 feasible
  REQUIRE(res.per_problem_status.size() == 5);
  CHECK(res.per_problem_status.back() == ProblemStatus::feasible);
  REQUIRE(res.u.has_value());
  const ConstraintGroup stack = acc_ladder().stacked(6);
  CHECK(stack.evaluate(vec({15.0, -4.0}), *res.u).maxCoeff() <= 1e-6);
}

TEST_CASE("oracle with no safe step") {
  const OracleResult res = solve_series(acc_ladder(), acc().penalty, vec({0.0, 0.0}), vec({0.0}));
  CHECK(res.depth == -1);
  CHECK(res.per_problem_status.size() == 10);
  CHECK_FALSE(res.u.has_value());
}

TEST_CASE("oracle depth matches interval feasibility") {
  const auto& L = acc_ladder();
  const double tol = zero_tolerance(L, acc().penalty);
  std::mt19937_64 rng(73);
  for (int s = 0; s < 200; ++s) {
    const Eigen::VectorXd x = spg::test::uniform(rng, vec({8.0, -6.0}), vec({22.0, 6.0}));
    const OracleResult res = solve_series(L, acc().penalty, x, vec({0.0}));
    CHECK(res.depth == spg::test::interval_depth(L, x, tol));
    CHECK(res.u.has_value() == (res.depth >= 0));
  }
}

TEST_CASE("agreement report") {
  const AgreementReport rep = verify_agreement(acc_ladder(), acc().penalty, vec({8.0, -6.0}),
                                               vec({22.0, 6.0}), vec({0.0}), 60, 5, 10);
  CHECK(rep.samples == 60);
  CHECK(rep.agree == 60);
  CHECK(rep.mismatches.empty());
  CHECK(rep.protected_cases > 0);
  CHECK(rep.max_u_deviation <= 1e-4);
  CHECK(rep.mean_govern_s > 0.0);
  CHECK(rep.mean_series_s > 0.0);
  const nlohmann::json j = to_json(rep);
  CHECK(j.at("agree") == 60);

  const AgreementReport again = verify_agreement(acc_ladder(), acc().penalty, vec({8.0, -6.0}),
                                                 vec({22.0, 6.0}), vec({0.0}), 60, 5, 10);
  CHECK(again.max_u_deviation == rep.max_u_deviation);
  CHECK(again.protected_cases == rep.protected_cases);
}
