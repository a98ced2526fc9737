#include <doctest.h>

#include <fstream>
#include <sstream>

#include "spg/config.hpp"
#include "spg/errors.hpp"

using namespace spg;

namespace {

std::string acc_yaml() {
  std::ifstream in(SPG_SOURCE_DIR "/configs/acc.yaml");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("shipped ACC config equals the built-in instance") {
  const ProblemConfig a = parse_config(acc_yaml());
  const ProblemConfig b = acc_config();
  CHECK(a.system.A == b.system.A);
  CHECK(a.system.B == b.system.B);
  CHECK(a.system.E == b.system.E);
  CHECK(a.system.dt == b.system.dt);
  CHECK(a.feedback.K == b.feedback.K);
  CHECK(a.safe_set == b.safe_set);
  CHECK(a.input_set == b.input_set);
  CHECK(a.disturbance.radius() == b.disturbance.radius());
  CHECK(a.penalty.theta == b.penalty.theta);
  CHECK(a.penalty.phi_a == b.penalty.phi_a);
  CHECK(a.penalty.k_prime == b.penalty.k_prime);
  CHECK(a.penalty.weight(1) == b.penalty.weight(1));
  CHECK(a.eps_tight == b.eps_tight);
  CHECK(a.k_cap == b.k_cap);
  CHECK(load_config(SPG_SOURCE_DIR "/configs/acc.yaml").safe_set == b.safe_set);
}

TEST_CASE("row form and ball disturbance") {
  std::string text = replace(acc_yaml(), "  lower: [10.0, -5.0]\n  upper: [20.0, 5.0]",
                             "  rows: [[1, 0, 20], [-1, 0, -10], [0, 1, 5], [0, -1, 5]]");
  text = replace(text, "  kind: box\n  radius: [1.0]", "  kind: euclidean-ball\n  dim: 1\n  radius: 1.0");
  const ProblemConfig cfg = parse_config(text);
  CHECK(cfg.safe_set == acc_config().safe_set);
  CHECK(cfg.disturbance.kind() == DisturbanceKind::euclidean_ball);
}

TEST_CASE("strict parsing") {
  const std::string base = acc_yaml();
  CHECK_THROWS_AS(parse_config(replace(base, "  dt: 0.25", "  dt: 0.25\n  extra: 1")), InputError);
  CHECK_THROWS_AS(parse_config(replace(base, "feedback:\n  K: [[0.2842, 0.8056]]\n", "")), InputError);
  CHECK_THROWS_AS(parse_config(replace(base, "  theta: 2.0", "  theta: two")), InputError);
  CHECK_THROWS_AS(parse_config(replace(base, "  theta: 2.0", "  theta: 0.5")), InputError);
  CHECK_THROWS_AS(parse_config(replace(base, "[[1.0, 0.25], [0.0, 1.0]]", "[[1.0, 0.25], [0.0]]")),
                  InputError);
  CHECK_THROWS_AS(parse_config(replace(base, "  kind: box", "  kind: ellipse")), InputError);
  CHECK_THROWS_AS(parse_config("system: ["), InputError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), InputError);
}

TEST_CASE("unbounded or empty sets are rejected") {
  const std::string base = acc_yaml();
  CHECK_THROWS_AS(parse_config(replace(base, "  lower: [-2.0]\n  upper: [2.0]", "  rows: [[1, 2]]")),
                  InputError);
  CHECK_THROWS_AS(parse_config(replace(base, "  lower: [-2.0]\n  upper: [2.0]",
                                       "  lower: [2.0]\n  upper: [-2.0]")),
                  InputError);
}
