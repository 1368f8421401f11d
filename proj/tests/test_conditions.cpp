#include <catch_amalgamated.hpp>

#include <cmath>

#include "sdej/conditions.hpp"
#include "sdej/registry.hpp"

using namespace sdej;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("sample grids stay in the ball and include adversarial probes") {
  const SampleGrid grid = SampleGrid::make(2, 10.0, 500, 500);
  CHECK(grid.pairs.size() >= 500);
  for (const auto& x : grid.points) CHECK(x.norm() <= 10.0 + 1e-12);
  for (const auto& [x, y] : grid.pairs) {
    CHECK(x.norm() <= 10.0 + 1e-12);
    CHECK(y.norm() <= 10.0 + 1e-12);
  }
  bool has_origin = false;
  for (const auto& x : grid.points) has_origin |= (x.norm() == 0.0);
  CHECK(has_origin);

  // Deterministic construction.
  const SampleGrid again = SampleGrid::make(2, 10.0, 500, 500);
  REQUIRE(again.points.size() == grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    CHECK(grid.points[i] == again.points[i]);
  }

  REQUIRE_THROWS_AS(SampleGrid::make(0, 1.0, 10, 10), std::invalid_argument);
  REQUIRE_THROWS_AS(SampleGrid::make(2, 0.0, 10, 10), std::invalid_argument);
}

TEST_CASE("monotonicity condition holds on the worked 2d model") {
  const CoefficientSet model = make_model("section4", {});
  ConditionParams params;
  params.modulus = ModulusSpec::linear(3.0);
  const SampleGrid grid = SampleGrid::make(2, 10.0, 2000, 2000);
  const ConditionReport report = check_condition("C9", model, params, grid);
  CHECK(report.satisfied);
  CHECK(report.max_residual <= 1e-9);
  CHECK(report.grid_size >= 2000);

  // The witness reproduces the reported residual.
  const double again =
      condition_residual("C9", model, params, report.witness.time, report.witness.x,
                         &*report.witness.y);
  CHECK(std::abs(again - report.max_residual) <= 1e-12);
}

TEST_CASE("pair residuals are symmetric and vanish on the diagonal") {
  const CoefficientSet s4 = make_model("section4", {});
  const CoefficientSet gbm = make_model("gbm_jump", {});
  ConditionParams params;
  params.modulus = ModulusSpec::linear(3.0);
  params.K = 2.0;

  const Eigen::VectorXd x = vec2(1.3, -0.4), y = vec2(-2.0, 0.7);
  for (const char* id : {"C3", "C9", "C10"}) {
    const double rxy = condition_residual(id, s4, params, 0.0, x, &y);
    const double ryx = condition_residual(id, s4, params, 0.0, y, &x);
    CHECK(rxy == ryx);
  }
  Eigen::VectorXd u(1), v(1);
  u << 0.8;
  v << -0.3;
  for (const char* id : {"C3", "C9", "C10", "C11"}) {
    CHECK(condition_residual(id, gbm, params, 0.0, u, &v) ==
          condition_residual(id, gbm, params, 0.0, v, &u));
  }
  // x = y: all differences vanish, residual is -g * modulus(0) = 0.
  CHECK(condition_residual("C9", s4, params, 0.0, x, &x) == 0.0);
  CHECK(condition_residual("C3", gbm, params, 0.0, u, &u) == 0.0);
}

TEST_CASE("growth conditions on the worked model") {
  const CoefficientSet model = make_model("section4", {});
  ConditionParams params;
  const SampleGrid grid = SampleGrid::make(2, 1000.0, 2000, 10);
  const ConditionReport c5 = check_condition("C5", model, params, grid);
  CHECK(c5.satisfied);

  // Linear growth fails superlinearly: the probe ratio grows with |x|.
  const double probe10 = condition_residual("LIN", model, params, 0.0, vec2(10.0, 0.0), nullptr);
  const double probe100 =
      condition_residual("LIN", model, params, 0.0, vec2(100.0, 0.0), nullptr);
  const double probe1000 =
      condition_residual("LIN", model, params, 0.0, vec2(1000.0, 0.0), nullptr);
  const auto expected = [](double R) {
    const double a = 1.0 + std::sqrt(R);
    return (R * R / ((1.0 + R) * (1.0 + R)) + a * a * R * R) / (1.0 + R * R);
  };
  CHECK(probe10 == Catch::Approx(expected(10.0)).epsilon(1e-12));
  CHECK(probe100 == Catch::Approx(expected(100.0)).epsilon(1e-12));
  CHECK(probe100 / probe10 > 5.0);
  CHECK(probe1000 / probe100 > probe100 / probe10);
  // LIN is a diagnostic: always reported as satisfied.
  CHECK(check_condition("LIN", model, params, grid).satisfied);
}

TEST_CASE("ellipticity fails at the origin of the worked model") {
  const CoefficientSet model = make_model("section4", {});
  ConditionParams params;
  params.lambda = 4.0;
  const SampleGrid grid = SampleGrid::make(2, 10.0, 200, 10);
  const ConditionReport report = check_condition("C8", model, params, grid);
  CHECK_FALSE(report.satisfied);
  CHECK(std::isinf(report.max_residual));
  CHECK(report.witness.x.norm() == 0.0);

  CoefficientSet wide;
  wide.dim_state = 2;
  wide.dim_noise = 1;
  wide.diffusion = [](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out = Eigen::MatrixXd::Ones(2, 1);
  };
  REQUIRE_THROWS_AS(check_condition("C8", wide, params, grid), std::invalid_argument);
}

TEST_CASE("jump conditions on the 1d models") {
  const CoefficientSet gbm = make_model("gbm_jump", {});
  ConditionParams params;
  params.K = 2.0;
  params.modulus = ModulusSpec::linear(1.0);
  const SampleGrid grid = SampleGrid::make(1, 10.0, 1000, 1000);

  // C10 with K=2: the multiplicative jump and contracting drift stay
  // below the linear modulus (residual ~ (0.39 - 1) * |x-y|^2).
  const ConditionReport c10 = check_condition("C10", gbm, params, grid);
  CHECK(c10.satisfied);

  // C11: the f2 displacement keeps |df2|^2 + 2<x-y, df2> >= 0.
  const ConditionReport c11 = check_condition("C11", gbm, params, grid);
  CHECK(c11.satisfied);
  CHECK(c11.max_residual <= 0.0);

  // C11 is identically zero when f2 is absent.
  const CoefficientSet s4 = make_model("section4", {});
  const SampleGrid grid2 = SampleGrid::make(2, 10.0, 100, 100);
  CHECK(check_condition("C11", s4, params, grid2).max_residual == 0.0);

  // C5/C6/C7 with generous envelopes on gbm_jump.
  params.f = [](double) { return 3.0; };
  params.p = 3.0;
  CHECK(check_condition("C5", gbm, params, grid).satisfied);
  CHECK(check_condition("C6", gbm, params, grid).satisfied);
  const ConditionReport c7 = check_condition("C7", gbm, params, grid);
  // sigma^2 + rate*f2^2 + (rate*|f2|)^2 = 0.33 x^2 <= 3(|x|^3+1) on the ball.
  CHECK(c7.satisfied);
}

TEST_CASE("unknown ids and missing inputs are rejected") {
  const CoefficientSet model = make_model("bm", {});
  ConditionParams params;
  const SampleGrid grid = SampleGrid::make(1, 1.0, 10, 10);
  REQUIRE_THROWS_AS(check_condition("C99", model, params, grid), std::invalid_argument);
  // Pairwise residual without a pair.
  REQUIRE_THROWS_AS(
      condition_residual("C9", model, params, 0.0, Eigen::VectorXd::Zero(1), nullptr),
      std::invalid_argument);
  // Modulus required for C3/C9/C10.
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  REQUIRE_THROWS_AS(
      condition_residual("C3", model, params, 0.0, Eigen::VectorXd::Zero(1), &y),
      std::invalid_argument);
  params.modulus = ModulusSpec::linear(1.0);
  params.K = 0.4;
  REQUIRE_THROWS_AS(
      condition_residual("C10", model, params, 0.0, Eigen::VectorXd::Zero(1), &y),
      std::invalid_argument);
}

TEST_CASE("enlarging the grid never decreases the worst residual") {
  const CoefficientSet model = make_model("section4", {});
  ConditionParams params;
  params.modulus = ModulusSpec::linear(3.0);
  const SampleGrid small = SampleGrid::make(2, 10.0, 100, 100, false);
  const SampleGrid large = SampleGrid::make(2, 10.0, 100, 1000, false);
  const double r_small = check_condition("C9", model, params, small).max_residual;
  const double r_large = check_condition("C9", model, params, large).max_residual;
  CHECK(r_large >= r_small);
}
