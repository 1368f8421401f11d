#include <catch_amalgamated.hpp>

#include <cmath>

#include "sdej/engine.hpp"
#include "sdej/registry.hpp"

using namespace sdej;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

CoefficientSet decay_ode() {
  CoefficientSet model;
  model.name = "decay_ode";
  model.dim_state = 1;
  model.dim_noise = 1;
  model.drift = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& out) { out = -x; };
  model.diffusion = [](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out = Eigen::MatrixXd::Zero(1, 1);
  };
  return model;
}

// Exact solution endpoint for gbm_jump given the realized noise.
double gbm_exact_endpoint(const CoefficientSet& model, double x0, const NoiseRealization& noise) {
  const double mu = model.params.at("mu");
  const double s = model.params.at("s");
  const double c = model.params.at("c");
  double b_T = 0.0;
  for (const auto& inc : noise.brownian_increments) b_T += inc[0];
  const double n_T = static_cast<double>(noise.jump_events.size());
  return x0 * std::exp((mu - 0.5 * s * s) * noise.horizon() + s * b_T) *
         std::pow(1.0 + c, n_T);
}

}  // namespace

TEST_CASE("euler integration reproduces the deterministic decay oracle") {
  const CoefficientSet model = decay_ode();
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 10000;
  cfg.x0 = vec1(1.0);
  const auto noise = make_noise(model.measure, 1.0, cfg.step_count, 1, 0, 0);
  const PathRecord rec = simulate_path(model, cfg, noise);
  CHECK(rec.states.back()[0] == Catch::Approx(std::exp(-1.0)).margin(2e-4));
  CHECK(rec.times.size() == 10001);
  CHECK_FALSE(rec.exploded);
}

TEST_CASE("all-zero coefficients leave the state constant") {
  CoefficientSet model;
  model.dim_state = 2;
  model.dim_noise = 2;
  model.drift = [](double, const Eigen::VectorXd&, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Zero(2);
  };
  model.diffusion = [](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out = Eigen::MatrixXd::Zero(2, 2);
  };
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 100;
  cfg.x0 = Eigen::VectorXd(2);
  cfg.x0 << 3.0, -1.0;
  const auto noise = make_noise(model.measure, 1.0, 100, 2, 4, 0);
  const PathRecord rec = simulate_path(model, cfg, noise);
  for (const auto& state : rec.states) {
    CHECK(state[0] == 3.0);
    CHECK(state[1] == -1.0);
  }
}

TEST_CASE("dimension mismatches and numeric blowups are reported") {
  const CoefficientSet model = decay_ode();
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 10;
  cfg.x0 = Eigen::VectorXd::Zero(2);  // wrong dimension
  const auto noise = make_noise(model.measure, 1.0, 10, 1, 0, 0);
  REQUIRE_THROWS_AS(simulate_path(model, cfg, noise), std::invalid_argument);

  CoefficientSet bad = decay_ode();
  bad.drift = [](double, const Eigen::VectorXd&, Eigen::VectorXd& out) {
    out = vec1(std::numeric_limits<double>::quiet_NaN());
  };
  cfg.x0 = vec1(1.0);
  try {
    simulate_path(bad, cfg, noise);
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(e.time == 0.0);
    CHECK(e.state[0] == 1.0);
  }
}

TEST_CASE("explosion freezes the trajectory and records the exit time") {
  CoefficientSet model = decay_ode();
  model.drift = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& out) { out = 10.0 * x; };
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 1000;
  cfg.explosion_radius = 5.0;
  cfg.x0 = vec1(1.0);
  const auto noise = make_noise(model.measure, 1.0, 1000, 1, 0, 0);
  const PathRecord rec = simulate_path(model, cfg, noise);
  REQUIRE(rec.exploded);
  CHECK(rec.explosion_time > 0.0);
  const double frozen = rec.states.back()[0];
  bool after = false;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    if (after) CHECK(rec.states[i][0] == frozen);
    if (rec.times[i] >= rec.explosion_time) after = true;
  }
}

TEST_CASE("csv serialization carries the mandatory header") {
  const CoefficientSet model = make_model("gbm_jump", {});
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 100;
  cfg.x0 = vec1(1.0);
  const auto noise = make_noise(model.measure, 1.0, 100, 1, 3, 0);
  const PathRecord rec = simulate_path(model, cfg, noise);
  const std::string csv = rec.to_csv();
  CHECK(csv.rfind("t,x_1,jump_flag\n", 0) == 0);
  const std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == rec.times.size() + 1);
  // Jump rows are flagged.
  if (!noise.jump_events.empty()) {
    CHECK(csv.find(",1\n") != std::string::npos);
  }
}

TEST_CASE("gbm sample mean approaches the closed-form expectation") {
  const CoefficientSet model = make_model("gbm_jump", {});
  const std::size_t n_paths = 20000;
  const int n_steps = 500;
  double sum = 0.0, sum_sq = 0.0;
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = n_steps;
  cfg.x0 = vec1(1.0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto noise = make_noise(model.measure, 1.0, n_steps, 1, 77, i);
    const double x = simulate_path(model, cfg, noise).states.back()[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n_paths;
  const double sd = std::sqrt((sum_sq - n_paths * mean * mean) / (n_paths - 1));
  const double se = sd / std::sqrt(static_cast<double>(n_paths));
  CHECK(std::abs(mean - std::exp(0.6)) < 3.0 * se + 2.0 / n_steps);
}

TEST_CASE("strong order one-half against the exact gbm endpoint") {
  const CoefficientSet model = make_model("gbm_jump", {});
  const std::size_t n_draws = 3000;
  const auto rms_error = [&](int n_steps) {
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.step_count = n_steps;
    cfg.x0 = vec1(1.0);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
      const auto noise = make_noise(model.measure, 1.0, n_steps, 1, 13, i);
      const double approx = simulate_path(model, cfg, noise).states.back()[0];
      const double exact = gbm_exact_endpoint(model, 1.0, noise);
      sum_sq += (approx - exact) * (approx - exact);
    }
    return std::sqrt(sum_sq / n_draws);
  };
  const double ratio = rms_error(250) / rms_error(1000);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.6);
}

TEST_CASE("symmetric compensated jumps preserve the ou mean") {
  const CoefficientSet model = make_model("ou_jump", {});
  const std::size_t n_paths = 5000;
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 200;
  cfg.x0 = vec1(2.0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto noise = make_noise(model.measure, 1.0, 200, 1, 31, i);
    const double x = simulate_path(model, cfg, noise).states.back()[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n_paths;
  const double sd = std::sqrt((sum_sq - n_paths * mean * mean) / (n_paths - 1));
  const double se = sd / std::sqrt(static_cast<double>(n_paths));
  // theta = 1: no-jump OU mean is x0 * exp(-1).
  CHECK(std::abs(mean - 2.0 * std::exp(-1.0)) < 3.0 * se + 0.02);
}

TEST_CASE("coupled pairs share noise exactly") {
  const CoefficientSet gbm = make_model("gbm_jump", {});
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.step_count = 10000;
  cfg.x0 = vec1(1.0);
  cfg.y0 = vec1(0.5);
  const auto noise = make_noise(gbm.measure, 1.0, 10000, 1, 8, 0);
  const CoupledPair pair = simulate_coupled_pair(gbm, cfg, noise);
  // Multiplicative structure: the ratio of the coupled solutions is the
  // ratio of initial values for all time.
  for (std::size_t i = 0; i < pair.first.times.size(); i += 500) {
    CHECK(pair.first.states[i][0] / pair.second.states[i][0] == Catch::Approx(2.0).margin(1e-2));
  }
  CHECK(pair.min_distance > 0.0);

  // Identical initial values give bit-identical paths.
  SimConfig same = cfg;
  same.y0 = vec1(1.0);
  const CoupledPair equal = simulate_coupled_pair(gbm, same, noise);
  for (std::size_t i = 0; i < equal.first.times.size(); ++i) {
    CHECK(equal.first.states[i] == equal.second.states[i]);
    CHECK(equal.squared_distance[i] == 0.0);
  }

  // Additive noise: the difference of bm paths stays at x0 - y0.
  const CoefficientSet bm = make_model("bm", {});
  SimConfig bcfg;
  bcfg.horizon = 1.0;
  bcfg.step_count = 1000;
  bcfg.x0 = vec1(1.0);
  bcfg.y0 = vec1(0.25);
  const auto bnoise = make_noise(bm.measure, 1.0, 1000, 1, 8, 0);
  const CoupledPair bpair = simulate_coupled_pair(bm, bcfg, bnoise);
  for (std::size_t i = 0; i < bpair.first.times.size(); ++i) {
    CHECK(bpair.first.states[i][0] - bpair.second.states[i][0] ==
          Catch::Approx(0.75).margin(1e-12));
  }

  REQUIRE_THROWS_AS(simulate_coupled_pair(gbm, SimConfig{1.0, 10, 1e6, vec1(1.0), {}, 0}, noise),
                    std::invalid_argument);
}

TEST_CASE("left inverse of the diffusion matrix") {
  CoefficientSet model;
  model.dim_state = 2;
  model.dim_noise = 2;
  model.diffusion = [](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  };
  const LeftInverse inv = left_inverse_sigma(model, 0.0, Eigen::VectorXd::Zero(2));
  CHECK_FALSE(inv.singular);
  CHECK(inv.squared_norm == Catch::Approx(0.5).epsilon(1e-12));
  CHECK((inv.matrix - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  const CoefficientSet s4 = make_model("section4", {});
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  const LeftInverse inv4 = left_inverse_sigma(s4, 0.0, x);
  CHECK_FALSE(inv4.singular);
  CHECK(inv4.squared_norm == Catch::Approx(4.25).epsilon(1e-10));
  Eigen::MatrixXd sigma(2, 2);
  s4.diffusion(0.0, x, sigma);
  CHECK((inv4.matrix * sigma - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);

  const LeftInverse at_origin = left_inverse_sigma(s4, 0.0, Eigen::VectorXd::Zero(2));
  CHECK(at_origin.singular);
  CHECK(std::isinf(at_origin.squared_norm));

  CoefficientSet wide;
  wide.dim_state = 2;
  wide.dim_noise = 1;  // m < d
  wide.diffusion = [](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out = Eigen::MatrixXd::Ones(2, 1);
  };
  REQUIRE_THROWS_AS(left_inverse_sigma(wide, 0.0, Eigen::VectorXd::Zero(2)),
                    std::invalid_argument);
}
