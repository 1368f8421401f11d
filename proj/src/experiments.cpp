#include "sdej/experiments.hpp"

#include <boost/math/distributions/beta.hpp>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sdej/quadrature.hpp"

namespace sdej {
namespace {

// Constant standing in for the unspecified BDG constant C'_p of the
// maximal-process envelope; documented with the bound it feeds.
constexpr double kBdgConstant = 4.0;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Static block partition; per-path work writes only its own slots, so
// the result is invariant under the thread count.
void parallel_for_paths(std::size_t n, int n_threads,
                        const std::function<void(std::size_t)>& body) {
  unsigned threads = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Estimate mean_se(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

Estimate binomial_estimate(std::size_t hits, std::size_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

double clopper_pearson_lower(std::size_t hits, std::size_t n, double alpha = 0.05) {
  if (hits == 0) return 0.0;
  boost::math::beta_distribution<double> dist(static_cast<double>(hits),
                                              static_cast<double>(n - hits + 1));
  return boost::math::quantile(dist, alpha / 2.0);
}

// Index of the last usable grid point of a coupled pair: the earlier
// explosion freezes both for distance purposes.
std::size_t stop_index_for_explosions(const CoupledPair& pair) {
  std::size_t stop = pair.first.times.size() - 1;
  for (const PathRecord* rec : {&pair.first, &pair.second}) {
    if (rec->exploded) {
      for (std::size_t i = 0; i < rec->times.size(); ++i) {
        if (rec->times[i] >= rec->explosion_time) {
          stop = std::min(stop, i);
          break;
        }
      }
    }
  }
  return stop;
}

// Inverse of the nondecreasing continuity test function, by bisection.
double continuity_inverse(const TestFunction& phi, double value) {
  double hi = 1.0;
  while (phi.eval(hi) < value && hi < 1e30) hi *= 2.0;
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (phi.eval(mid) < value ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::size_t grid_index_of(const std::vector<double>& times, double t) {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= tol) return i;
  }
  throw std::invalid_argument("requested time is not a grid point");
}

}  // namespace

const Estimate& ExperimentSummary::at(const std::string& name) const {
  for (const auto& [key, est] : estimates) {
    if (key == name) return est;
  }
  throw std::out_of_range("ExperimentSummary: no estimate named " + name);
}

const BoundComparison& ExperimentSummary::bound(const std::string& name) const {
  for (const auto& b : bound_comparisons) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("ExperimentSummary: no bound named " + name);
}

ExperimentSummary run_continuity(const CoefficientSet& model, const ContinuityConfig& cfg) {
  if (cfg.ys.empty()) throw std::invalid_argument("run_continuity: empty ladder");
  if (!(cfg.eps_dist > 0.0)) throw std::invalid_argument("run_continuity: eps_dist must be > 0");
  Stopwatch watch;

  ExperimentSummary summary;
  summary.experiment_id = "continuity";
  summary.n_paths = cfg.mc.n_paths;
  summary.seed = cfg.mc.seed;

  const double C_t = integrate(model.envelope_g, 0.0, cfg.t, 1e-8);

  for (std::size_t rung = 0; rung < cfg.ys.size(); ++rung) {
    const Eigen::VectorXd& y = cfg.ys[rung];
    if (y.size() != cfg.x.size()) {
      throw std::invalid_argument("run_continuity: ladder dimension mismatch");
    }
    std::vector<char> exceeded(cfg.mc.n_paths, 0);
    parallel_for_paths(cfg.mc.n_paths, cfg.mc.n_threads, [&](std::size_t i) {
      const NoiseRealization noise = make_noise(model.measure, cfg.t, cfg.mc.n_steps,
                                                model.dim_noise, cfg.mc.seed, i);
      SimConfig sim;
      sim.horizon = cfg.t;
      sim.step_count = cfg.mc.n_steps;
      sim.explosion_radius = cfg.mc.explosion_radius;
      sim.x0 = cfg.x;
      sim.y0 = y;
      const CoupledPair pair = simulate_coupled_pair(model, sim, noise);
      const std::size_t stop = stop_index_for_explosions(pair);
      for (std::size_t k = 0; k <= stop; ++k) {
        if (std::sqrt(pair.squared_distance[k]) >= cfg.eps_dist) {
          exceeded[i] = 1;
          break;
        }
      }
    });

    std::size_t hits = 0;
    for (char e : exceeded) hits += e;
    const Estimate p_hat = binomial_estimate(hits, cfg.mc.n_paths);
    const std::string tag = "[" + std::to_string(rung) + "]";
    summary.estimates.emplace_back("p_hat" + tag, p_hat);

    const double delta = cfg.delta > 0.0 ? cfg.delta : (cfg.x - y).norm();
    summary.estimates.emplace_back("delta" + tag, Estimate{delta, 0.0});
    double bound = std::numeric_limits<double>::infinity();
    if (delta > 0.0) {
      const TestFunction phi = TestFunction::continuity(delta, cfg.modulus);
      bound = (delta + C_t) / phi.eval(cfg.eps_dist * cfg.eps_dist);
      // The inverse-function reading of the same display, for comparison.
      summary.estimates.emplace_back(
          "bound_inverse_reading" + tag,
          Estimate{continuity_inverse(phi, cfg.eps_dist * cfg.eps_dist) * (delta + C_t), 0.0});
    }
    summary.bound_comparisons.push_back(
        {"exceedance" + tag, p_hat.value, bound, p_hat.value <= bound});
  }

  summary.runtime_seconds = watch.seconds();
  return summary;
}

ExperimentSummary run_nonconfluence(const CoefficientSet& model, const NonconfluenceConfig& cfg) {
  if (cfg.x0.size() != cfg.y0.size()) {
    throw std::invalid_argument("run_nonconfluence: x0/y0 dimension mismatch");
  }
  const double initial_distance = (cfg.x0 - cfg.y0).norm();
  if (!(initial_distance > 0.0)) {
    throw std::invalid_argument("run_nonconfluence: x0 must differ from y0");
  }
  if (!(cfg.K > 0.5)) throw std::invalid_argument("run_nonconfluence: K must exceed 1/2");
  if (cfg.gamma.kind() == ModulusSpec::Kind::linear_gamma &&
      cfg.K < cfg.gamma.min_confluence_constant()) {
    throw std::invalid_argument("run_nonconfluence: K below (c+1)/c for the gamma modulus");
  }
  Stopwatch watch;

  const double c0 = initial_distance * initial_distance;
  const TestFunction phi = TestFunction::confluence(cfg.delta, c0, cfg.gamma);
  const double tau_threshold = 2.0 * initial_distance;

  std::vector<double> phi_values(cfg.mc.n_paths);
  std::vector<double> min_distances(cfg.mc.n_paths);
  parallel_for_paths(cfg.mc.n_paths, cfg.mc.n_threads, [&](std::size_t i) {
    const NoiseRealization noise =
        make_noise(model.measure, cfg.T, cfg.mc.n_steps, model.dim_noise, cfg.mc.seed, i);
    SimConfig sim;
    sim.horizon = cfg.T;
    sim.step_count = cfg.mc.n_steps;
    sim.explosion_radius = cfg.mc.explosion_radius;
    sim.x0 = cfg.x0;
    sim.y0 = cfg.y0;
    const CoupledPair pair = simulate_coupled_pair(model, sim, noise);

    std::size_t stop = stop_index_for_explosions(pair);
    for (std::size_t k = 0; k <= stop; ++k) {
      if (std::sqrt(pair.squared_distance[k]) >= tau_threshold) {
        stop = k;  // first grid time satisfying the tau inequality
        break;
      }
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= stop; ++k) {
      min_dist = std::min(min_dist, std::sqrt(pair.squared_distance[k]));
    }
    min_distances[i] = min_dist;
    phi_values[i] = phi.eval(pair.squared_distance[stop]);
  });

  ExperimentSummary summary;
  summary.experiment_id = "nonconfluence";
  summary.n_paths = cfg.mc.n_paths;
  summary.seed = cfg.mc.seed;

  const Estimate phi_mean = mean_se(phi_values);
  summary.estimates.emplace_back("phi_mean", phi_mean);
  double overall_min = std::numeric_limits<double>::infinity();
  for (double m : min_distances) overall_min = std::min(overall_min, m);
  summary.estimates.emplace_back("min_distance_overall", Estimate{overall_min, 0.0});

  for (double eps : {1e-2, 1e-4, 1e-6}) {
    std::size_t below = 0;
    for (double m : min_distances) below += (m < eps);
    std::ostringstream name;
    name << "frac_below_" << eps;
    summary.estimates.emplace_back(name.str(), binomial_estimate(below, cfg.mc.n_paths));
  }

  const double gronwall = phi.eval(c0) * std::exp((2.0 * cfg.K - 1.0) * cfg.T);
  summary.bound_comparisons.push_back(
      {"gronwall", phi_mean.value, gronwall, phi_mean.value <= gronwall * 1.1});

  summary.runtime_seconds = watch.seconds();
  return summary;
}

ExperimentSummary run_moments(const CoefficientSet& model, const MomentsConfig& cfg) {
  if (!(cfg.p >= 2.0 && cfg.p < 4.0)) {
    throw std::invalid_argument("run_moments: p must lie in [2, 4)");
  }
  Stopwatch watch;

  std::vector<double> sup_p(cfg.mc.n_paths);
  parallel_for_paths(cfg.mc.n_paths, cfg.mc.n_threads, [&](std::size_t i) {
    const NoiseRealization noise =
        make_noise(model.measure, cfg.t, cfg.mc.n_steps, model.dim_noise, cfg.mc.seed, i);
    SimConfig sim;
    sim.horizon = cfg.t;
    sim.step_count = cfg.mc.n_steps;
    sim.explosion_radius = cfg.mc.explosion_radius;
    sim.x0 = cfg.x0;
    const PathRecord rec = simulate_path(model, sim, noise);
    double sup = 0.0;
    for (const auto& state : rec.states) sup = std::max(sup, state.norm());
    sup_p[i] = std::pow(sup, cfg.p);
  });

  ExperimentSummary summary;
  summary.experiment_id = "moments";
  summary.n_paths = cfg.mc.n_paths;
  summary.seed = cfg.mc.seed;

  const Estimate estimate = mean_se(sup_p);
  summary.estimates.emplace_back("sup_moment", estimate);

  // Gronwall-style envelope with C'_p pinned to kBdgConstant:
  //   A = 1 + 2*C'_p*|x0|^p
  //   B = C'_p*((C'_p+1)*t^{(p-2)/2} + p*(C'_p*(8-2p))^{(4-p)/p}/4)
  //   E[sup^p + 1] <= A * exp(B * int_0^t (f^{p/2} + f))
  const double Cp = kBdgConstant;
  const double A = 1.0 + 2.0 * Cp * std::pow(cfg.x0.norm(), cfg.p);
  const double B =
      Cp * ((Cp + 1.0) * std::pow(cfg.t, 0.5 * (cfg.p - 2.0)) +
            cfg.p * std::pow(Cp * (8.0 - 2.0 * cfg.p), (4.0 - cfg.p) / cfg.p) / 4.0);
  const double f_integral = integrate(
      [&](double s) {
        const double f = model.envelope_f(s);
        return std::pow(f, 0.5 * cfg.p) + f;
      },
      0.0, cfg.t, 1e-8);
  const double envelope = A * std::exp(B * f_integral) - 1.0;
  summary.bound_comparisons.push_back(
      {"envelope", estimate.value, envelope, estimate.value <= envelope});

  summary.runtime_seconds = watch.seconds();
  return summary;
}

ExperimentSummary run_girsanov_bridge(const CoefficientSet& model, const GirsanovConfig& cfg) {
  if (model.dim_noise < model.dim_state) {
    throw std::invalid_argument("run_girsanov_bridge: requires dim_noise >= dim_state");
  }
  const BridgeSpec& spec = cfg.spec;
  if (!(spec.t1 > 0.0 && spec.t1 < spec.T)) {
    throw std::invalid_argument("run_girsanov_bridge: need 0 < t1 < T");
  }
  if (!(spec.eps > 0.0) || !(spec.hit_radius > 0.0)) {
    throw std::invalid_argument("run_girsanov_bridge: eps and hit_radius must be > 0");
  }
  if (spec.y0.size() != cfg.x0.size()) {
    throw std::invalid_argument("run_girsanov_bridge: y0 dimension mismatch");
  }
  Stopwatch watch;

  const double span = spec.T - spec.t1;
  const std::size_t n = cfg.mc.n_paths;
  std::vector<double> density(n), endpoint_sq(n), truncation_sq(n), sup_p(n);
  std::vector<char> hit(n, 0), flagged(n, 0), zero_density(n, 0);

  parallel_for_paths(n, cfg.mc.n_threads, [&](std::size_t i) {
    const NoiseRealization noise = make_noise(model.measure, spec.T, cfg.mc.n_steps,
                                              model.dim_noise, cfg.mc.seed, i, {spec.t1});
    SimConfig sim;
    sim.horizon = spec.T;
    sim.step_count = cfg.mc.n_steps;
    sim.explosion_radius = cfg.mc.explosion_radius;
    sim.x0 = cfg.x0;

    // Uncontrolled pass: X_{t1}, its truncation and the maximal process.
    const PathRecord base = simulate_path(model, sim, noise);
    const std::size_t idx_t1 = grid_index_of(base.times, spec.t1);
    const Eigen::VectorXd x_t1 = base.states[idx_t1];
    const Eigen::VectorXd x_eps =
        x_t1.norm() <= 1.0 / spec.eps ? x_t1 : Eigen::VectorXd::Zero(x_t1.size()).eval();
    truncation_sq[i] = (x_eps - x_t1).squaredNorm();
    double sup = 0.0;
    for (const auto& state : base.states) sup = std::max(sup, state.norm());
    sup_p[i] = std::pow(sup, spec.p);

    const auto bridge_point = [&](double t) {
      return (((spec.T - t) * x_eps + (t - spec.t1) * spec.y0) / span).eval();
    };
    const auto control = [&](double t, Eigen::VectorXd& h) {
      Eigen::VectorXd b(model.dim_state);
      model.drift(t, bridge_point(t), b);
      h = (spec.y0 - x_eps) / span - b;
    };

    CoefficientSet controlled = model;
    const double t_on = spec.t1 - 1e-12;
    controlled.drift = [&model, &control, t_on](double t, const Eigen::VectorXd& x,
                                                Eigen::VectorXd& out) {
      model.drift(t, x, out);
      if (t >= t_on) {
        Eigen::VectorXd h;
        control(t, h);
        out += h;
      }
    };

    const PathRecord steered = simulate_path(controlled, sim, noise);
    const Eigen::VectorXd y_T = steered.states.back();
    endpoint_sq[i] = (y_T - spec.y0).squaredNorm();
    hit[i] = (y_T - spec.y0).norm() < spec.hit_radius;

    // Log-density of the change of measure, left-point quadrature along
    // the deterministic bridge.
    double log_r = 0.0;
    Eigen::VectorXd h(model.dim_state);
    for (std::size_t k = idx_t1; k + 1 < steered.times.size(); ++k) {
      const double t = steered.times[k];
      const double dt = steered.times[k + 1] - t;
      const LeftInverse inv = left_inverse_sigma(model, t, bridge_point(t));
      if (inv.singular) {
        flagged[i] = 1;
        break;
      }
      control(t, h);
      const Eigen::VectorXd theta = inv.matrix * h;
      log_r -= theta.dot(noise.brownian_increments[k]) + 0.5 * theta.squaredNorm() * dt;
    }
    if (!flagged[i]) {
      if (log_r < -700.0) {
        zero_density[i] = 1;
        density[i] = 0.0;
      } else {
        density[i] = std::exp(log_r);
      }
    }
  });

  ExperimentSummary summary;
  summary.experiment_id = "girsanov";
  summary.n_paths = n;
  summary.seed = cfg.mc.seed;

  std::vector<double> clean_density;
  clean_density.reserve(n);
  std::size_t n_flagged = 0, n_zero = 0, n_hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    n_flagged += flagged[i];
    n_zero += zero_density[i];
    n_hits += hit[i];
    if (!flagged[i]) clean_density.push_back(density[i]);
  }
  if (clean_density.empty()) {
    throw std::runtime_error("run_girsanov_bridge: sigma singular on every path");
  }

  const Estimate mean_r = mean_se(clean_density);
  const Estimate endpoint = mean_se(endpoint_sq);
  summary.estimates.emplace_back("mean_density", mean_r);
  summary.estimates.emplace_back("endpoint_sq_error", endpoint);
  summary.estimates.emplace_back("hit_fraction", binomial_estimate(n_hits, n));
  summary.estimates.emplace_back("flagged_fraction", binomial_estimate(n_flagged, n));
  summary.estimates.emplace_back("zero_density_fraction", binomial_estimate(n_zero, n));

  summary.bound_comparisons.push_back(
      {"martingale_density", mean_r.value, 1.0,
       std::abs(mean_r.value - 1.0) <= 3.0 * mean_r.std_error});

  // Indicative endpoint bound; both sides carry Monte Carlo error.
  const double Cp = std::pow(2.0, spec.p - 1.0);
  const Estimate trunc = mean_se(truncation_sq);
  const Estimate supm = mean_se(sup_p);
  const double f_int = integrate(model.envelope_f, spec.t1, spec.T, 1e-8);
  const double g_int = integrate([&](double s) { return model.envelope_g(s) + 1.0; }, spec.t1,
                                 spec.T, 1e-8);
  const double C = trunc.value +
                   2.0 * (Cp * (supm.value + std::pow(spec.y0.norm(), spec.p)) + 1.0) * f_int;
  const double bound = std::pow(C, std::exp(-2.0 * g_int));
  summary.bound_comparisons.push_back(
      {"endpoint_bound", endpoint.value, bound, endpoint.value <= bound});

  summary.runtime_seconds = watch.seconds();
  return summary;
}

ExperimentSummary run_irreducibility(const CoefficientSet& model,
                                     const IrreducibilityConfig& cfg) {
  if (!(cfg.r > 0.0)) throw std::invalid_argument("run_irreducibility: r must be > 0");
  if (!(cfg.s >= 0.0 && cfg.s < cfg.t)) {
    throw std::invalid_argument("run_irreducibility: need 0 <= s < t");
  }
  if (cfg.y0.size() != cfg.x0.size()) {
    throw std::invalid_argument("run_irreducibility: y0 dimension mismatch");
  }
  Stopwatch watch;

  // Time-homogeneous models run on [0, t - s].
  const double horizon = cfg.t - cfg.s;
  std::vector<char> hit(cfg.mc.n_paths, 0);
  parallel_for_paths(cfg.mc.n_paths, cfg.mc.n_threads, [&](std::size_t i) {
    const NoiseRealization noise =
        make_noise(model.measure, horizon, cfg.mc.n_steps, model.dim_noise, cfg.mc.seed, i);
    SimConfig sim;
    sim.horizon = horizon;
    sim.step_count = cfg.mc.n_steps;
    sim.explosion_radius = cfg.mc.explosion_radius;
    sim.x0 = cfg.x0;
    const PathRecord rec = simulate_path(model, sim, noise);
    hit[i] = !rec.exploded && (rec.states.back() - cfg.y0).norm() < cfg.r;
  });

  std::size_t hits = 0;
  for (char h : hit) hits += h;

  ExperimentSummary summary;
  summary.experiment_id = "irreducibility";
  summary.n_paths = cfg.mc.n_paths;
  summary.seed = cfg.mc.seed;
  summary.estimates.emplace_back("p_hat", binomial_estimate(hits, cfg.mc.n_paths));
  const double lower = clopper_pearson_lower(hits, cfg.mc.n_paths);
  summary.estimates.emplace_back("lower_confidence", Estimate{lower, 0.0});
  summary.bound_comparisons.push_back({"evidence_positive", lower, 0.0, lower > 0.0});

  summary.runtime_seconds = watch.seconds();
  return summary;
}

}  // namespace sdej
