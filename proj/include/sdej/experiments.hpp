#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sdej/engine.hpp"
#include "sdej/model.hpp"

namespace sdej {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct BoundComparison {
  std::string name;
  double empirical = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

struct ExperimentSummary {
  std::string experiment_id;
  std::vector<std::pair<std::string, Estimate>> estimates;
  std::vector<BoundComparison> bound_comparisons;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;

  const Estimate& at(const std::string& name) const;
  const BoundComparison& bound(const std::string& name) const;
};

// Shared Monte Carlo knobs. n_threads <= 0 picks the hardware count;
// results are invariant under the choice.
struct McConfig {
  std::size_t n_paths = 1000;
  int n_steps = 1000;
  std::uint64_t seed = 0;
  int n_threads = 0;
  double explosion_radius = 1e6;
};

// --- stochastic continuity -------------------------------------------------

struct ContinuityConfig {
  Eigen::VectorXd x;
  std::vector<Eigen::VectorXd> ys;  // ladder of nearby initial values
  double t = 1.0;
  double eps_dist = 0.5;
  double delta = 0.0;  // <= 0 means use |x - y| per rung
  ModulusSpec modulus = ModulusSpec::linear(1.0);
  McConfig mc;
};

// Coupled-pair exceedance probabilities down the ladder, each compared
// against (delta + C_t) / phi_delta(eps^2) with C_t the integral of the
// g envelope. Estimates: p_hat[k], bound comparisons: exceedance[k].
// The alternative inverse-function reading of the bound is emitted as
// estimate bound_inverse_reading[k] for transparency.
ExperimentSummary run_continuity(const CoefficientSet& model, const ContinuityConfig& cfg);

// --- non-confluence --------------------------------------------------------

struct NonconfluenceConfig {
  Eigen::VectorXd x0, y0;
  double T = 1.0;
  double K = 2.0;
  ModulusSpec gamma = ModulusSpec::linear_gamma(1.0);
  double delta = 1e-4;
  McConfig mc;
};

// Min coupled distance before tau (distance doubled) and tau_R, the
// fraction of paths below 1e-2/1e-4/1e-6, and E[phi_delta(xi_stopped)]
// against the Gronwall bound phi_delta(|x0-y0|^2) * exp((2K-1)T).
ExperimentSummary run_nonconfluence(const CoefficientSet& model, const NonconfluenceConfig& cfg);

// --- maximal-process moments ----------------------------------------------

struct MomentsConfig {
  Eigen::VectorXd x0;
  double p = 2.0;  // must lie in [2, 4)
  double t = 1.0;
  McConfig mc;
};

ExperimentSummary run_moments(const CoefficientSet& model, const MomentsConfig& cfg);

// --- Girsanov bridge -------------------------------------------------------

struct BridgeSpec {
  double t1 = 0.5;
  double T = 1.0;
  Eigen::VectorXd y0;
  double eps = 1e-6;  // truncation: X^eps = X * 1_{|X| <= 1/eps}
  double hit_radius = 0.5;
  double p = 2.0;  // moment exponent entering the endpoint bound
};

struct GirsanovConfig {
  Eigen::VectorXd x0;
  BridgeSpec spec;
  McConfig mc;
};

// Controlled simulation with the bridge drift h^eps on (t1, T] and the
// stochastic-exponential density accumulated in log space. Reports
// mean_R, endpoint_sq_error, hit_fraction, singular/zero-density path
// fractions and the indicative endpoint bound.
ExperimentSummary run_girsanov_bridge(const CoefficientSet& model, const GirsanovConfig& cfg);

// --- irreducibility evidence ----------------------------------------------

struct IrreducibilityConfig {
  Eigen::VectorXd x0, y0;
  double r = 0.5;
  double s = 0.0;
  double t = 1.0;
  McConfig mc;
};

// Fraction of paths ending in B(y0, r) at time t, with a
// Clopper-Pearson lower confidence bound. Evidence of irreducibility,
// not a proof: PASS means at least one hit.
ExperimentSummary run_irreducibility(const CoefficientSet& model, const IrreducibilityConfig& cfg);

}  // namespace sdej
