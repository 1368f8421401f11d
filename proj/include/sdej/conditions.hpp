#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdej/model.hpp"

namespace sdej {

// Deterministic low-discrepancy probe grid inside a ball, with
// adversarial points (origin, axis points, near-origin cluster) where
// degenerate behavior concentrates.
struct SampleGrid {
  std::vector<Eigen::VectorXd> points;
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  std::vector<double> times = {0.0};
  double radius = 0.0;

  static SampleGrid make(int dim, double radius, std::size_t n_points, std::size_t n_pairs,
                         bool include_adversarial = true);
};

struct ConditionWitness {
  Eigen::VectorXd x;
  std::optional<Eigen::VectorXd> y;  // present for pair conditions
  double time = 0.0;
};

struct ConditionReport {
  std::string condition_id;
  double max_residual = 0.0;  // positive means violation
  ConditionWitness witness;
  bool satisfied = false;  // max_residual <= 1e-9
  std::size_t grid_size = 0;
};

struct ConditionParams {
  std::optional<ModulusSpec> modulus;  // required for C3/C9/C10
  double K = 2.0;                      // C10 weight
  double lambda = 4.0;                 // C8 ellipticity bound
  double p = 3.0;                      // C7 growth exponent
  // Envelopes; when unset the model's own g/f are used.
  std::function<double(double)> g;
  std::function<double(double)> f;
};

// Known condition ids: C3, C9, C5, C6, C7, C8, C10, C11 and the
// diagnostic probe LIN. Unknown ids throw std::invalid_argument; C8 on
// a model with dim_noise < dim_state throws as well.
ConditionReport check_condition(const std::string& condition_id, const CoefficientSet& model,
                                const ConditionParams& params, const SampleGrid& grid);

// Residual of a single grid element; exposed so reports can be
// re-verified against their witness.
double condition_residual(const std::string& condition_id, const CoefficientSet& model,
                          const ConditionParams& params, double t, const Eigen::VectorXd& x,
                          const Eigen::VectorXd* y);

}  // namespace sdej
