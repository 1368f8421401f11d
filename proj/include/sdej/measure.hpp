#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "sdej/rng.hpp"

namespace sdej {

struct JumpAtom {
  Eigen::VectorXd mark;  // point in the mark space U
  double rate;           // intensity per unit time, >= 0
};

// Finite atomic jump measure. Every integral against it is an exact
// finite sum, and the jump clock is a compound Poisson process.
class JumpMeasure {
 public:
  JumpMeasure() = default;
  explicit JumpMeasure(std::vector<JumpAtom> atoms);

  const std::vector<JumpAtom>& atoms() const { return atoms_; }
  double total_rate() const { return total_rate_; }
  std::size_t size() const { return atoms_.size(); }

  // Sum_k rate_k * integrand(mark_k).
  double integrate(const std::function<double(const Eigen::VectorXd&)>& integrand) const;
  Eigen::VectorXd integrate_vector(
      int dim, const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& integrand) const;

 private:
  std::vector<JumpAtom> atoms_;
  double total_rate_ = 0.0;
};

struct JumpEvent {
  double time;
  std::size_t atom;
};

// Poisson clock of intensity total_rate on (0, horizon]; marks chosen
// proportionally to atom rates. Sorted by time, ties broken by atom index.
std::vector<JumpEvent> sample_jump_events(const JumpMeasure& measure, double horizon,
                                          RngStream& stream);

// Independent centered Gaussian increments, covariance (dt_i) * I_m per interval.
std::vector<Eigen::VectorXd> sample_brownian(const std::vector<double>& grid, int dim_noise,
                                             RngStream& stream);

// One shared draw of driving noise: merged time grid (uniform base grid
// plus exact jump times), per-interval Brownian increments and the jump
// event list. Two coupled solutions consume the same realization.
struct NoiseRealization {
  std::vector<double> grid;
  std::vector<Eigen::VectorXd> brownian_increments;
  std::vector<JumpEvent> jump_events;
  std::uint64_t seed_label = 0;

  double horizon() const { return grid.empty() ? 0.0 : grid.back(); }
};

NoiseRealization make_noise(const JumpMeasure& measure, double horizon, int step_count,
                            int dim_noise, std::uint64_t seed, std::uint64_t path_index,
                            const std::vector<double>& extra_times = {});

}  // namespace sdej
