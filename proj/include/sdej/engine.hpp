#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdej/model.hpp"

namespace sdej {

// A coefficient evaluation produced NaN/Inf; carries the offending (t, x).
class numeric_error : public std::runtime_error {
 public:
  numeric_error(const std::string& what, double t, Eigen::VectorXd x);
  double time;
  Eigen::VectorXd state;
};

struct SimConfig {
  double horizon = 1.0;
  int step_count = 1000;
  double explosion_radius = 1e6;
  Eigen::VectorXd x0;
  std::optional<Eigen::VectorXd> y0;  // second initial value for coupled runs
  std::uint64_t seed = 0;
};

struct PathRecord {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  // Jump event index applied when stepping onto times[i], or -1.
  std::vector<int> jump_markers;
  bool exploded = false;
  double explosion_time = std::numeric_limits<double>::quiet_NaN();

  // CSV with mandatory header t,x_1,...,x_d,jump_flag.
  std::string to_csv() const;
};

PathRecord simulate_path(const CoefficientSet& model, const SimConfig& cfg,
                         const NoiseRealization& noise);

struct CoupledPair {
  PathRecord first;
  PathRecord second;
  std::vector<double> squared_distance;  // xi on the merged grid
  double min_distance = 0.0;             // min over the grid of |X(x)-X(y)|
};

// Both solutions consume the identical noise realization (synchronous
// coupling); the squared-distance process rides along.
CoupledPair simulate_coupled_pair(const CoefficientSet& model, const SimConfig& cfg,
                                  const NoiseRealization& noise);

struct LeftInverse {
  Eigen::MatrixXd matrix;   // m x d minimal-norm left inverse
  double squared_norm = 0;  // squared Hilbert-Schmidt norm
  bool singular = false;    // smallest singular value < 1e-10
};

// Left inverse of sigma(t, x) via SVD; a singular sigma is flagged, not
// thrown, so ellipticity failures can be reported.
LeftInverse left_inverse_sigma(const CoefficientSet& model, double t, const Eigen::VectorXd& x);

}  // namespace sdej
