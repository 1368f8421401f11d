#include "sdej/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdej {

JumpMeasure::JumpMeasure(std::vector<JumpAtom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& atom : atoms_) {
    if (!(atom.rate >= 0.0)) {
      throw std::invalid_argument("JumpMeasure: atom rate must be nonnegative");
    }
    total_rate_ += atom.rate;
  }
}

double JumpMeasure::integrate(
    const std::function<double(const Eigen::VectorXd&)>& integrand) const {
  double sum = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.rate > 0.0) sum += atom.rate * integrand(atom.mark);
  }
  return sum;
}

Eigen::VectorXd JumpMeasure::integrate_vector(
    int dim,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& integrand) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd value(dim);
  for (const auto& atom : atoms_) {
    if (atom.rate > 0.0) {
      integrand(atom.mark, value);
      sum += atom.rate * value;
    }
  }
  return sum;
}

std::vector<JumpEvent> sample_jump_events(const JumpMeasure& measure, double horizon,
                                          RngStream& stream) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_jump_events: horizon must be > 0");
  std::vector<JumpEvent> events;
  const double total = measure.total_rate();
  if (total <= 0.0) return events;

  // Exact exponential inter-arrival times; no per-cell Bernoulli bias.
  double t = stream.exponential(total);
  while (t <= horizon) {
    const double u = stream.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = measure.size() - 1;
    for (std::size_t k = 0; k < measure.size(); ++k) {
      acc += measure.atoms()[k].rate;
      if (u <= acc && measure.atoms()[k].rate > 0.0) {
        chosen = k;
        break;
      }
    }
    events.push_back({t, chosen});
    t += stream.exponential(total);
  }
  std::sort(events.begin(), events.end(), [](const JumpEvent& a, const JumpEvent& b) {
    return a.time != b.time ? a.time < b.time : a.atom < b.atom;
  });
  return events;
}

std::vector<Eigen::VectorXd> sample_brownian(const std::vector<double>& grid, int dim_noise,
                                             RngStream& stream) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("sample_brownian: grid must be strictly increasing");
    }
  }
  std::vector<Eigen::VectorXd> increments;
  if (grid.size() < 2) return increments;
  increments.reserve(grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double sd = std::sqrt(grid[i + 1] - grid[i]);
    Eigen::VectorXd dB(dim_noise);
    for (int j = 0; j < dim_noise; ++j) dB[j] = sd * stream.normal();
    increments.push_back(std::move(dB));
  }
  return increments;
}

NoiseRealization make_noise(const JumpMeasure& measure, double horizon, int step_count,
                            int dim_noise, std::uint64_t seed, std::uint64_t path_index,
                            const std::vector<double>& extra_times) {
  if (!(horizon > 0.0)) throw std::invalid_argument("make_noise: horizon must be > 0");
  if (step_count < 1) throw std::invalid_argument("make_noise: step_count must be >= 1");

  NoiseRealization noise;
  noise.seed_label = seed;

  // Jump times come from their own stream, so refining the base grid
  // leaves the event list untouched.
  RngStream jump_stream(seed, path_index, StreamRole::jumps);
  noise.jump_events = sample_jump_events(measure, horizon, jump_stream);

  noise.grid.reserve(static_cast<std::size_t>(step_count) + noise.jump_events.size() + 1);
  for (int i = 0; i <= step_count; ++i) {
    noise.grid.push_back(horizon * static_cast<double>(i) / static_cast<double>(step_count));
  }
  for (const auto& ev : noise.jump_events) noise.grid.push_back(ev.time);
  for (double t : extra_times) {
    if (t > 0.0 && t < horizon) noise.grid.push_back(t);
  }
  std::sort(noise.grid.begin(), noise.grid.end());
  // Deduplicate at relative tolerance 1e-12 on the horizon scale.
  const double tol = 1e-12 * horizon;
  noise.grid.erase(std::unique(noise.grid.begin(), noise.grid.end(),
                               [tol](double a, double b) { return b - a <= tol; }),
                   noise.grid.end());

  RngStream brownian_stream(seed, path_index, StreamRole::brownian);
  noise.brownian_increments = sample_brownian(noise.grid, dim_noise, brownian_stream);
  return noise;
}

}  // namespace sdej
