#include "sdej/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdej {
namespace {

std::string format_state(double t, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "t=" << t << ", x=(";
  for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

void require_finite(const Eigen::VectorXd& v, const char* what, double t,
                    const Eigen::VectorXd& x) {
  if (!v.allFinite()) throw numeric_error(std::string(what) + " at " + format_state(t, x), t, x);
}

void require_finite(const Eigen::MatrixXd& m, const char* what, double t,
                    const Eigen::VectorXd& x) {
  if (!m.allFinite()) throw numeric_error(std::string(what) + " at " + format_state(t, x), t, x);
}

// Shared single-state stepper; the coupled variant runs two of these
// against one noise realization.
class Stepper {
 public:
  Stepper(const CoefficientSet& model, const SimConfig& cfg) : model_(model), cfg_(cfg) {
    if (model.dim_state != cfg.x0.size()) {
      throw std::invalid_argument("simulate: x0 dimension does not match model dim_state");
    }
    for (std::size_t k = 0; k < model.support_tags.size(); ++k) {
      if (model.support_tags[k] == SupportTag::f1) f1_atoms_.push_back(k);
    }
    has_f1_ = !f1_atoms_.empty() && static_cast<bool>(model.jump_small);
  }

  void drift_with_compensator(double t, const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    model_.drift(t, x, drift_buf_);
    require_finite(drift_buf_, "non-finite drift", t, x);
    out = drift_buf_;
    if (!has_f1_) return;
    // Exact compensator of the f1 integral: sum over f1-tagged atoms.
    for (std::size_t k : f1_atoms_) {
      const auto& atom = model_.measure.atoms()[k];
      if (atom.rate <= 0.0) continue;
      model_.jump_small(t, x, atom.mark, jump_buf_);
      require_finite(jump_buf_, "non-finite f1", t, x);
      out -= atom.rate * jump_buf_;
    }
  }

  void diffuse(double t, const Eigen::VectorXd& x, Eigen::MatrixXd& out) {
    model_.diffusion(t, x, out);
    require_finite(out, "non-finite diffusion", t, x);
    if (out.rows() != model_.dim_state || out.cols() != model_.dim_noise) {
      throw std::invalid_argument("simulate: diffusion has wrong shape");
    }
  }

  // State increment from the jump event's atom, evaluated at the
  // pre-jump state.
  void apply_jump(double t, std::size_t atom_index, Eigen::VectorXd& x) {
    const auto& atom = model_.measure.atoms()[atom_index];
    const SupportTag tag = atom_index < model_.support_tags.size()
                               ? model_.support_tags[atom_index]
                               : SupportTag::none;
    if (tag == SupportTag::f1 && model_.jump_small) {
      model_.jump_small(t, x, atom.mark, jump_buf_);
    } else if (tag == SupportTag::f2 && model_.jump_big) {
      model_.jump_big(t, x, atom.mark, jump_buf_);
    } else {
      return;
    }
    require_finite(jump_buf_, "non-finite jump coefficient", t, x);
    x += jump_buf_;
  }

 private:
  const CoefficientSet& model_;
  const SimConfig& cfg_;
  std::vector<std::size_t> f1_atoms_;
  bool has_f1_ = false;
  Eigen::VectorXd drift_buf_, jump_buf_;
};

struct MergedGrid {
  std::vector<double> times;
  // jump event indices landing on each grid point
  std::vector<std::vector<std::size_t>> events_at;
};

MergedGrid clip_grid(const SimConfig& cfg, const NoiseRealization& noise) {
  if (noise.grid.size() < 1 || noise.horizon() + 1e-12 < cfg.horizon) {
    throw std::invalid_argument("simulate: noise horizon shorter than requested horizon");
  }
  MergedGrid g;
  const double tol = 1e-12 * std::max(1.0, cfg.horizon);
  for (double t : noise.grid) {
    if (t <= cfg.horizon + tol) g.times.push_back(t);
  }
  g.events_at.assign(g.times.size(), {});
  for (std::size_t e = 0; e < noise.jump_events.size(); ++e) {
    const double t = noise.jump_events[e].time;
    if (t > cfg.horizon + tol) continue;
    const auto it = std::lower_bound(g.times.begin(), g.times.end(), t - tol);
    if (it == g.times.end() || std::abs(*it - t) > tol) {
      throw std::invalid_argument("simulate: jump event time missing from noise grid");
    }
    g.events_at[static_cast<std::size_t>(it - g.times.begin())].push_back(e);
  }
  return g;
}

}  // namespace

numeric_error::numeric_error(const std::string& what, double t, Eigen::VectorXd x)
    : std::runtime_error(what), time(t), state(std::move(x)) {}

std::string PathRecord::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const int d = states.empty() ? 0 : static_cast<int>(states.front().size());
  os << "t";
  for (int i = 1; i <= d; ++i) os << ",x_" << i;
  os << ",jump_flag\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << times[i];
    for (int j = 0; j < d; ++j) os << "," << states[i][j];
    os << "," << (jump_markers[i] >= 0 ? 1 : 0) << "\n";
  }
  return os.str();
}

PathRecord simulate_path(const CoefficientSet& model, const SimConfig& cfg,
                         const NoiseRealization& noise) {
  if (model.dim_noise > 0 && !noise.brownian_increments.empty() &&
      noise.brownian_increments.front().size() != model.dim_noise) {
    throw std::invalid_argument("simulate: noise dimension does not match model dim_noise");
  }
  Stepper stepper(model, cfg);
  const MergedGrid grid = clip_grid(cfg, noise);

  PathRecord rec;
  rec.times = grid.times;
  rec.states.reserve(grid.times.size());
  rec.jump_markers.assign(grid.times.size(), -1);

  Eigen::VectorXd x = cfg.x0;
  Eigen::VectorXd mu(model.dim_state);
  Eigen::MatrixXd sigma(model.dim_state, model.dim_noise);
  rec.states.push_back(x);
  bool frozen = x.norm() > cfg.explosion_radius;
  if (frozen) {
    rec.exploded = true;
    rec.explosion_time = grid.times.front();
  }

  for (std::size_t i = 0; i + 1 < grid.times.size(); ++i) {
    if (!frozen) {
      const double t = grid.times[i];
      const double dt = grid.times[i + 1] - grid.times[i];
      stepper.drift_with_compensator(t, x, mu);
      stepper.diffuse(t, x, sigma);
      x += mu * dt + sigma * noise.brownian_increments[i];
      for (std::size_t e : grid.events_at[i + 1]) {
        stepper.apply_jump(grid.times[i + 1], noise.jump_events[e].atom, x);
        rec.jump_markers[i + 1] = static_cast<int>(e);
      }
      if (x.norm() > cfg.explosion_radius) {
        frozen = true;
        rec.exploded = true;
        rec.explosion_time = grid.times[i + 1];
      }
    }
    rec.states.push_back(x);
  }
  return rec;
}

CoupledPair simulate_coupled_pair(const CoefficientSet& model, const SimConfig& cfg,
                                  const NoiseRealization& noise) {
  if (!cfg.y0.has_value()) {
    throw std::invalid_argument("simulate_coupled_pair: cfg.y0 is required");
  }
  SimConfig second = cfg;
  second.x0 = *cfg.y0;
  second.y0.reset();

  CoupledPair pair;
  pair.first = simulate_path(model, cfg, noise);
  pair.second = simulate_path(model, second, noise);

  pair.squared_distance.reserve(pair.first.times.size());
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pair.first.times.size(); ++i) {
    const double xi = (pair.first.states[i] - pair.second.states[i]).squaredNorm();
    pair.squared_distance.push_back(xi);
    min_dist = std::min(min_dist, std::sqrt(xi));
  }
  pair.min_distance = min_dist;
  return pair;
}

LeftInverse left_inverse_sigma(const CoefficientSet& model, double t, const Eigen::VectorXd& x) {
  if (model.dim_noise < model.dim_state) {
    throw std::invalid_argument("left_inverse_sigma: requires dim_noise >= dim_state");
  }
  Eigen::MatrixXd sigma(model.dim_state, model.dim_noise);
  model.diffusion(t, x, sigma);
  require_finite(sigma, "non-finite diffusion", t, x);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma, Eigen::ComputeThinU | Eigen::ComputeThinV);
  constexpr double kSingularTol = 1e-10;
  const auto& sv = svd.singularValues();

  LeftInverse result;
  result.singular = sv.minCoeff() < kSingularTol;
  Eigen::VectorXd inv_sv(sv.size());
  result.squared_norm = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] < kSingularTol) {
      inv_sv[i] = 0.0;
      result.squared_norm = std::numeric_limits<double>::infinity();
    } else {
      inv_sv[i] = 1.0 / sv[i];
      result.squared_norm += inv_sv[i] * inv_sv[i];
    }
  }
  if (result.singular) result.squared_norm = std::numeric_limits<double>::infinity();
  result.matrix = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  return result;
}

}  // namespace sdej
