#include "sdej/conditions.hpp"

#include <cmath>
#include <stdexcept>

#include "sdej/engine.hpp"

namespace sdej {
namespace {

constexpr double kSatisfactionTol = 1e-9;

double halton(std::size_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  std::size_t i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

Eigen::VectorXd halton_in_ball(std::size_t& index, int dim, double radius, unsigned base_offset) {
  // Rejection from the enclosing cube keeps the sequence deterministic.
  while (true) {
    ++index;
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) {
      x[j] = radius * (2.0 * halton(index, kPrimes[base_offset + j]) - 1.0);
    }
    if (x.norm() <= radius) return x;
  }
}

struct Evaluator {
  const CoefficientSet& model;

  Eigen::MatrixXd sigma(double t, const Eigen::VectorXd& x) const {
    Eigen::MatrixXd s(model.dim_state, model.dim_noise);
    model.diffusion(t, x, s);
    return s;
  }
  Eigen::VectorXd drift(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd b(model.dim_state);
    model.drift(t, x, b);
    return b;
  }
  // f_i at one atom; zero off its tagged support.
  Eigen::VectorXd jump(int which, double t, const Eigen::VectorXd& x, std::size_t atom) const {
    const SupportTag tag =
        atom < model.support_tags.size() ? model.support_tags[atom] : SupportTag::none;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(model.dim_state);
    if (which == 1 && tag == SupportTag::f1 && model.jump_small) {
      model.jump_small(t, x, model.measure.atoms()[atom].mark, out);
    } else if (which == 2 && tag == SupportTag::f2 && model.jump_big) {
      model.jump_big(t, x, model.measure.atoms()[atom].mark, out);
    }
    return out;
  }
};

}  // namespace

SampleGrid SampleGrid::make(int dim, double radius, std::size_t n_points, std::size_t n_pairs,
                            bool include_adversarial) {
  if (dim < 1 || !(radius > 0.0)) {
    throw std::invalid_argument("SampleGrid::make: dim >= 1 and radius > 0 required");
  }
  SampleGrid grid;
  grid.radius = radius;
  std::size_t index = 0;
  for (std::size_t i = 0; i < n_points; ++i) {
    grid.points.push_back(halton_in_ball(index, dim, radius, 0));
  }
  std::size_t pair_index = 0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    Eigen::VectorXd x = halton_in_ball(pair_index, dim, radius, 0);
    Eigen::VectorXd y = halton_in_ball(pair_index, dim, radius, static_cast<unsigned>(dim));
    grid.pairs.emplace_back(std::move(x), std::move(y));
  }
  if (include_adversarial) {
    grid.points.push_back(Eigen::VectorXd::Zero(dim));
    for (int j = 0; j < dim; ++j) {
      for (double s : {1.0, -1.0}) {
        grid.points.push_back(s * radius * Eigen::VectorXd::Unit(dim, j));
        grid.points.push_back(s * 1e-6 * Eigen::VectorXd::Unit(dim, j));
      }
    }
    // Near-diagonal pairs probe the modulus where it degenerates.
    const Eigen::VectorXd tiny = 1e-6 * Eigen::VectorXd::Unit(dim, 0);
    grid.pairs.emplace_back(Eigen::VectorXd::Zero(dim), tiny);
    grid.pairs.emplace_back(radius * Eigen::VectorXd::Unit(dim, 0),
                            radius * Eigen::VectorXd::Unit(dim, 0) - tiny);
  }
  return grid;
}

double condition_residual(const std::string& id, const CoefficientSet& model,
                          const ConditionParams& params, double t, const Eigen::VectorXd& x,
                          const Eigen::VectorXd* y) {
  const Evaluator ev{model};
  const auto g = params.g ? params.g : model.envelope_g;
  const auto f = params.f ? params.f : model.envelope_f;
  const auto& atoms = model.measure.atoms();

  const bool pairwise = (id == "C3" || id == "C9" || id == "C10" || id == "C11");
  if (pairwise && y == nullptr) {
    throw std::invalid_argument("condition_residual: " + id + " needs a pair");
  }

  if (id == "C3" || id == "C9") {
    if (!params.modulus) throw std::invalid_argument(id + ": modulus required");
    const Eigen::VectorXd diff = x - *y;
    const double xi = diff.squaredNorm();
    const double drift_weight = (id == "C3") ? 2.0 : 1.0;
    double lhs = (ev.sigma(t, x) - ev.sigma(t, *y)).squaredNorm() +
                 drift_weight * diff.dot(ev.drift(t, x) - ev.drift(t, *y));
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (atoms[k].rate <= 0.0) continue;
      const Eigen::VectorXd d1 = ev.jump(1, t, x, k) - ev.jump(1, t, *y, k);
      const Eigen::VectorXd d2 = ev.jump(2, t, x, k) - ev.jump(2, t, *y, k);
      lhs += atoms[k].rate *
             (d1.squaredNorm() + d2.squaredNorm() + drift_weight * diff.dot(d2));
    }
    return lhs - g(t) * params.modulus->eval(xi);
  }
  if (id == "C5") {
    double lhs = ev.sigma(t, x).squaredNorm() + 2.0 * x.dot(ev.drift(t, x));
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (atoms[k].rate <= 0.0) continue;
      const Eigen::VectorXd f1 = ev.jump(1, t, x, k);
      const Eigen::VectorXd f2 = ev.jump(2, t, x, k);
      lhs += atoms[k].rate * (f1.squaredNorm() + f2.squaredNorm() + 2.0 * x.dot(f2));
    }
    return lhs - f(t) * (x.squaredNorm() + 1.0);
  }
  if (id == "C6") {
    double lhs = (ev.sigma(t, x).transpose() * x).squaredNorm();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (atoms[k].rate <= 0.0) continue;
      for (int which : {1, 2}) {
        const Eigen::VectorXd fi = ev.jump(which, t, x, k);
        const double inner = 2.0 * x.dot(fi) + fi.squaredNorm();
        lhs += atoms[k].rate * inner * inner;
      }
    }
    const double growth = x.squaredNorm() + 1.0;
    return lhs - f(t) * growth * growth;
  }
  if (id == "C7") {
    double lhs = ev.sigma(t, x).squaredNorm();
    double f2_l1 = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (atoms[k].rate <= 0.0) continue;
      const Eigen::VectorXd f1 = ev.jump(1, t, x, k);
      const Eigen::VectorXd f2 = ev.jump(2, t, x, k);
      lhs += atoms[k].rate * (f1.squaredNorm() + f2.squaredNorm());
      f2_l1 += atoms[k].rate * f2.norm();
    }
    lhs += f2_l1 * f2_l1;
    return lhs - f(t) * (std::pow(x.norm(), params.p) + 1.0);
  }
  if (id == "C8") {
    return left_inverse_sigma(model, t, x).squared_norm - params.lambda;
  }
  if (id == "C10") {
    if (!params.modulus) throw std::invalid_argument("C10: modulus required");
    if (!(params.K > 0.5)) throw std::invalid_argument("C10: K must be > 1/2");
    const Eigen::VectorXd diff = x - *y;
    const double w = 1.0 / (2.0 * params.K - 1.0);
    double lhs = (ev.sigma(t, x) - ev.sigma(t, *y)).squaredNorm() -
                 2.0 * w * diff.dot(ev.drift(t, x) - ev.drift(t, *y));
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (atoms[k].rate <= 0.0) continue;
      const Eigen::VectorXd d1 = ev.jump(1, t, x, k) - ev.jump(1, t, *y, k);
      const Eigen::VectorXd d2 = ev.jump(2, t, x, k) - ev.jump(2, t, *y, k);
      lhs += atoms[k].rate * w *
             (d2.squaredNorm() - d1.squaredNorm() + 2.0 * diff.dot(d2));
    }
    return lhs - params.modulus->eval(diff.squaredNorm());
  }
  if (id == "C11") {
    // Pointwise in u: each atom must keep |df2|^2 + 2<x-y, df2> nonnegative.
    double worst = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (atoms[k].rate <= 0.0) continue;
      const Eigen::VectorXd d2 = ev.jump(2, t, x, k) - ev.jump(2, t, *y, k);
      worst = std::min(worst, d2.squaredNorm() + 2.0 * (x - *y).dot(d2));
    }
    return -worst;
  }
  if (id == "LIN") {
    return ev.sigma(t, x).squaredNorm() / (1.0 + x.squaredNorm());
  }
  throw std::invalid_argument("unknown condition id '" + id +
                              "'; known: C3 C5 C6 C7 C8 C9 C10 C11 LIN");
}

ConditionReport check_condition(const std::string& condition_id, const CoefficientSet& model,
                                const ConditionParams& params, const SampleGrid& grid) {
  const bool pairwise = (condition_id == "C3" || condition_id == "C9" ||
                         condition_id == "C10" || condition_id == "C11");
  if (condition_id == "C8" && model.dim_noise < model.dim_state) {
    throw std::invalid_argument("C8: requires dim_noise >= dim_state");
  }
  const std::vector<double> times =
      model.time_homogeneous ? std::vector<double>{0.0} : grid.times;
  if ((pairwise && grid.pairs.empty()) || (!pairwise && grid.points.empty())) {
    throw std::invalid_argument("check_condition: grid is empty for " + condition_id);
  }

  ConditionReport report;
  report.condition_id = condition_id;
  report.max_residual = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (pairwise) {
      for (const auto& [x, y] : grid.pairs) {
        const double r = condition_residual(condition_id, model, params, t, x, &y);
        if (r > report.max_residual) {
          report.max_residual = r;
          report.witness = {x, y, t};
        }
      }
    } else {
      for (const auto& x : grid.points) {
        const double r = condition_residual(condition_id, model, params, t, x, nullptr);
        if (r > report.max_residual) {
          report.max_residual = r;
          report.witness = {x, std::nullopt, t};
        }
      }
    }
  }
  report.grid_size = (pairwise ? grid.pairs.size() : grid.points.size()) * times.size();
  report.satisfied = condition_id == "LIN" || report.max_residual <= kSatisfactionTol;
  return report;
}

}  // namespace sdej
