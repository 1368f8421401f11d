#include "sdej/registry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdej {
namespace {

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  params.erase(it);
  return v;
}

void reject_leftovers(const std::map<std::string, double>& params, const std::string& model) {
  if (params.empty()) return;
  std::ostringstream msg;
  msg << "unknown parameter(s) for model '" << model << "':";
  for (const auto& [k, v] : params) msg << " " << k;
  throw std::invalid_argument(msg.str());
}

CoefficientSet make_section4(std::map<std::string, double> params) {
  const double p = take(params, "p", 3.0);
  const double K0 = take(params, "K0", 4.0);
  reject_leftovers(params, "section4");
  if (!(p > 2.0 && p < 4.0)) throw std::invalid_argument("section4: p must lie in (2,4)");
  if (!(K0 >= 4.0)) throw std::invalid_argument("section4: K0 must be >= 4");

  CoefficientSet model;
  model.name = "section4";
  model.dim_state = 2;
  model.dim_noise = 2;
  model.params = {{"p", p}, {"K0", K0}};
  model.drift = [K0, p](double, const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    out = -K0 * (1.0 + std::pow(x.norm(), p - 2.0)) * x;
  };
  model.diffusion = [p](double, const Eigen::VectorXd& x, Eigen::MatrixXd& out) {
    const double n = x.norm();
    const double a = 1.0 + std::pow(n, 0.5 * p - 1.0);
    out.resize(2, 2);
    out(0, 0) = x[0] / (1.0 + n);
    out(0, 1) = x[1] / (1.0 + n);
    out(1, 0) = -a * x[1];
    out(1, 1) = a * x[0];
  };
  return model;
}

CoefficientSet make_gbm_jump(std::map<std::string, double> params) {
  const double mu = take(params, "mu", 0.1);
  const double s = take(params, "s", 0.2);
  const double c = take(params, "c", 0.5);
  const double lambda = take(params, "lambda", 1.0);
  reject_leftovers(params, "gbm_jump");
  if (!(lambda >= 0.0)) throw std::invalid_argument("gbm_jump: lambda must be >= 0");

  CoefficientSet model;
  model.name = "gbm_jump";
  model.dim_state = 1;
  model.dim_noise = 1;
  model.params = {{"mu", mu}, {"s", s}, {"c", c}, {"lambda", lambda}};
  model.drift = [mu](double, const Eigen::VectorXd& x, Eigen::VectorXd& out) { out = mu * x; };
  model.diffusion = [s](double, const Eigen::VectorXd& x, Eigen::MatrixXd& out) {
    out.resize(1, 1);
    out(0, 0) = s * x[0];
  };
  model.jump_big = [c](double, const Eigen::VectorXd& x, const Eigen::VectorXd&,
                       Eigen::VectorXd& out) { out = c * x; };
  model.measure = JumpMeasure({{Eigen::VectorXd::Ones(1), lambda}});
  model.support_tags = {SupportTag::f2};
  return model;
}

CoefficientSet make_bm(std::map<std::string, double> params) {
  const int d = static_cast<int>(take(params, "d", 1.0));
  reject_leftovers(params, "bm");
  if (d < 1) throw std::invalid_argument("bm: d must be >= 1");

  CoefficientSet model;
  model.name = "bm";
  model.dim_state = d;
  model.dim_noise = d;
  model.params = {{"d", static_cast<double>(d)}};
  model.drift = [d](double, const Eigen::VectorXd&, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Zero(d);
  };
  model.diffusion = [d](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out = Eigen::MatrixXd::Identity(d, d);
  };
  return model;
}

CoefficientSet make_ou_jump(std::map<std::string, double> params) {
  const double theta = take(params, "theta", 1.0);
  const double s = take(params, "s", 0.3);
  const double a = take(params, "a", 0.5);
  const double lambda = take(params, "lambda", 1.0);
  reject_leftovers(params, "ou_jump");
  if (!(lambda >= 0.0)) throw std::invalid_argument("ou_jump: lambda must be >= 0");

  CoefficientSet model;
  model.name = "ou_jump";
  model.dim_state = 1;
  model.dim_noise = 1;
  model.params = {{"theta", theta}, {"s", s}, {"a", a}, {"lambda", lambda}};
  model.drift = [theta](double, const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    out = -theta * x;
  };
  model.diffusion = [s](double, const Eigen::VectorXd&, Eigen::MatrixXd& out) {
    out.resize(1, 1);
    out(0, 0) = s;
  };
  // Additive compensated jumps; the symmetric atom pair makes the
  // compensator drift correction vanish identically.
  model.jump_small = [](double, const Eigen::VectorXd&, const Eigen::VectorXd& u,
                        Eigen::VectorXd& out) { out = u; };
  Eigen::VectorXd up(1), down(1);
  up << a;
  down << -a;
  model.measure = JumpMeasure({{up, lambda}, {down, lambda}});
  model.support_tags = {SupportTag::f1, SupportTag::f1};
  return model;
}

}  // namespace

std::vector<std::string> registry_names() {
  return {"bm", "gbm_jump", "ou_jump", "section4"};
}

CoefficientSet make_model(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "section4") return make_section4(params);
  if (name == "gbm_jump") return make_gbm_jump(params);
  if (name == "bm") return make_bm(params);
  if (name == "ou_jump") return make_ou_jump(params);
  std::ostringstream msg;
  msg << "unknown model '" << name << "'; available models:";
  for (const auto& n : registry_names()) msg << " " << n;
  throw std::invalid_argument(msg.str());
}

}  // namespace sdej
