#include "sdej/model.hpp"

#include "sdej/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace sdej {
namespace {

constexpr double kExpMinus2 = 0.13533528323661270231781372785917;

// Adaptive Simpson on [a,b] with absolute tolerance scaled from the
// caller's relative target.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = rel_tol * std::max(std::abs(whole), 1e-300);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

ModulusSpec ModulusSpec::linear(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("ModulusSpec::linear: c must be > 0");
  return ModulusSpec(Kind::linear, c);
}

ModulusSpec ModulusSpec::xlog(double r) {
  if (!(r > 0.0 && r < kExpMinus2)) {
    throw std::invalid_argument("ModulusSpec::xlog: requires 0 < r < exp(-2)");
  }
  return ModulusSpec(Kind::xlog, r);
}

ModulusSpec ModulusSpec::linear_gamma(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("ModulusSpec::linear_gamma: c must be > 0");
  return ModulusSpec(Kind::linear_gamma, c);
}

double ModulusSpec::eval(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("ModulusSpec::eval: x must be >= 0");
  switch (kind_) {
    case Kind::linear:
    case Kind::linear_gamma:
      return param_ * x;
    case Kind::xlog: {
      if (x == 0.0) return 0.0;  // limit convention
      const double r = param_;
      if (x <= r) return x * std::log(1.0 / x);
      return r * std::log(1.0 / r) + (std::log(1.0 / r) - 1.0) * (x - r);
    }
  }
  return 0.0;
}

double ModulusSpec::min_confluence_constant() const {
  if (kind_ != Kind::linear_gamma) {
    throw std::invalid_argument("min_confluence_constant: only defined for linear_gamma");
  }
  // x*(gamma'(x)+1)/gamma(x) = (c+1)/c for gamma(x) = c*x; K must also exceed 1/2.
  return std::max((param_ + 1.0) / param_, 0.5);
}

TestFunction TestFunction::continuity(double delta, ModulusSpec modulus) {
  if (!(delta > 0.0)) throw std::invalid_argument("TestFunction: delta must be > 0");
  return TestFunction(Variant::continuity, delta, 0.0, modulus);
}

TestFunction TestFunction::confluence(double delta, double c0, ModulusSpec modulus) {
  if (!(delta > 0.0)) throw std::invalid_argument("TestFunction: delta must be > 0");
  if (!(c0 > 0.0)) throw std::invalid_argument("TestFunction: c0 must be > 0");
  return TestFunction(Variant::confluence, delta, c0, modulus);
}

double TestFunction::eval(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("TestFunction::eval: x must be >= 0");
  const bool linear = modulus_.kind() == ModulusSpec::Kind::linear ||
                      modulus_.kind() == ModulusSpec::Kind::linear_gamma;
  const double c = modulus_.parameter();
  if (variant_ == Variant::continuity) {
    if (x == 0.0) return 0.0;
    if (linear) return std::log1p(c * x / delta_) / c;
    return integrate([this](double s) { return 1.0 / (modulus_.eval(s) + delta_); }, 0.0, x,
                     1e-10);
  }
  // Confluence variant: exp of the integral from x to c0 (negative when x > c0).
  if (linear) {
    return std::pow((c * c0_ + delta_) / (c * x + delta_), 1.0 / c);
  }
  const auto integrand = [this](double s) { return 1.0 / (modulus_.eval(s) + delta_); };
  const double integral =
      x <= c0_ ? integrate(integrand, x, c0_, 1e-10) : -integrate(integrand, c0_, x, 1e-10);
  return std::exp(integral);
}

}  // namespace sdej
