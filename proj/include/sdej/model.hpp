#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sdej/measure.hpp"

namespace sdej {

enum class SupportTag { none, f1, f2 };

// Evaluators for drift b, diffusion sigma and the two jump coefficients,
// together with the jump measure and per-atom support tags. The tags
// encode the disjoint-support requirement: f1 acts only on f1-tagged
// atoms, f2 only on f2-tagged ones.
struct CoefficientSet {
  std::string name;
  int dim_state = 0;
  int dim_noise = 0;

  std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& out)> drift;
  std::function<void(double t, const Eigen::VectorXd& x, Eigen::MatrixXd& out)> diffusion;
  std::function<void(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     Eigen::VectorXd& out)>
      jump_small;  // f1, compensated
  std::function<void(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     Eigen::VectorXd& out)>
      jump_big;  // f2, uncompensated

  JumpMeasure measure;
  std::vector<SupportTag> support_tags;  // one per atom

  bool time_homogeneous = true;

  // Envelope functions of the growth conditions; constant 1 by default.
  std::function<double(double)> envelope_g = [](double) { return 1.0; };
  std::function<double(double)> envelope_f = [](double) { return 1.0; };

  std::map<std::string, double> params;

  bool has_jumps() const { return measure.total_rate() > 0.0; }
};

// Concave gauge replacing a Lipschitz constant:
//   linear(c):        x -> c*x
//   xlog(r):          x -> x*log(1/x) for x <= r, tangent continuation above
//                     (requires 0 < r < exp(-2))
//   linear_gamma(c):  x -> c*x, flagged as a gamma-type modulus; the
//                     associated constant K must satisfy K >= (c+1)/c, K > 1/2
class ModulusSpec {
 public:
  enum class Kind { linear, xlog, linear_gamma };

  static ModulusSpec linear(double c);
  static ModulusSpec xlog(double r);
  static ModulusSpec linear_gamma(double c);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }

  double eval(double x) const;

  // Smallest admissible K for the non-confluence machinery; only
  // meaningful for linear_gamma.
  double min_confluence_constant() const;

 private:
  ModulusSpec(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

// The two integral test functions built on a modulus:
//   continuity:  phi(x) = int_0^x ds / (modulus(s) + delta)
//   confluence:  phi(x) = exp int_x^{c0} ds / (modulus(s) + delta)
// Linear moduli evaluate in closed form; anything else goes through
// adaptive quadrature at relative tolerance 1e-10.
class TestFunction {
 public:
  static TestFunction continuity(double delta, ModulusSpec modulus);
  static TestFunction confluence(double delta, double c0, ModulusSpec modulus);

  double eval(double x) const;
  double delta() const { return delta_; }

 private:
  enum class Variant { continuity, confluence };
  TestFunction(Variant v, double delta, double c0, ModulusSpec m)
      : variant_(v), delta_(delta), c0_(c0), modulus_(m) {}

  Variant variant_;
  double delta_;
  double c0_;
  ModulusSpec modulus_;
};

}  // namespace sdej
