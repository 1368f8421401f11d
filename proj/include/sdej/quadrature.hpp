#pragma once

#include <functional>

namespace sdej {

// Adaptive Simpson quadrature of f on [a, b] at the given relative
// tolerance. Returns 0 when b <= a.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

}  // namespace sdej
