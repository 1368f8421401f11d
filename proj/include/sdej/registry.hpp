#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdej/model.hpp"

namespace sdej {

// Built-in models:
//   section4  d=m=2 worked example, parameters p in (2,4), K0 >= 4
//   gbm_jump  geometric Brownian motion with one multiplicative f2 atom
//   bm        standard Brownian motion, parameter d
//   ou_jump   Ornstein-Uhlenbeck with a symmetric compensated f1 atom pair
std::vector<std::string> registry_names();

// Unknown names and unknown/out-of-range parameters throw
// std::invalid_argument with the admissible alternatives in the message.
CoefficientSet make_model(const std::string& name, const std::map<std::string, double>& params);

}  // namespace sdej
