#pragma once

#include <random>
#include <vector>

#include "ams/model.hpp"

namespace testutil {

inline ams::State random_state(std::mt19937_64& gen, std::size_t n, double lo = -1.5, double hi = 1.5) {
  std::uniform_real_distribution<double> u(lo, hi);
  ams::State x(n);
  for (auto& v : x) v = u(gen);
  return x;
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testutil
