#pragma once

#include <vector>

namespace rosdyn {

// Gauss-Legendre rule on [-1, 1]. Nodes are cached per order; computing one
// order is a handful of Newton iterations on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int n);

// Integrates f over [lo, hi] with an n-point rule.
template <typename F>
double integrate_gl(const GaussLegendre& rule, double lo, double hi, F&& f) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return acc * half;
}

}  // namespace rosdyn
