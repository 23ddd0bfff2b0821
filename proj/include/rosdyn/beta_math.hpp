#pragma once

// Beta(a, b) distribution math for integer a, b >= 1. With integer
// parameters the regularized incomplete beta reduces to a binomial tail sum,
// so CDFs stay polynomial and evaluations are exact up to rounding.

#include <cstdint>
#include <random>

namespace rosdyn {

// Regularized incomplete beta I_x(a, b) = P(Beta(a,b) <= x), a, b >= 1.
double beta_cdf(int a, int b, double x);

// Density of Beta(a, b) at x in [0, 1].
double beta_pdf(int a, int b, double x);

// Antiderivative of the CDF: integral of I_u(a,b) du from 0 to x, x >= 0.
// Saturates to (x - mean) + const for x >= 1.
double beta_cdf_antiderivative(int a, int b, double x);

// One draw from Beta(a, b) via two gamma variates.
double beta_sample(int a, int b, std::mt19937_64& rng);

}  // namespace rosdyn
