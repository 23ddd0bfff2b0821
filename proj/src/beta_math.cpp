#include "rosdyn/beta_math.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rosdyn {

namespace {

// Binomial coefficients up to n = 64, enough for the sharpness levels in use.
// Larger parameters fall back to the log-gamma path.
constexpr int kPascalMax = 64;

const double* pascal_row(int n) {
  static const auto table = [] {
    auto* t = new std::array<std::array<double, kPascalMax + 1>, kPascalMax + 1>();
    for (int i = 0; i <= kPascalMax; ++i) {
      (*t)[i][0] = 1.0;
      for (int k = 1; k <= i; ++k)
        (*t)[i][k] = (*t)[i - 1][k - 1] + (k <= i - 1 ? (*t)[i - 1][k] : 0.0);
    }
    return t;
  }();
  return (*table)[n].data();
}

double ipow(double x, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

double log_factorial(int n) { return std::lgamma(double(n) + 1.0); }

double log_choose(int n, int k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

void check_params(int a, int b) {
  if (a < 1 || b < 1) throw std::invalid_argument("beta parameters must be >= 1");
}

}  // namespace

// I_x(a, b) = P(Binomial(a+b-1, x) >= a). Terms are binomial probabilities,
// all nonnegative, so the upward recurrence has no cancellation.
double beta_cdf(int a, int b, double x) {
  check_params(a, b);
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const int n = a + b - 1;
  double term;
  if (n <= kPascalMax) {
    term = pascal_row(n)[a] * ipow(x, a) * ipow(1.0 - x, n - a);
  } else {
    term = std::exp(log_choose(n, a) + a * std::log(x) + (n - a) * std::log1p(-x));
  }
  double sum = term;
  const double ratio = x / (1.0 - x);
  for (int j = a; j < n; ++j) {
    term *= ratio * double(n - j) / double(j + 1);
    sum += term;
  }
  return sum < 0.0 ? 0.0 : (sum > 1.0 ? 1.0 : sum);
}

double beta_pdf(int a, int b, double x) {
  check_params(a, b);
  if (x < 0.0 || x > 1.0) return 0.0;
  const int n = a + b - 1;
  if (n <= kPascalMax) {
    // norm = (a+b-1)! / ((a-1)!(b-1)!) = a * C(a+b-1, a)
    return double(a) * pascal_row(n)[a] * ipow(x, a - 1) * ipow(1.0 - x, b - 1);
  }
  if (x == 0.0) return a == 1 ? double(b) : 0.0;
  if (x == 1.0) return b == 1 ? double(a) : 0.0;
  const double lognorm = log_factorial(a + b - 1) - log_factorial(a - 1) - log_factorial(b - 1);
  return std::exp(lognorm + (a - 1) * std::log(x) + (b - 1) * std::log1p(-x));
}

// integral_0^x I_u(a,b) du = x I_x(a,b) - mean * I_x(a+1,b), continued
// linearly past the support end.
double beta_cdf_antiderivative(int a, int b, double x) {
  check_params(a, b);
  if (x <= 0.0) return 0.0;
  const double mean = a / double(a + b);
  if (x >= 1.0) return (1.0 - mean) + (x - 1.0);
  return x * beta_cdf(a, b, x) - mean * beta_cdf(a + 1, b, x);
}

double beta_sample(int a, int b, std::mt19937_64& rng) {
  check_params(a, b);
  std::gamma_distribution<double> ga(double(a), 1.0);
  std::gamma_distribution<double> gb(double(b), 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  const double s = x + y;
  return s > 0.0 ? x / s : 0.5;
}

}  // namespace rosdyn
