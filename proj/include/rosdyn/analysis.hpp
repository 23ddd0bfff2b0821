#pragma once

// Trajectory classification (equilibrium / periodic / quasi-periodic),
// bistability scans, lambda sweeps, coordinate-wise stability and random 2D
// projections.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rosdyn/dynamics.hpp"
#include "rosdyn/market.hpp"

namespace rosdyn::analysis {

struct EquilibriumSettings {
  double eps = 1e-6;     // sup-norm bound on U over the window
  double window = 10.0;  // trailing time span that must stay quiet
};

struct PeriodSettings {
  double burn_in_fraction = 0.5;
  double recurrence_delta = 0.01;  // relative to the orbit diameter
  int min_recurrences = 3;
  double gap_tolerance = 0.02;     // recurrence gaps must agree to 2%
};

struct SpectralSettings {
  double burn_in_fraction = 0.5;
  int max_denominator = 20;      // rationality test p/q, q <= 20
  double ratio_tolerance = 1e-3;
  double peak_floor = 0.01;      // peak power relative to the strongest peak
  double flat_amplitude = 1e-9;  // coordinates below this range are skipped
};

struct OrbitClass {
  enum class Kind { equilibrium, periodic, quasi_periodic, unclassified };
  Kind kind = Kind::unclassified;
  std::vector<double> equilibrium;      // equilibrium only
  double period = 0.0;                  // periodic only
  std::vector<double> amplitude;        // periodic: per-coordinate half-range
  std::vector<double> frequencies;      // quasi-periodic: dominant frequencies
  std::string diagnostics;
};

std::optional<std::vector<double>> detect_equilibrium(const Trajectory& traj,
                                                      const EquilibriumSettings& = {});

std::optional<double> detect_period(const Trajectory& traj, const PeriodSettings& = {});

OrbitClass classify_orbit(const Trajectory& traj, const EquilibriumSettings& = {},
                          const PeriodSettings& = {}, const SpectralSettings& = {});

// True when ratio is within tol of some p/q with 1 <= q <= max_den.
bool has_rational_approximation(double ratio, int max_den, double tol);

// Hann-windowed power spectrum of a detrended signal; returns (frequency,
// power) pairs for the positive bins, with the sample spacing taken from dt.
std::vector<std::pair<double, double>> power_spectrum(const std::vector<double>& signal,
                                                      double dt);

struct Cluster {
  std::vector<double> center;
  int hits = 0;
};

struct BistabilityScan {
  std::vector<Cluster> clusters;        // distinct equilibria
  int n_converged = 0;
  int n_total = 0;
};

// Integrates from seeded uniform starts in [box_lo, box_hi]^n, clusters the
// converged endpoints at `cluster_tol`, and reports hit counts.
BistabilityScan bistability_scan(const MarketInstance& inst, int n_inits, double box_lo,
                                 double box_hi, std::uint64_t seed,
                                 const IntegrateOptions& opt = {},
                                 double cluster_tol = 1e-3);

// Same scan from an explicit start list; the clustering is invariant to the
// order of the starts.
BistabilityScan bistability_scan_from(const MarketInstance& inst,
                                      const std::vector<std::vector<double>>& starts,
                                      const IntegrateOptions& opt = {},
                                      double cluster_tol = 1e-3);

struct LambdaSweepRow {
  double lambda = 0.0;
  double m1_min = 0.0, m1_max = 0.0;  // post burn-in range of the first coordinate
  bool converged = false;
};

std::vector<LambdaSweepRow> lambda_sweep(
    const std::function<MarketInstance(double)>& family, const std::vector<double>& grid,
    double horizon, double burn_in_fraction, std::uint64_t m0_seed,
    const IntegrateOptions& opt = {}, double m0_lo = 1.1, double m0_hi = 3.0);

struct StabilityReport {
  bool stable = false;
  bool is_equilibrium = false;
  std::vector<double> witness_point;  // populated when unstable
  std::size_t witness_coordinate = SIZE_MAX;
  std::string detail;
};

struct StabilitySettings {
  double eps = 0.05;           // perturbation radius
  int samples = 50;
  double exempt_tol = 1e-9;    // coordinates this close to m* are exempt
  double equilibrium_tol = 1e-6;
  std::uint64_t seed = 1;
};

// Coordinate-wise stability: for sampled points in the eps-ball around m*
// (intersected with [1, inf)^n and the optional bounds), every non-exempt
// coordinate's derivative must point back toward m*. The equilibrium
// precondition uses one-sided axis derivatives so that boundary and sliding
// equilibria of the discontinuous circuit dynamics qualify.
StabilityReport check_coordinatewise_stability(
    const MarketInstance& inst, const std::vector<double>& m_star,
    const StabilitySettings& settings = {},
    const std::optional<std::vector<double>>& lower_bounds = std::nullopt,
    const std::optional<std::vector<double>>& upper_bounds = std::nullopt,
    const QuadratureConfig& quad = {});

struct Projection2D {
  std::vector<std::array<double, 2>> points;
  std::vector<double> row_x, row_y;  // the 2 x n projection matrix
};

Projection2D random_projection(const Trajectory& traj, std::uint64_t seed);
Projection2D project(const Trajectory& traj, const std::vector<double>& row_x,
                     const std::vector<double>& row_y);

const char* kind_name(OrbitClass::Kind kind);

}  // namespace rosdyn::analysis
