#pragma once

// Integration of the multiplier dynamics dm_i/dt = U_i(m).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rosdyn/market.hpp"
#include "rosdyn/utility.hpp"

namespace rosdyn {

struct Trajectory {
  std::vector<double> times;                    // strictly increasing, starts at 0
  std::vector<std::vector<double>> states;      // one multiplier vector per time
  std::vector<std::vector<double>> utilities;   // empty when not recorded
  std::vector<std::string> bidder_names;
  std::uint64_t instance_fingerprint = 0;
  std::string method;
  double dt = 0.0;
  double sample_every = 0.0;
  double abs_tol = 0.0, rel_tol = 0.0;
  int clamp_events = 0;       // states pushed back to a bound
  bool aborted = false;       // non-finite state encountered
  std::string abort_reason;

  std::size_t n_samples() const { return times.size(); }
  bool has_utilities() const { return !utilities.empty(); }
  const std::vector<double>& final_state() const { return states.back(); }
};

enum class Method { rk4, rkf45 };

struct IntegrateOptions {
  double horizon = 10.0;
  double dt = 0.01;            // rk4 step; initial step for rkf45
  double sample_every = 0.1;
  Method method = Method::rk4;
  double abs_tol = 1e-8, rel_tol = 1e-8;  // rkf45 only
  bool record_utilities = true;
  // Optional per-bidder box used by the simplified circuit mode; states are
  // projected back after each step. The lower clamp at 0 always applies.
  std::optional<std::vector<double>> lower_bounds;
  std::optional<std::vector<double>> upper_bounds;
  QuadratureConfig quad;
  std::optional<double> lambda_override;
};

// Solves dm/dt = U(m) from m(0) = m0 over [0, horizon]. States are recorded
// every `sample_every` time units plus the endpoint. Pure function of its
// arguments: repeated calls are bit-identical.
Trajectory integrate(const MarketInstance& inst, std::vector<double> m0,
                     const IntegrateOptions& opt = {});
Trajectory integrate(const UtilityEngine& engine, std::vector<double> m0,
                     const IntegrateOptions& opt = {});

// m_i(T) - m_i(0) - trapezoid(U_i over the recorded samples); zero for the
// exact flow, so it measures combined integrator plus quadrature error.
std::vector<double> fundamental_identity_residual(const Trajectory& traj);

}  // namespace rosdyn
