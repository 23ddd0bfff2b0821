#include "rosdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rosdyn {

namespace {

struct Clamper {
  const std::vector<double>* lower = nullptr;
  const std::vector<double>* upper = nullptr;
  int events = 0;

  void apply(std::vector<double>& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      double lo = lower ? (*lower)[i] : 0.0;
      lo = std::max(lo, 0.0);
      if (m[i] < lo) {
        m[i] = lo;
        ++events;
      }
      if (upper && m[i] > (*upper)[i]) {
        m[i] = (*upper)[i];
        ++events;
      }
    }
  }
};

bool finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void rk4_step(const UtilityEngine& engine, std::vector<double>& m, double h,
              const std::vector<double>& k1) {
  const std::size_t n = m.size();
  std::vector<double> tmp(n);

  for (std::size_t i = 0; i < n; ++i) tmp[i] = std::max(0.0, m[i] + 0.5 * h * k1[i]);
  const auto k2 = engine.utilities(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = std::max(0.0, m[i] + 0.5 * h * k2[i]);
  const auto k3 = engine.utilities(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = std::max(0.0, m[i] + h * k3[i]);
  const auto k4 = engine.utilities(tmp);

  for (std::size_t i = 0; i < n; ++i)
    m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Fehlberg 4(5) coefficients.
constexpr double kB21 = 1.0 / 4.0;
constexpr double kB31 = 3.0 / 32.0, kB32 = 9.0 / 32.0;
constexpr double kB41 = 1932.0 / 2197.0, kB42 = -7200.0 / 2197.0, kB43 = 7296.0 / 2197.0;
constexpr double kB51 = 439.0 / 216.0, kB52 = -8.0, kB53 = 3680.0 / 513.0,
                 kB54 = -845.0 / 4104.0;
constexpr double kB61 = -8.0 / 27.0, kB62 = 2.0, kB63 = -3544.0 / 2565.0,
                 kB64 = 1859.0 / 4104.0, kB65 = -11.0 / 40.0;
constexpr double kC41 = 25.0 / 216.0, kC43 = 1408.0 / 2565.0, kC44 = 2197.0 / 4104.0,
                 kC45 = -1.0 / 5.0;
constexpr double kC51 = 16.0 / 135.0, kC53 = 6656.0 / 12825.0, kC54 = 28561.0 / 56430.0,
                 kC55 = -9.0 / 50.0, kC56 = 2.0 / 55.0;

// One attempted step; returns the scaled error estimate and the 5th-order
// proposal in `out`.
double rkf45_attempt(const UtilityEngine& engine, const std::vector<double>& m, double h,
                     const std::vector<double>& k1, std::vector<double>& out,
                     double abs_tol, double rel_tol) {
  const std::size_t n = m.size();
  std::vector<double> tmp(n);
  auto stage = [&](auto&& fill) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = std::max(0.0, fill(i));
    return engine.utilities(tmp);
  };
  const auto k2 = stage([&](std::size_t i) { return m[i] + h * kB21 * k1[i]; });
  const auto k3 =
      stage([&](std::size_t i) { return m[i] + h * (kB31 * k1[i] + kB32 * k2[i]); });
  const auto k4 = stage(
      [&](std::size_t i) { return m[i] + h * (kB41 * k1[i] + kB42 * k2[i] + kB43 * k3[i]); });
  const auto k5 = stage([&](std::size_t i) {
    return m[i] + h * (kB51 * k1[i] + kB52 * k2[i] + kB53 * k3[i] + kB54 * k4[i]);
  });
  const auto k6 = stage([&](std::size_t i) {
    return m[i] + h * (kB61 * k1[i] + kB62 * k2[i] + kB63 * k3[i] + kB64 * k4[i] +
                       kB65 * k5[i]);
  });

  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y4 = m[i] + h * (kC41 * k1[i] + kC43 * k3[i] + kC44 * k4[i] + kC45 * k5[i]);
    const double y5 = m[i] + h * (kC51 * k1[i] + kC53 * k3[i] + kC54 * k4[i] +
                                  kC55 * k5[i] + kC56 * k6[i]);
    out[i] = y5;
    const double scale = abs_tol + rel_tol * std::max(std::abs(m[i]), std::abs(y5));
    err = std::max(err, std::abs(y5 - y4) / scale);
  }
  return err;
}

}  // namespace

Trajectory integrate(const MarketInstance& inst, std::vector<double> m0,
                     const IntegrateOptions& opt) {
  MarketInstance run = inst;
  if (opt.lambda_override) run.lambda = *opt.lambda_override;
  UtilityEngine engine(std::move(run), opt.quad);
  return integrate(engine, std::move(m0), opt);
}

Trajectory integrate(const UtilityEngine& engine, std::vector<double> m0,
                     const IntegrateOptions& opt) {
  const MarketInstance& inst = engine.instance();
  const std::size_t n = inst.n_bidders();
  if (m0.size() != n) throw std::invalid_argument("m0 length does not match bidder count");
  if (!finite(m0)) throw std::invalid_argument("m0 entries must be finite");
  if (!(opt.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (!(opt.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(opt.sample_every > 0.0)) throw std::invalid_argument("sample_every must be > 0");
  if (opt.lambda_override && inst.lambda != *opt.lambda_override)
    throw std::invalid_argument("lambda_override requires rebuilding the engine");
  for (auto* b : {&opt.lower_bounds, &opt.upper_bounds})
    if (*b && (*b)->size() != n)
      throw std::invalid_argument("bounds length does not match bidder count");

  Trajectory traj;
  traj.bidder_names = inst.bidder_names;
  traj.instance_fingerprint = instance_fingerprint(inst);
  traj.method = opt.method == Method::rk4 ? "rk4" : "rkf45";
  traj.dt = opt.dt;
  traj.sample_every = opt.sample_every;
  traj.abs_tol = opt.abs_tol;
  traj.rel_tol = opt.rel_tol;

  Clamper clamp;
  if (opt.lower_bounds) clamp.lower = &*opt.lower_bounds;
  if (opt.upper_bounds) clamp.upper = &*opt.upper_bounds;

  std::vector<double> m = std::move(m0);
  clamp.apply(m);
  clamp.events = 0;  // projecting m0 into the box is not a clamp event

  const auto record = [&](double t, const std::vector<double>& u) {
    traj.times.push_back(t);
    traj.states.push_back(m);
    if (opt.record_utilities) traj.utilities.push_back(u);
  };

  if (opt.method == Method::rk4) {
    const long steps = std::lround(opt.horizon / opt.dt);
    const long total = std::max<long>(1, steps);
    const long stride = std::max<long>(1, std::lround(opt.sample_every / opt.dt));
    for (long k = 0; k <= total; ++k) {
      const double t = k * opt.dt;
      const auto u = engine.utilities(m);
      if (k % stride == 0 || k == total) record(t, u);
      if (k == total) break;
      rk4_step(engine, m, opt.dt, u);
      clamp.apply(m);
      if (!finite(m)) {
        traj.aborted = true;
        traj.abort_reason = "non-finite state at t = " + std::to_string(t + opt.dt);
        break;
      }
    }
  } else {
    double t = 0.0;
    double next_sample = 0.0;
    double h = std::min(opt.dt, opt.sample_every);
    std::vector<double> proposal(n);
    {
      const auto u = engine.utilities(m);
      record(t, u);
      next_sample += opt.sample_every;
    }
    while (t < opt.horizon) {
      const double target = std::min(next_sample, opt.horizon);
      h = std::min(h, target - t);
      const auto k1 = engine.utilities(m);
      const double err = rkf45_attempt(engine, m, h, k1, proposal, opt.abs_tol, opt.rel_tol);
      if (err <= 1.0 || h <= 1e-12) {
        t += h;
        m = proposal;
        clamp.apply(m);
        if (!finite(m)) {
          traj.aborted = true;
          traj.abort_reason = "non-finite state at t = " + std::to_string(t);
          break;
        }
        if (t >= target - 1e-12) {
          const auto u = engine.utilities(m);
          record(t, u);
          if (target == next_sample) next_sample += opt.sample_every;
        }
      }
      const double factor =
          err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
      h = std::max(h, 1e-12);
    }
  }

  traj.clamp_events = clamp.events;
  return traj;
}

std::vector<double> fundamental_identity_residual(const Trajectory& traj) {
  if (!traj.has_utilities())
    throw std::invalid_argument("residual needs recorded utilities");
  if (traj.n_samples() < 2)
    throw std::invalid_argument("residual needs at least two samples");
  const std::size_t n = traj.states.front().size();
  std::vector<double> integral(n, 0.0);
  for (std::size_t k = 0; k + 1 < traj.n_samples(); ++k) {
    const double half = 0.5 * (traj.times[k + 1] - traj.times[k]);
    for (std::size_t i = 0; i < n; ++i)
      integral[i] += half * (traj.utilities[k][i] + traj.utilities[k + 1][i]);
  }
  std::vector<double> res(n);
  for (std::size_t i = 0; i < n; ++i)
    res[i] = traj.states.back()[i] - traj.states.front()[i] - integral[i];
  return res;
}

}  // namespace rosdyn
