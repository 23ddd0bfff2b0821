#include "rosdyn/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rosdyn/rng.hpp"

namespace rosdyn::analysis {

namespace {

std::size_t first_index_at_or_after(const std::vector<double>& times, double t) {
  return std::lower_bound(times.begin(), times.end(), t) - times.begin();
}

double orbit_diameter(const std::vector<std::vector<double>>& states, std::size_t from) {
  // Bounding-box diagonal; cheap and good enough as a recurrence scale.
  if (from >= states.size()) return 0.0;
  const std::size_t n = states.front().size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double lo = states[from][i], hi = lo;
    for (std::size_t k = from; k < states.size(); ++k) {
      lo = std::min(lo, states[k][i]);
      hi = std::max(hi, states[k][i]);
    }
    acc += (hi - lo) * (hi - lo);
  }
  return std::sqrt(acc);
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / double(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

struct Peak {
  double frequency = 0.0;
  double power = 0.0;
};

// Local maxima of the spectrum above `floor_rel` of the strongest peak,
// refined by parabolic interpolation of log power.
std::vector<Peak> find_peaks(const std::vector<std::pair<double, double>>& spec,
                             double floor_rel) {
  std::vector<Peak> peaks;
  double top = 0.0;
  for (std::size_t k = 1; k + 1 < spec.size(); ++k) top = std::max(top, spec[k].second);
  if (top <= 0.0) return peaks;
  for (std::size_t k = 1; k + 1 < spec.size(); ++k) {
    const double p = spec[k].second;
    if (p < floor_rel * top) continue;
    if (p <= spec[k - 1].second || p < spec[k + 1].second) continue;
    const double l0 = std::log(std::max(spec[k - 1].second, 1e-300));
    const double l1 = std::log(std::max(p, 1e-300));
    const double l2 = std::log(std::max(spec[k + 1].second, 1e-300));
    const double denom = l0 - 2.0 * l1 + l2;
    double shift = 0.0;
    if (denom < 0.0) shift = std::clamp(0.5 * (l0 - l2) / denom, -0.5, 0.5);
    const double df = spec[1].first - spec[0].first;
    peaks.push_back({spec[k].first + shift * df, p});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.power > b.power; });
  return peaks;
}

}  // namespace

std::vector<std::pair<double, double>> power_spectrum(const std::vector<double>& signal,
                                                      double dt) {
  if (signal.size() < 8) throw std::invalid_argument("signal too short for a spectrum");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const std::size_t n = signal.size();
  double mean = 0.0;
  for (double x : signal) mean += x;
  mean /= double(n);

  std::size_t padded = 1;
  while (padded < n) padded <<= 1;
  std::vector<std::complex<double>> buf(padded, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(k) / double(n - 1));
    buf[k] = (signal[k] - mean) * hann;
  }
  fft(buf);

  std::vector<std::pair<double, double>> out;
  out.reserve(padded / 2);
  for (std::size_t k = 0; k < padded / 2; ++k)
    out.emplace_back(double(k) / (double(padded) * dt), std::norm(buf[k]));
  return out;
}

bool has_rational_approximation(double ratio, int max_den, double tol) {
  for (int q = 1; q <= max_den; ++q) {
    const double p = std::round(ratio * q);
    if (std::abs(ratio - p / q) <= tol) return true;
  }
  return false;
}

std::optional<std::vector<double>> detect_equilibrium(const Trajectory& traj,
                                                      const EquilibriumSettings& s) {
  if (!traj.has_utilities())
    throw std::invalid_argument("detect_equilibrium needs recorded utilities");
  if (traj.times.empty() || traj.times.back() - traj.times.front() < s.window)
    throw std::invalid_argument("trajectory shorter than the detection window");
  const std::size_t from = first_index_at_or_after(traj.times, traj.times.back() - s.window);
  for (std::size_t k = from; k < traj.n_samples(); ++k)
    for (double u : traj.utilities[k])
      if (std::abs(u) > s.eps) return std::nullopt;
  return traj.states.back();
}

std::optional<double> detect_period(const Trajectory& traj, const PeriodSettings& s) {
  if (traj.n_samples() < 8) return std::nullopt;
  const double t0 = traj.times.front();
  const double span = traj.times.back() - t0;
  const std::size_t from = first_index_at_or_after(traj.times, t0 + s.burn_in_fraction * span);
  if (from + 4 >= traj.n_samples()) return std::nullopt;

  const double diam = orbit_diameter(traj.states, from);
  if (diam <= 0.0) return std::nullopt;  // constant tail; not a periodic orbit
  const double thr2 = (s.recurrence_delta * diam) * (s.recurrence_delta * diam);
  const std::vector<double>& ref = traj.states[from];

  // Leave the reference neighborhood first, then record one refined
  // recurrence time per re-entry.
  std::vector<double> rec_times;
  bool inside = true;
  double best_d2 = 0.0, best_t = 0.0;
  std::size_t best_k = 0;
  for (std::size_t k = from + 1; k < traj.n_samples(); ++k) {
    const double d2 = dist2(traj.states[k], ref);
    if (inside) {
      if (d2 >= thr2) inside = false;
      continue;
    }
    if (d2 < thr2) {
      inside = true;
      best_d2 = d2;
      best_t = traj.times[k];
      best_k = k;
      while (k + 1 < traj.n_samples()) {
        const double nd2 = dist2(traj.states[k + 1], ref);
        if (nd2 >= thr2) break;
        ++k;
        if (nd2 < best_d2) {
          best_d2 = nd2;
          best_t = traj.times[k];
          best_k = k;
        }
      }
      // Parabolic refinement of the squared distance around the minimum.
      if (best_k > from && best_k + 1 < traj.n_samples()) {
        const double dm = dist2(traj.states[best_k - 1], ref);
        const double dp = dist2(traj.states[best_k + 1], ref);
        const double denom = dm - 2.0 * best_d2 + dp;
        if (denom > 0.0) {
          const double h = traj.times[best_k + 1] - traj.times[best_k];
          best_t += std::clamp(0.5 * (dm - dp) / denom, -0.5, 0.5) * h;
        }
      }
      rec_times.push_back(best_t);
    }
  }

  if (int(rec_times.size()) < s.min_recurrences) return std::nullopt;
  std::vector<double> gaps;
  double prev = traj.times[from];
  for (double t : rec_times) {
    gaps.push_back(t - prev);
    prev = t;
  }
  double lo = gaps.front(), hi = gaps.front(), sum = 0.0;
  for (double g : gaps) {
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    sum += g;
  }
  if (lo <= 0.0 || hi > lo * (1.0 + s.gap_tolerance)) return std::nullopt;
  return sum / double(gaps.size());
}

OrbitClass classify_orbit(const Trajectory& traj, const EquilibriumSettings& es,
                          const PeriodSettings& ps, const SpectralSettings& ss) {
  OrbitClass out;
  if (auto eq = detect_equilibrium(traj, es)) {
    out.kind = OrbitClass::Kind::equilibrium;
    out.equilibrium = *eq;
    out.diagnostics = "sup-norm of U within eps over the trailing window";
    return out;
  }
  if (auto period = detect_period(traj, ps)) {
    out.kind = OrbitClass::Kind::periodic;
    out.period = *period;
    const std::size_t from = first_index_at_or_after(
        traj.times, traj.times.front() + ps.burn_in_fraction *
                                             (traj.times.back() - traj.times.front()));
    const std::size_t n = traj.states.front().size();
    out.amplitude.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double lo = traj.states[from][i], hi = lo;
      for (std::size_t k = from; k < traj.n_samples(); ++k) {
        lo = std::min(lo, traj.states[k][i]);
        hi = std::max(hi, traj.states[k][i]);
      }
      out.amplitude[i] = 0.5 * (hi - lo);
    }
    out.diagnostics = "consistent state recurrences";
    return out;
  }

  // Quasi-periodicity: bounded orbit, no recurrence period, and two dominant
  // spectral peaks (pooled across coordinates) with an incommensurate ratio.
  // Peaks are pooled because a motif with no incoming edges settles on a
  // plain cycle, so individual coordinates may stay single-frequency while
  // the full orbit traces a torus.
  const std::size_t nsmp = traj.n_samples();
  const std::size_t n = traj.states.front().size();
  const double span = traj.times.back() - traj.times.front();
  const std::size_t from =
      first_index_at_or_after(traj.times, traj.times.front() + ss.burn_in_fraction * span);
  if (nsmp < 32 || from + 16 >= nsmp) {
    out.diagnostics = "too short for spectral analysis";
    return out;
  }

  bool bounded = true;
  for (std::size_t k = from; k < nsmp && bounded; ++k)
    for (double x : traj.states[k])
      if (!std::isfinite(x) || std::abs(x) > 1e3) {
        bounded = false;
        break;
      }
  if (!bounded) {
    out.diagnostics = "orbit unbounded";
    return out;
  }

  const double dt_s = (traj.times.back() - traj.times[from]) / double(nsmp - 1 - from);
  std::vector<Peak> pooled;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sig;
    sig.reserve(nsmp - from);
    double lo = traj.states[from][i], hi = lo;
    for (std::size_t k = from; k < nsmp; ++k) {
      sig.push_back(traj.states[k][i]);
      lo = std::min(lo, sig.back());
      hi = std::max(hi, sig.back());
    }
    if (hi - lo < ss.flat_amplitude) continue;
    const auto spec = power_spectrum(sig, dt_s);
    auto peaks = find_peaks(spec, ss.peak_floor);
    if (peaks.size() > 4) peaks.resize(4);
    pooled.insert(pooled.end(), peaks.begin(), peaks.end());
  }

  // Cluster pooled peaks that agree within one frequency bin.
  std::sort(pooled.begin(), pooled.end(),
            [](const Peak& a, const Peak& b) { return a.power > b.power; });
  const double bin = 1.0 / (double(nsmp - from) * dt_s);
  std::vector<Peak> distinct;
  for (const auto& p : pooled) {
    bool merged = false;
    for (auto& d : distinct)
      if (std::abs(d.frequency - p.frequency) < 1.5 * bin) {
        d.power += p.power;
        merged = true;
        break;
      }
    if (!merged) distinct.push_back(p);
    if (distinct.size() >= 8) break;
  }

  for (std::size_t i = 0; i < distinct.size(); ++i) {
    for (std::size_t j = i + 1; j < distinct.size(); ++j) {
      const double fa = std::max(distinct[i].frequency, distinct[j].frequency);
      const double fb = std::min(distinct[i].frequency, distinct[j].frequency);
      if (fb <= 0.0) continue;
      if (!has_rational_approximation(fb / fa, ss.max_denominator, ss.ratio_tolerance)) {
        out.kind = OrbitClass::Kind::quasi_periodic;
        out.frequencies = {fa, fb};
        out.diagnostics = "two dominant incommensurate frequencies; no recurrence period";
        return out;
      }
    }
  }
  out.diagnostics = distinct.size() < 2 ? "fewer than two dominant frequencies"
                                        : "dominant frequency ratios near rational";
  return out;
}

BistabilityScan bistability_scan(const MarketInstance& inst, int n_inits, double box_lo,
                                 double box_hi, std::uint64_t seed,
                                 const IntegrateOptions& opt, double cluster_tol) {
  if (n_inits < 1) throw std::invalid_argument("bistability scan needs n_inits >= 1");
  const std::size_t n = inst.n_bidders();
  auto rng = make_rng(derive_seed(seed, "bistability-scan"));
  std::uniform_real_distribution<double> dist(box_lo, box_hi);
  std::vector<std::vector<double>> starts(n_inits, std::vector<double>(n));
  for (auto& s : starts)
    for (auto& x : s) x = dist(rng);
  return bistability_scan_from(inst, starts, opt, cluster_tol);
}

BistabilityScan bistability_scan_from(const MarketInstance& inst,
                                      const std::vector<std::vector<double>>& starts,
                                      const IntegrateOptions& opt, double cluster_tol) {
  const std::size_t n = inst.n_bidders();
  const int n_inits = int(starts.size());
  std::vector<std::optional<std::vector<double>>> endpoints(n_inits);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int k = 0; k < n_inits; ++k) {
    const auto traj = integrate(inst, starts[k], opt);
    endpoints[k] = detect_equilibrium(traj);
  }

  BistabilityScan out;
  out.n_total = n_inits;
  std::vector<std::vector<double>> converged;
  for (auto& e : endpoints)
    if (e) {
      converged.push_back(std::move(*e));
      ++out.n_converged;
    }
  // Sorting first makes the clustering invariant to the start order.
  std::sort(converged.begin(), converged.end());
  for (const auto& p : converged) {
    bool placed = false;
    for (auto& c : out.clusters) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(p[i] - c.center[i]));
      if (d <= cluster_tol) {
        ++c.hits;
        placed = true;
        break;
      }
    }
    if (!placed) out.clusters.push_back({p, 1});
  }
  return out;
}

std::vector<LambdaSweepRow> lambda_sweep(
    const std::function<MarketInstance(double)>& family, const std::vector<double>& grid,
    double horizon, double burn_in_fraction, std::uint64_t m0_seed,
    const IntegrateOptions& opt, double m0_lo, double m0_hi) {
  for (double l : grid)
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lambda grid must be in [0,1]");

  std::vector<LambdaSweepRow> rows(grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t g = 0; g < std::int64_t(grid.size()); ++g) {
    MarketInstance inst = family(grid[g]);
    auto rng = make_rng(derive_seed(m0_seed, "lambda-sweep-m0"));
    std::uniform_real_distribution<double> dist(m0_lo, m0_hi);
    std::vector<double> m0(inst.n_bidders());
    for (auto& x : m0) x = dist(rng);

    IntegrateOptions run = opt;
    run.horizon = horizon;
    const auto traj = integrate(inst, m0, run);

    LambdaSweepRow row;
    row.lambda = grid[g];
    const std::size_t from = first_index_at_or_after(
        traj.times, traj.times.front() +
                        burn_in_fraction * (traj.times.back() - traj.times.front()));
    row.m1_min = traj.states[from][0];
    row.m1_max = row.m1_min;
    for (std::size_t k = from; k < traj.n_samples(); ++k) {
      row.m1_min = std::min(row.m1_min, traj.states[k][0]);
      row.m1_max = std::max(row.m1_max, traj.states[k][0]);
    }
    row.converged = detect_equilibrium(traj).has_value();
    rows[g] = row;
  }
  return rows;
}

StabilityReport check_coordinatewise_stability(
    const MarketInstance& inst, const std::vector<double>& m_star,
    const StabilitySettings& s, const std::optional<std::vector<double>>& lower_bounds,
    const std::optional<std::vector<double>>& upper_bounds, const QuadratureConfig& quad) {
  const std::size_t n = inst.n_bidders();
  if (m_star.size() != n) throw std::invalid_argument("m_star length mismatch");
  UtilityEngine engine(inst, quad);

  const auto lower_of = [&](std::size_t i) {
    double lo = 1.0;  // the dynamics is studied on [1, inf)^n
    if (lower_bounds) lo = std::max(lo, (*lower_bounds)[i]);
    return lo;
  };
  const auto upper_of = [&](std::size_t i) {
    return upper_bounds ? (*upper_bounds)[i] : std::numeric_limits<double>::infinity();
  };

  StabilityReport report;

  // One-sided axis derivatives: lets boundary equilibria (a coordinate held
  // at a bound) and sliding equilibria (the derivative flips sign across the
  // point) qualify, where a pointwise |U| test would not.
  const double delta = 1e-7;
  std::vector<double> probe = m_star;
  for (std::size_t i = 0; i < n; ++i) {
    if (engine.inert_bidder(i)) continue;
    if (m_star[i] + delta <= upper_of(i)) {
      probe[i] = m_star[i] + delta;
      const double up = engine.utilities(probe)[i];
      probe[i] = m_star[i];
      if (up > s.equilibrium_tol) {
        report.detail = "not an equilibrium: coordinate " + std::to_string(i) +
                        " drifts upward (U = " + std::to_string(up) + ")";
        return report;
      }
    }
    if (m_star[i] - delta >= lower_of(i)) {
      probe[i] = m_star[i] - delta;
      const double dn = engine.utilities(probe)[i];
      probe[i] = m_star[i];
      if (dn < -s.equilibrium_tol) {
        report.detail = "not an equilibrium: coordinate " + std::to_string(i) +
                        " drifts downward (U = " + std::to_string(dn) + ")";
        return report;
      }
    }
  }
  report.is_equilibrium = true;

  auto rng = make_rng(derive_seed(s.seed, "coordinatewise-stability"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> point(n);
  int accepted = 0;
  int attempts = 0;
  const int max_attempts = s.samples * 200;
  while (accepted < s.samples && attempts < max_attempts) {
    ++attempts;
    // Uniform draw from the eps-ball, then rejection against the region.
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      point[i] = gauss(rng);
      norm2 += point[i] * point[i];
    }
    const double r = s.eps * std::pow(unif(rng), 1.0 / double(n));
    const double scale = norm2 > 0.0 ? r / std::sqrt(norm2) : 0.0;
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      point[i] = m_star[i] + scale * point[i];
      if (point[i] < lower_of(i) || point[i] > upper_of(i)) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    ++accepted;

    const auto u = engine.utilities(point);
    for (std::size_t i = 0; i < n; ++i) {
      if (engine.inert_bidder(i)) continue;
      if (std::abs(point[i] - m_star[i]) <= s.exempt_tol) continue;
      const bool ok = point[i] < m_star[i] ? u[i] > 0.0 : u[i] < 0.0;
      if (!ok) {
        report.stable = false;
        report.witness_point = point;
        report.witness_coordinate = i;
        report.detail = "coordinate " + std::to_string(i) + " moves away from m*";
        return report;
      }
    }
  }
  if (accepted == 0) {
    report.detail = "no feasible perturbation found in the eps-ball";
    report.stable = true;  // vacuously
    return report;
  }
  report.stable = true;
  report.detail = "all " + std::to_string(accepted) + " sampled perturbations point back";
  return report;
}

Projection2D project(const Trajectory& traj, const std::vector<double>& row_x,
                     const std::vector<double>& row_y) {
  if (traj.states.empty()) throw std::invalid_argument("projection needs a nonempty trajectory");
  const std::size_t n = traj.states.front().size();
  if (row_x.size() != n || row_y.size() != n)
    throw std::invalid_argument("projection rows must match the state dimension");
  Projection2D out;
  out.row_x = row_x;
  out.row_y = row_y;
  out.points.reserve(traj.n_samples());
  for (const auto& state : traj.states) {
    double x = 0.0, y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x += row_x[i] * state[i];
      y += row_y[i] * state[i];
    }
    out.points.push_back({x, y});
  }
  return out;
}

Projection2D random_projection(const Trajectory& traj, std::uint64_t seed) {
  if (traj.states.empty()) throw std::invalid_argument("projection needs a nonempty trajectory");
  const std::size_t n = traj.states.front().size();
  auto rng = make_rng(derive_seed(seed, "random-projection"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> rx(n), ry(n);
  for (auto& v : rx) v = gauss(rng);
  for (auto& v : ry) v = gauss(rng);
  return project(traj, rx, ry);
}

const char* kind_name(OrbitClass::Kind kind) {
  switch (kind) {
    case OrbitClass::Kind::equilibrium: return "equilibrium";
    case OrbitClass::Kind::periodic: return "periodic";
    case OrbitClass::Kind::quasi_periodic: return "quasi-periodic";
    case OrbitClass::Kind::unclassified: return "unclassified";
  }
  return "unclassified";
}

}  // namespace rosdyn::analysis
