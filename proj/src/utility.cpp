#include "rosdyn/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rosdyn/beta_math.hpp"
#include "rosdyn/quadrature.hpp"

namespace rosdyn {

namespace {

constexpr std::size_t kNoBidder = SIZE_MAX;

// ---------------------------------------------------------------------------
// Discrete auction core, shared by discrete_outcome, the engine and the MC
// oracle. Works on a compact participant list: bids[k], values[k].

struct DiscreteResult {
  // allocation and payment per participant slot
  void reset(std::size_t n) {
    x.assign(n, 0.0);
    p.assign(n, 0.0);
    allocated = false;
  }
  std::vector<double> x, p;
  bool allocated = false;
};

void run_discrete_auction(std::span<const double> bids, double reserve, double lambda,
                          TieBreak::Kind tie_kind, std::size_t tie_slot,
                          DiscreteResult& out) {
  const std::size_t n = bids.size();
  out.reset(n);

  // Eligibility: bid >= reserve, except that a Disfavor'ed bidder tied with
  // the reserve is treated as not bidding (ties break toward not allocating).
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double b = bids[k];
    const bool disfavored_at_reserve =
        tie_kind == TieBreak::Kind::disfavor && k == tie_slot && b == reserve;
    if (b >= reserve && !disfavored_at_reserve) best = std::max(best, b);
  }
  if (best == -std::numeric_limits<double>::infinity()) return;  // unallocated

  std::vector<std::size_t> top;
  for (std::size_t k = 0; k < n; ++k) {
    const double b = bids[k];
    const bool disfavored_at_reserve =
        tie_kind == TieBreak::Kind::disfavor && k == tie_slot && b == reserve;
    if (b == best && b >= reserve && !disfavored_at_reserve) top.push_back(k);
  }

  if (top.size() > 1) {
    if (tie_kind == TieBreak::Kind::favor &&
        std::find(top.begin(), top.end(), tie_slot) != top.end()) {
      top = {tie_slot};
    } else if (tie_kind == TieBreak::Kind::disfavor) {
      std::erase(top, tie_slot);
    }
  }

  const double share = 1.0 / double(top.size());
  for (std::size_t k : top) {
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n; ++s) {
      if (s == k) continue;
      const double b = bids[s];
      const bool disfavored_at_reserve =
          tie_kind == TieBreak::Kind::disfavor && s == tie_slot && b == reserve;
      if (b >= reserve && !disfavored_at_reserve) second = std::max(second, b);
    }
    const double price = lambda * std::max(second, reserve) + (1.0 - lambda) * bids[k];
    out.x[k] = share;
    out.p[k] = share * price;
  }
  out.allocated = true;
}

// ---------------------------------------------------------------------------
// Smooth (expected) utilities.
//
// For interested bidder i with bid level c = m_i * v_i, the per-item utility
//   E[(v_i - lambda*M - (1-lambda)*m_i*v_i) * 1{m_i v_i > M}]
// with M the opponents' max bid integrates by parts to
//   E_v[ v (1 - m_i) G(m_i v) ] + lambda * E_v[ integral_0^{m_i v} G ]
// where G is the product CDF of the opponents' bids. G is piecewise
// polynomial; integrals are split at its kinks so Gauss-Legendre stays exact.

struct SmoothOpponent {
  bool is_beta = false;
  double top = 0.0;  // beta: m*scale (support end); fixed: m*value (step)
  int a = 0, b = 0;
};

double opp_cdf(const std::vector<SmoothOpponent>& opp, double x) {
  double g = 1.0;
  for (const auto& o : opp) {
    if (o.is_beta) {
      g *= beta_cdf(o.a, o.b, x / o.top);
      if (g == 0.0) return 0.0;
    } else if (x < o.top) {
      return 0.0;
    }
  }
  return g;
}

double opp_cdf_integral(const std::vector<SmoothOpponent>& opp, double c, int nodes) {
  if (c <= 0.0) return 0.0;
  if (opp.empty()) return c;
  if (opp.size() == 1) {
    const auto& o = opp[0];
    if (o.is_beta) return o.top * beta_cdf_antiderivative(o.a, o.b, c / o.top);
    return c > o.top ? c - o.top : 0.0;
  }
  std::vector<double> cuts{0.0};
  for (const auto& o : opp)
    if (o.top > 0.0 && o.top < c) cuts.push_back(o.top);
  cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  const auto& rule = gauss_legendre(nodes);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    acc += integrate_gl(rule, cuts[k], cuts[k + 1],
                        [&](double x) { return opp_cdf(opp, x); });
  return acc;
}

double participant_utility(const ValueSpec& spec, double m_i,
                           const std::vector<SmoothOpponent>& opp, double lambda,
                           int nodes) {
  if (spec.is_zero() || m_i <= 0.0) return 0.0;
  if (spec.is_fixed()) {
    const double c = m_i * spec.value;
    return spec.value * (1.0 - m_i) * opp_cdf(opp, c) +
           lambda * opp_cdf_integral(opp, c, nodes);
  }
  const double s = spec.scale;
  std::vector<double> cuts{0.0, s};
  for (const auto& o : opp) {
    const double v = o.top / m_i;
    if (v > 0.0 && v < s) cuts.push_back(v);
  }
  std::sort(cuts.begin(), cuts.end());
  const auto& rule = gauss_legendre(nodes);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    acc += integrate_gl(rule, cuts[k], cuts[k + 1], [&](double v) {
      const double density = beta_pdf(spec.beta_a, spec.beta_b, v / s) / s;
      const double c = m_i * v;
      double val = v * (1.0 - m_i) * opp_cdf(opp, c);
      if (lambda != 0.0) val += lambda * opp_cdf_integral(opp, c, nodes);
      return density * val;
    });
  }
  return acc;
}

std::vector<SmoothOpponent> build_opponents(const std::vector<ValueSpec>& specs,
                                            std::span<const double> mults,
                                            std::size_t skip) {
  std::vector<SmoothOpponent> opp;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (k == skip || specs[k].is_zero() || mults[k] <= 0.0) continue;
    SmoothOpponent o;
    if (specs[k].is_beta()) {
      o.is_beta = true;
      o.top = mults[k] * specs[k].scale;
      o.a = specs[k].beta_a;
      o.b = specs[k].beta_b;
    } else {
      o.top = mults[k] * specs[k].value;
      if (o.top <= 0.0) continue;  // zero bid never wins
    }
    opp.push_back(o);
  }
  return opp;
}

void check_multiplier_vector(std::span<const double> m, std::size_t n) {
  if (m.size() != n)
    throw std::invalid_argument("multiplier vector length does not match bidder count");
  for (double v : m)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("multipliers must be finite and >= 0");
}

}  // namespace

ItemOutcome discrete_outcome(const ItemSpec& item,
                             const std::vector<std::string>& bidder_names,
                             std::span<const double> m, double lambda) {
  if (item.is_smooth())
    throw std::invalid_argument("discrete_outcome called on a smooth item");
  check_multiplier_vector(m, bidder_names.size());

  std::vector<std::size_t> slots;
  std::vector<double> bids, values;
  std::size_t tie_slot = kNoBidder;
  for (std::size_t i = 0; i < bidder_names.size(); ++i) {
    auto it = item.values.find(bidder_names[i]);
    if (it == item.values.end() || it->second.is_zero()) continue;
    if (item.tie_break.kind != TieBreak::Kind::uniform_split &&
        item.tie_break.bidder == bidder_names[i])
      tie_slot = slots.size();
    slots.push_back(i);
    values.push_back(it->second.value);
    bids.push_back(m[i] * it->second.value);
  }

  DiscreteResult res;
  run_discrete_auction(bids, item.reserve, lambda, item.tie_break.kind, tie_slot, res);

  ItemOutcome out;
  out.allocation.assign(bidder_names.size(), 0.0);
  out.payment.assign(bidder_names.size(), 0.0);
  out.allocated = res.allocated;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    out.allocation[slots[k]] = res.x[k];
    out.payment[slots[k]] = res.p[k];
    if (res.x[k] > 0.0) out.winners.push_back(slots[k]);
  }
  return out;
}

std::vector<double> smooth_item_utility(const ItemSpec& item,
                                        const std::vector<std::string>& bidder_names,
                                        std::span<const double> m, double lambda,
                                        const QuadratureConfig& quad) {
  if (!item.is_smooth())
    throw std::invalid_argument("smooth_item_utility called on an all-fixed item");
  if (quad.nodes < 2) throw std::invalid_argument("quadrature needs at least 2 nodes");
  check_multiplier_vector(m, bidder_names.size());

  std::vector<std::size_t> slots;
  std::vector<ValueSpec> specs;
  std::vector<double> mults;
  for (std::size_t i = 0; i < bidder_names.size(); ++i) {
    auto it = item.values.find(bidder_names[i]);
    if (it == item.values.end() || it->second.is_zero()) continue;
    slots.push_back(i);
    specs.push_back(it->second);
    mults.push_back(m[i]);
  }

  std::vector<double> out(bidder_names.size(), 0.0);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto opp = build_opponents(specs, mults, k);
    out[slots[k]] = participant_utility(specs[k], mults[k], opp, lambda, quad.nodes);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle. Samples are split into fixed-size chunks with
// independently seeded generators, so the result does not depend on how the
// chunks are scheduled across threads.

namespace {

McResult mc_run(const ItemSpec& item, const std::vector<std::string>& bidder_names,
                std::span<const double> m, double lambda, std::uint64_t samples,
                std::uint64_t seed, bool parallel) {
  if (!item.is_smooth()) throw std::invalid_argument("mc_utility needs a smooth item");
  if (samples == 0) throw std::invalid_argument("mc_utility needs samples >= 1");
  check_multiplier_vector(m, bidder_names.size());

  std::vector<std::size_t> slots;
  std::vector<ValueSpec> specs;
  std::size_t tie_slot = kNoBidder;
  for (std::size_t i = 0; i < bidder_names.size(); ++i) {
    auto it = item.values.find(bidder_names[i]);
    if (it == item.values.end() || it->second.is_zero()) continue;
    if (item.tie_break.kind != TieBreak::Kind::uniform_split &&
        item.tie_break.bidder == bidder_names[i])
      tie_slot = slots.size();
    slots.push_back(i);
    specs.push_back(it->second);
  }
  const std::size_t np = slots.size();

  constexpr std::uint64_t kChunk = 1 << 16;
  const std::uint64_t nchunks = (samples + kChunk - 1) / kChunk;
  std::vector<double> sums(nchunks * np, 0.0), sumsq(nchunks * np, 0.0);

  const auto run_chunk = [&](std::uint64_t ci) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (ci + 1));
    const std::uint64_t lo = ci * kChunk;
    const std::uint64_t hi = std::min<std::uint64_t>(samples, lo + kChunk);
    std::vector<double> bids(np), values(np);
    DiscreteResult res;
    double* s = &sums[ci * np];
    double* s2 = &sumsq[ci * np];
    for (std::uint64_t d = lo; d < hi; ++d) {
      for (std::size_t k = 0; k < np; ++k) {
        const ValueSpec& v = specs[k];
        values[k] = v.is_beta() ? v.scale * beta_sample(v.beta_a, v.beta_b, rng) : v.value;
        bids[k] = m[slots[k]] * values[k];
      }
      run_discrete_auction(bids, item.reserve, lambda, item.tie_break.kind, tie_slot, res);
      for (std::size_t k = 0; k < np; ++k) {
        const double u = res.x[k] * values[k] - res.p[k];
        s[k] += u;
        s2[k] += u * u;
      }
    }
  };

#ifdef _OPENMP
  if (parallel && nchunks > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ci = 0; ci < std::int64_t(nchunks); ++ci) run_chunk(ci);
  } else
#endif
  {
    (void)parallel;
    for (std::uint64_t ci = 0; ci < nchunks; ++ci) run_chunk(ci);
  }

  McResult out;
  out.estimate.assign(bidder_names.size(), 0.0);
  out.std_error.assign(bidder_names.size(), 0.0);
  for (std::size_t k = 0; k < np; ++k) {
    double total = 0.0, total2 = 0.0;
    for (std::uint64_t ci = 0; ci < nchunks; ++ci) {
      total += sums[ci * np + k];
      total2 += sumsq[ci * np + k];
    }
    const double mean = total / double(samples);
    out.estimate[slots[k]] = mean;
    if (samples > 1) {
      const double var =
          std::max(0.0, (total2 - double(samples) * mean * mean) / double(samples - 1));
      out.std_error[slots[k]] = std::sqrt(var / double(samples));
    }
  }
  return out;
}

}  // namespace

McResult mc_utility(const ItemSpec& item, const std::vector<std::string>& bidder_names,
                    std::span<const double> m, double lambda, std::uint64_t samples,
                    std::uint64_t seed) {
  return mc_run(item, bidder_names, m, lambda, samples, seed, true);
}

McResult mc_utility_serial(const ItemSpec& item, const std::vector<std::string>& bidder_names,
                           std::span<const double> m, double lambda, std::uint64_t samples,
                           std::uint64_t seed) {
  return mc_run(item, bidder_names, m, lambda, samples, seed, false);
}

// ---------------------------------------------------------------------------
// UtilityEngine

UtilityEngine::UtilityEngine(MarketInstance inst, QuadratureConfig quad)
    : inst_(std::move(inst)), quad_(quad) {
  if (quad_.nodes < 2) throw std::invalid_argument("quadrature needs at least 2 nodes");
  require_valid(inst_);

  inert_.assign(inst_.n_bidders(), true);
  int smooth_count = 0;
  for (const auto& spec : inst_.items) {
    Item item;
    item.reserve = spec.reserve;
    item.copies = spec.copies;
    item.tie_kind = spec.tie_break.kind;
    item.smooth = spec.is_smooth();
    if (item.smooth) ++smooth_count;
    for (std::size_t i = 0; i < inst_.bidder_names.size(); ++i) {
      auto it = spec.values.find(inst_.bidder_names[i]);
      if (it == spec.values.end() || it->second.is_zero()) continue;
      if (item.tie_kind != TieBreak::Kind::uniform_split &&
          spec.tie_break.bidder == inst_.bidder_names[i])
        item.tie_bidder = item.parts.size();
      item.parts.push_back({i, it->second});
      inert_[i] = false;
    }
    part_offset_.push_back(total_parts_);
    total_parts_ += item.parts.size();
    items_.push_back(std::move(item));
  }
  use_parallel_ = smooth_count >= 4;
}

void UtilityEngine::item_utilities(const Item& item, std::span<const double> m,
                                   std::span<double> out) const {
  const std::size_t np = item.parts.size();
  if (!item.smooth) {
    std::vector<double> bids(np);
    for (std::size_t k = 0; k < np; ++k)
      bids[k] = m[item.parts[k].bidder] * item.parts[k].spec.value;
    DiscreteResult res;
    run_discrete_auction(bids, item.reserve, inst_.lambda, item.tie_kind, item.tie_bidder,
                         res);
    for (std::size_t k = 0; k < np; ++k)
      out[k] = res.x[k] * item.parts[k].spec.value - res.p[k];
    return;
  }
  std::vector<ValueSpec> specs(np);
  std::vector<double> mults(np);
  for (std::size_t k = 0; k < np; ++k) {
    specs[k] = item.parts[k].spec;
    mults[k] = m[item.parts[k].bidder];
  }
  for (std::size_t k = 0; k < np; ++k) {
    const auto opp = build_opponents(specs, mults, k);
    out[k] = participant_utility(specs[k], mults[k], opp, inst_.lambda, quad_.nodes);
  }
}

std::vector<double> UtilityEngine::utilities_serial(std::span<const double> m) const {
  check_multiplier_vector(m, inst_.n_bidders());
  std::vector<double> u(inst_.n_bidders(), 0.0);
  std::vector<double> scratch;
  for (const auto& item : items_) {
    scratch.assign(item.parts.size(), 0.0);
    item_utilities(item, m, scratch);
    for (std::size_t k = 0; k < item.parts.size(); ++k)
      u[item.parts[k].bidder] += item.copies * scratch[k];
  }
  return u;
}

std::vector<double> UtilityEngine::utilities(std::span<const double> m) const {
#ifdef _OPENMP
  if (use_parallel_ && !omp_in_parallel()) {
    check_multiplier_vector(m, inst_.n_bidders());
    std::vector<double> contrib(total_parts_, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t j = 0; j < std::int64_t(items_.size()); ++j) {
      std::span<double> out(&contrib[part_offset_[j]], items_[j].parts.size());
      item_utilities(items_[j], m, out);
    }
    // Serial reduction in item order keeps the result bit-identical to the
    // serial kernel.
    std::vector<double> u(inst_.n_bidders(), 0.0);
    for (std::size_t j = 0; j < items_.size(); ++j)
      for (std::size_t k = 0; k < items_[j].parts.size(); ++k)
        u[items_[j].parts[k].bidder] +=
            items_[j].copies * contrib[part_offset_[j] + k];
    return u;
  }
#endif
  return utilities_serial(m);
}

std::vector<double> utilities(const MarketInstance& inst, std::span<const double> m,
                              const QuadratureConfig& quad) {
  return UtilityEngine(inst, quad).utilities(m);
}

std::vector<std::vector<double>> utility_gradient(const MarketInstance& inst,
                                                  std::span<const double> m,
                                                  double h,
                                                  const QuadratureConfig& quad) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  for (const auto& item : inst.items)
    if (!item.is_smooth())
      throw std::invalid_argument("utility_gradient requires a smooth instance");
  const std::size_t n = inst.n_bidders();
  check_multiplier_vector(m, n);
  UtilityEngine engine(inst, quad);

  std::vector<std::vector<double>> grad(n, std::vector<double>(n, 0.0));
  std::vector<double> probe(m.begin(), m.end());
  for (std::size_t j = 0; j < n; ++j) {
    if (!(m[j] - h > 0.0))
      throw std::invalid_argument("m_j - h must stay positive for the central difference");
    probe[j] = m[j] + h;
    const auto up = engine.utilities(probe);
    probe[j] = m[j] - h;
    const auto dn = engine.utilities(probe);
    probe[j] = m[j];
    for (std::size_t i = 0; i < n; ++i) grad[i][j] = (up[i] - dn[i]) / (2.0 * h);
  }
  return grad;
}

}  // namespace rosdyn
