#pragma once

// Per-bidder quasi-linear utilities U_i(m) under the lambda-mixed auction,
// for fixed-value (discrete) and Beta-valued (smooth) items. Smooth items are
// integrated by tensor quadrature against the closed-form distribution of the
// opponents' max bid; a seeded Monte Carlo oracle and finite-difference
// gradients back the tests.

#include <cstdint>
#include <span>
#include <vector>

#include "rosdyn/market.hpp"

namespace rosdyn {

struct ItemOutcome {
  std::vector<double> allocation;      // x_ij in [0,1], one per bidder
  std::vector<double> payment;         // p_ij >= 0, one per bidder
  std::vector<std::size_t> winners;    // bidders with allocation > 0
  bool allocated = false;
};

struct QuadratureConfig {
  int nodes = 64;  // Gauss-Legendre nodes per dimension
};

// Runs the auction for one all-fixed item. Bids are b_i = m_i * v_i; bidders
// bid at or above the reserve are eligible (a Disfavor'ed bidder must exceed
// it); the winner pays lambda * max(second eligible bid, reserve) +
// (1 - lambda) * own bid per unit. Ties at the top split per policy.
ItemOutcome discrete_outcome(const ItemSpec& item,
                             const std::vector<std::string>& bidder_names,
                             std::span<const double> m, double lambda);

// Expected per-bidder utilities of a smooth item. Deterministic: identical
// inputs and config give bit-identical output.
std::vector<double> smooth_item_utility(const ItemSpec& item,
                                        const std::vector<std::string>& bidder_names,
                                        std::span<const double> m, double lambda,
                                        const QuadratureConfig& quad = {});

struct McResult {
  std::vector<double> estimate;
  std::vector<double> std_error;
};

// Monte Carlo oracle for smooth_item_utility: sample mean of the per-draw
// quasi-linear utility under the same auction rule. Reproducible for a fixed
// seed regardless of thread count.
McResult mc_utility(const ItemSpec& item, const std::vector<std::string>& bidder_names,
                    std::span<const double> m, double lambda, std::uint64_t samples,
                    std::uint64_t seed);
McResult mc_utility_serial(const ItemSpec& item, const std::vector<std::string>& bidder_names,
                           std::span<const double> m, double lambda, std::uint64_t samples,
                           std::uint64_t seed);

// Precompiled evaluator for U(m) over a whole instance. The parallel kernel
// splits per-item work across threads and reduces in item order, so results
// are bit-identical to the serial reference.
class UtilityEngine {
 public:
  explicit UtilityEngine(MarketInstance inst, QuadratureConfig quad = {});

  std::vector<double> utilities(std::span<const double> m) const;
  std::vector<double> utilities_serial(std::span<const double> m) const;

  const MarketInstance& instance() const { return inst_; }
  const QuadratureConfig& quadrature() const { return quad_; }
  std::size_t n_bidders() const { return inst_.n_bidders(); }
  // True when bidder i values no item (its utility is identically zero).
  bool inert_bidder(std::size_t i) const { return inert_[i]; }

 private:
  struct Part {
    std::size_t bidder;
    ValueSpec spec;
  };
  struct Item {
    std::vector<Part> parts;
    double reserve = 0.0;
    double copies = 1.0;
    TieBreak::Kind tie_kind = TieBreak::Kind::uniform_split;
    std::size_t tie_bidder = SIZE_MAX;
    bool smooth = false;
  };

  void item_utilities(const Item& item, std::span<const double> m,
                      std::span<double> out) const;  // out aligned with parts

  MarketInstance inst_;
  QuadratureConfig quad_;
  std::vector<Item> items_;
  std::vector<std::size_t> part_offset_;  // items_ -> index into flat part array
  std::size_t total_parts_ = 0;
  std::vector<bool> inert_;
  bool use_parallel_ = false;
};

// U_i(m) = sum over items of copies * per-item utility.
std::vector<double> utilities(const MarketInstance& inst, std::span<const double> m,
                              const QuadratureConfig& quad = {});

// Central finite differences dU_i/dm_j, entry [i][j]. All items must be
// smooth and m_j +- h must stay positive.
std::vector<std::vector<double>> utility_gradient(const MarketInstance& inst,
                                                  std::span<const double> m,
                                                  double h = 1e-4,
                                                  const QuadratureConfig& quad = {});

}  // namespace rosdyn
