#pragma once

// Domain types for return-over-spend (ROS) bidding markets: per-bidder value
// specifications, auction items, market instances, structural validation and
// the canonical JSON instance format.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rosdyn {

// What one bidder's value for one item looks like. Beta values make an item
// "smooth": the value is drawn from scale * Beta(a, b) with integer a, b >= 1,
// which keeps the CDF polynomial.
struct ValueSpec {
  enum class Kind { zero, fixed, beta };

  Kind kind = Kind::zero;
  double value = 0.0;  // fixed only
  int beta_a = 0;
  int beta_b = 0;
  double scale = 1.0;  // beta only; support is [0, scale]

  static ValueSpec zero() { return {}; }
  static ValueSpec fixed(double v);
  static ValueSpec beta(int a, int b, double scale = 1.0);

  bool is_zero() const { return kind == Kind::zero; }
  bool is_fixed() const { return kind == Kind::fixed; }
  bool is_beta() const { return kind == Kind::beta; }
  double mean() const;
  double support_max() const;

  bool operator==(const ValueSpec&) const = default;
};

struct TieBreak {
  enum class Kind { uniform_split, favor, disfavor };

  Kind kind = Kind::uniform_split;
  std::string bidder;  // favor / disfavor target

  static TieBreak uniform() { return {}; }
  static TieBreak favor(std::string b) { return {Kind::favor, std::move(b)}; }
  static TieBreak disfavor(std::string b) { return {Kind::disfavor, std::move(b)}; }

  bool operator==(const TieBreak&) const = default;
};

// One auction item. Only interested bidders appear in `values`; everyone else
// implicitly has a zero value. `copies` scales the item's utility
// contribution linearly (it stands in for replicating the item).
struct ItemSpec {
  std::map<std::string, ValueSpec> values;
  double reserve = 0.0;
  TieBreak tie_break;
  double copies = 1.0;

  bool is_smooth() const;

  bool operator==(const ItemSpec&) const = default;
};

// A market: ordered bidders, items, and the payment mix. The winner of an
// item pays lambda * (second-highest bid) + (1 - lambda) * (own bid), so
// lambda = 1 is pure second price and lambda = 0 pure first price.
struct MarketInstance {
  std::vector<std::string> bidder_names;
  std::vector<ItemSpec> items;
  double lambda = 1.0;

  std::size_t n_bidders() const { return bidder_names.size(); }
  std::optional<std::size_t> bidder_index(const std::string& name) const;
  // Item count with copies expanded (integral copies only contribute their
  // integer weight; fractional copies are counted by weight).
  double total_copies() const;

  bool operator==(const MarketInstance&) const = default;
};

struct Violation {
  int item = -1;           // -1 for instance-level violations
  std::string bidder;      // may be empty
  std::string message;
};

// Empty result iff every structural invariant holds. Violations are data,
// not exceptions.
std::vector<Violation> validate_instance(const MarketInstance& inst);

// Throws std::invalid_argument listing all violations.
void require_valid(const MarketInstance& inst);

std::string describe(const Violation& v);

// Divides each bidder's row of raw values by its positive target, after
// which all downstream code may assume unit targets.
std::vector<std::vector<double>> normalize_targets(
    const std::vector<std::vector<double>>& raw_values,
    const std::vector<double>& targets);

// Canonical instance file format (JSON). Unknown fields are rejected;
// omitted optional fields take their documented defaults. Numeric values
// round-trip exactly.
MarketInstance instance_from_json_text(const std::string& text);
std::string instance_to_json_text(const MarketInstance& inst);
MarketInstance load_instance(const std::string& path);
void save_instance(const MarketInstance& inst, const std::string& path);

std::uint64_t instance_fingerprint(const MarketInstance& inst);

}  // namespace rosdyn
