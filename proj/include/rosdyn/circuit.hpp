#pragma once

// Compiles boolean NOR networks into ROS markets. Each variable becomes a
// bidder whose multiplier settles at `high` (true) or `low` (false); a NOR
// gate is two items: a cheap item the output always wins, price-set by the
// inputs, and a reserve-priced item the output can only afford when no input
// is above threshold. Simplified mode keeps native reserves plus floor and
// ceiling bounds on the dynamics; full mode realizes reserve, floor and
// ceiling with auxiliary bidders and items.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rosdyn/dynamics.hpp"
#include "rosdyn/market.hpp"

namespace rosdyn::circuit {

struct NorConstraint {
  std::string output;
  std::vector<std::string> inputs;  // any arity k >= 0; NOT is a 1-input NOR
};

struct BooleanNetwork {
  std::vector<std::string> variables;
  std::vector<NorConstraint> constraints;  // exactly one per variable

  void validate() const;
  bool acyclic() const;
  // Truth-table evaluation; only defined for acyclic networks.
  std::vector<bool> evaluate() const;
};

// Lines of the form "X = NOR(A, B, ...)" or "X = NOT(A)"; '#' comments.
BooleanNetwork parse_network(const std::string& text);

struct GateParams {
  double floor = 1.2;
  double low = 1.5;
  double threshold = 2.1;
  double high = 3.0;
  double ceiling = 3.0;
  double V = 1.0;
  double M_override = 0.0;  // 0 = size the ceiling item per bidder

  double T() const { return threshold * V; }
  double C() const { return low * T(); }
  // 1 <= floor < low <= threshold < high = ceiling < low * threshold
  void validate() const;
};

GateParams default_gate_params();

enum class GateMode { simplified, full };

struct CompiledCircuit {
  MarketInstance instance;
  GateParams params;
  GateMode mode = GateMode::simplified;
  std::vector<std::string> variables;
  std::vector<std::size_t> variable_indices;       // into instance.bidder_names
  std::map<std::string, double> aux_start;         // designed aux multipliers
  std::optional<std::vector<double>> lower_bounds;  // simplified mode only
  std::optional<std::vector<double>> upper_bounds;

  // Full state: variable entries from `variable_m`, aux at their fixed points.
  std::vector<double> initial_state(const std::vector<double>& variable_m) const;
  // Variables drawn uniformly from [floor, ceiling].
  std::vector<double> random_initial_state(std::uint64_t seed) const;
  void apply_bounds(IntegrateOptions& opt) const;
  std::vector<double> variable_state(const std::vector<double>& m) const;
};

// Incremental builder; exposed so the individual gadgets stay testable.
class CircuitBuilder {
 public:
  CircuitBuilder(GateParams params, GateMode mode);

  std::size_t add_bidder(const std::string& name);
  // Adds items L and H for output = NOR(inputs); in full mode H's reserve is
  // immediately expanded into a reserve gadget.
  void add_nor_gate(const std::vector<std::string>& inputs, const std::string& output);
  // Replaces the item's native reserve R with two auxiliary bidders valuing
  // the item at R plus a shared unit item; their multipliers rest at 1.
  void add_reserve_gadget(std::size_t item_index, const std::string& aux_prefix);
  // Item of value M with reserve ceiling*M (ties away from the bidder):
  // winning it makes the bidder's utility negative.
  void add_ceiling_gadget(const std::string& bidder, double M);
  // Items E (value 1, reserve floor, ties toward the bidder) and F (value
  // floor - 1, free): guarantees positive utility below the floor.
  void add_floor_gadget(const std::string& bidder);

  double total_value_of(const std::string& bidder) const;
  CompiledCircuit finish(std::vector<std::string> variables);

 private:
  GateParams params_;
  GateMode mode_;
  MarketInstance inst_;
  std::map<std::string, double> aux_start_;
};

CompiledCircuit compile_network(const BooleanNetwork& net, const GateParams& params,
                                GateMode mode);

// n-cycle of NOT gates X_i = NOT(X_{i+1}); n must be odd.
CompiledCircuit build_clock(int n, const GateParams& params, GateMode mode);

// X_i = true iff m_i > threshold, restricted to the variable bidders.
std::vector<bool> read_assignment(const std::vector<double>& m,
                                  const std::vector<std::size_t>& variable_indices,
                                  double threshold);
std::vector<bool> read_assignment(const CompiledCircuit& cc, const std::vector<double>& m);

// Multiplier pattern for a boolean assignment: high / low per variable.
std::vector<double> assignment_multipliers(const CompiledCircuit& cc,
                                           const std::vector<bool>& assignment);

}  // namespace rosdyn::circuit
