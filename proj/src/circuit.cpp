#include "rosdyn/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rosdyn/rng.hpp"

namespace rosdyn::circuit {

void BooleanNetwork::validate() const {
  if (variables.size() != constraints.size())
    throw std::invalid_argument("network needs exactly one constraint per variable");
  std::set<std::string> vars(variables.begin(), variables.end());
  if (vars.size() != variables.size())
    throw std::invalid_argument("duplicate variable names");
  std::set<std::string> outputs;
  for (const auto& c : constraints) {
    if (!vars.count(c.output))
      throw std::invalid_argument("constraint output '" + c.output + "' is not a variable");
    if (!outputs.insert(c.output).second)
      throw std::invalid_argument("variable '" + c.output + "' has two constraints");
    for (const auto& in : c.inputs)
      if (!vars.count(in))
        throw std::invalid_argument("constraint input '" + in + "' is not a variable");
  }
}

bool BooleanNetwork::acyclic() const {
  // Kahn's algorithm over "output depends on inputs".
  std::map<std::string, std::vector<std::string>> dependents;
  std::map<std::string, int> indegree;
  for (const auto& v : variables) indegree[v] = 0;
  for (const auto& c : constraints) {
    for (const auto& in : c.inputs) {
      dependents[in].push_back(c.output);
      ++indegree[c.output];
    }
  }
  std::deque<std::string> ready;
  for (const auto& [v, d] : indegree)
    if (d == 0) ready.push_back(v);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::string v = ready.front();
    ready.pop_front();
    ++seen;
    for (const auto& w : dependents[v])
      if (--indegree[w] == 0) ready.push_back(w);
  }
  return seen == variables.size();
}

std::vector<bool> BooleanNetwork::evaluate() const {
  validate();
  if (!acyclic()) throw std::invalid_argument("truth-table evaluation needs an acyclic network");
  std::map<std::string, const NorConstraint*> by_output;
  for (const auto& c : constraints) by_output[c.output] = &c;
  std::map<std::string, int> value;  // -1 unknown
  for (const auto& v : variables) value[v] = -1;
  // Repeated sweeps; each pass resolves at least one variable.
  for (std::size_t pass = 0; pass < variables.size(); ++pass) {
    for (const auto& v : variables) {
      if (value[v] >= 0) continue;
      const auto* c = by_output[v];
      bool any_true = false, all_known = true;
      for (const auto& in : c->inputs) {
        if (value[in] < 0) {
          all_known = false;
          break;
        }
        any_true = any_true || value[in] == 1;
      }
      if (all_known) value[v] = any_true ? 0 : 1;
    }
  }
  std::vector<bool> out;
  for (const auto& v : variables) {
    if (value[v] < 0) throw std::logic_error("evaluation did not converge");
    out.push_back(value[v] == 1);
  }
  return out;
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

}  // namespace

BooleanNetwork parse_network(const std::string& text) {
  BooleanNetwork net;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const std::string ctx = "network line " + std::to_string(lineno);

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(ctx + ": expected '='");
    const std::string lhs = strip(line.substr(0, eq));
    std::string rhs = strip(line.substr(eq + 1));
    if (!valid_name(lhs)) throw std::invalid_argument(ctx + ": bad variable name '" + lhs + "'");

    bool is_not = false;
    if (rhs.rfind("NOR", 0) == 0)
      rhs = strip(rhs.substr(3));
    else if (rhs.rfind("NOT", 0) == 0) {
      is_not = true;
      rhs = strip(rhs.substr(3));
    } else
      throw std::invalid_argument(ctx + ": expected NOR(...) or NOT(...)");
    if (rhs.size() < 2 || rhs.front() != '(' || rhs.back() != ')')
      throw std::invalid_argument(ctx + ": expected parenthesized argument list");
    const std::string args = rhs.substr(1, rhs.size() - 2);

    NorConstraint c;
    c.output = lhs;
    std::string token;
    std::istringstream as(args);
    while (std::getline(as, token, ',')) {
      token = strip(token);
      if (token.empty()) throw std::invalid_argument(ctx + ": empty argument");
      if (!valid_name(token))
        throw std::invalid_argument(ctx + ": bad argument name '" + token + "'");
      c.inputs.push_back(token);
    }
    if (is_not && c.inputs.size() != 1)
      throw std::invalid_argument(ctx + ": NOT takes exactly one argument");
    net.variables.push_back(lhs);
    net.constraints.push_back(std::move(c));
  }
  net.validate();
  return net;
}

void GateParams::validate() const {
  if (!(V > 0.0)) throw std::invalid_argument("gate parameter V must be > 0");
  const bool chain = 1.0 <= floor && floor < low && low <= threshold && threshold < high &&
                     high == ceiling && ceiling < low * threshold;
  if (!chain)
    throw std::invalid_argument(
        "gate parameters must satisfy 1 <= floor < low <= threshold < high = ceiling "
        "< low * threshold");
  // The same relations the gate correctness rests on, kept explicit:
  if (!(T() - low * V >= 0.0)) throw std::invalid_argument("need T >= low * V");
  if (!(C() - ceiling * V > 0.0)) throw std::invalid_argument("need C > ceiling * V");
  if (!(T() - threshold * V <= 0.0)) throw std::invalid_argument("need T <= threshold * V");
  if (!(floor * C() > ceiling * V)) throw std::invalid_argument("need floor * C > ceiling * V");
  if (low * T() != C()) throw std::invalid_argument("need low * T == C exactly");
}

GateParams default_gate_params() {
  GateParams p;
  p.validate();
  return p;
}

CircuitBuilder::CircuitBuilder(GateParams params, GateMode mode)
    : params_(params), mode_(mode) {
  params_.validate();
  inst_.lambda = 1.0;
}

std::size_t CircuitBuilder::add_bidder(const std::string& name) {
  if (auto idx = inst_.bidder_index(name)) return *idx;
  inst_.bidder_names.push_back(name);
  return inst_.bidder_names.size() - 1;
}

void CircuitBuilder::add_nor_gate(const std::vector<std::string>& inputs,
                                  const std::string& output) {
  add_bidder(output);
  for (const auto& in : inputs) add_bidder(in);

  ItemSpec low_item;  // the output always wins this one; inputs set the price
  low_item.values[output] = ValueSpec::fixed(params_.C());
  for (const auto& in : inputs) low_item.values[in] = ValueSpec::fixed(params_.V);
  inst_.items.push_back(std::move(low_item));

  ItemSpec high_item;  // affordable only when no input is above threshold
  high_item.values[output] = ValueSpec::fixed(params_.T());
  high_item.reserve = params_.C();
  high_item.tie_break = TieBreak::disfavor(output);
  inst_.items.push_back(std::move(high_item));
  if (mode_ == GateMode::full)
    add_reserve_gadget(inst_.items.size() - 1, "res_" + output);
}

void CircuitBuilder::add_reserve_gadget(std::size_t item_index, const std::string& aux_prefix) {
  if (mode_ != GateMode::full)
    throw std::logic_error("reserve gadgets belong to full mode");
  if (item_index >= inst_.items.size()) throw std::invalid_argument("bad item index");
  ItemSpec& target = inst_.items[item_index];
  const double R = target.reserve;
  target.reserve = 0.0;
  const std::string a1 = aux_prefix + "_1";
  const std::string a2 = aux_prefix + "_2";
  add_bidder(a1);
  add_bidder(a2);
  aux_start_[a1] = 1.0;
  aux_start_[a2] = 1.0;
  if (R > 0.0) {
    target.values[a1] = ValueSpec::fixed(R);
    target.values[a2] = ValueSpec::fixed(R);
  }
  ItemSpec shared;  // keeps the pair pinned at multiplier 1
  shared.values[a1] = ValueSpec::fixed(1.0);
  shared.values[a2] = ValueSpec::fixed(1.0);
  inst_.items.push_back(std::move(shared));
}

void CircuitBuilder::add_ceiling_gadget(const std::string& bidder, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("ceiling gadget needs M > 0");
  add_bidder(bidder);
  ItemSpec item;
  item.values[bidder] = ValueSpec::fixed(M);
  item.reserve = params_.ceiling * M;
  item.tie_break = TieBreak::disfavor(bidder);
  inst_.items.push_back(std::move(item));
  if (mode_ == GateMode::full)
    add_reserve_gadget(inst_.items.size() - 1, "ceil_" + bidder);
}

void CircuitBuilder::add_floor_gadget(const std::string& bidder) {
  add_bidder(bidder);
  ItemSpec gate;  // value 1, priced at the floor, ties toward the bidder
  gate.values[bidder] = ValueSpec::fixed(1.0);
  gate.reserve = params_.floor;
  gate.tie_break = TieBreak::favor(bidder);
  inst_.items.push_back(std::move(gate));
  if (mode_ == GateMode::full)
    add_reserve_gadget(inst_.items.size() - 1, "floor_" + bidder);
  ItemSpec free_item;  // unconditional utility floor - 1 > 0
  free_item.values[bidder] = ValueSpec::fixed(params_.floor - 1.0);
  inst_.items.push_back(std::move(free_item));
}

double CircuitBuilder::total_value_of(const std::string& bidder) const {
  double total = 0.0;
  for (const auto& item : inst_.items) {
    auto it = item.values.find(bidder);
    if (it != item.values.end()) total += item.copies * it->second.support_max();
  }
  return total;
}

CompiledCircuit CircuitBuilder::finish(std::vector<std::string> variables) {
  CompiledCircuit out;
  out.params = params_;
  out.mode = mode_;
  out.variables = std::move(variables);
  for (const auto& v : out.variables) {
    const auto idx = inst_.bidder_index(v);
    if (!idx) throw std::logic_error("variable bidder missing: " + v);
    out.variable_indices.push_back(*idx);
  }
  if (mode_ == GateMode::simplified) {
    std::vector<double> lo(inst_.n_bidders(), 0.0);
    std::vector<double> hi(inst_.n_bidders(), std::numeric_limits<double>::infinity());
    for (std::size_t idx : out.variable_indices) {
      lo[idx] = params_.floor;
      hi[idx] = params_.ceiling;
    }
    out.lower_bounds = std::move(lo);
    out.upper_bounds = std::move(hi);
  }
  out.aux_start = std::move(aux_start_);
  require_valid(inst_);
  out.instance = std::move(inst_);
  return out;
}

CompiledCircuit compile_network(const BooleanNetwork& net, const GateParams& params,
                                GateMode mode) {
  net.validate();
  CircuitBuilder builder(params, mode);
  for (const auto& v : net.variables) builder.add_bidder(v);
  for (const auto& c : net.constraints) builder.add_nor_gate(c.inputs, c.output);
  if (mode == GateMode::full) {
    for (const auto& v : net.variables) builder.add_floor_gadget(v);
    for (const auto& v : net.variables) {
      double M = params.M_override;
      if (M <= 0.0)
        M = 10.0 * builder.total_value_of(v) / (params.ceiling - 1.0);
      builder.add_ceiling_gadget(v, M);
    }
  }
  return builder.finish(net.variables);
}

CompiledCircuit build_clock(int n, const GateParams& params, GateMode mode) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("the NOT-cycle clock needs an odd n >= 3");
  BooleanNetwork net;
  for (int i = 1; i <= n; ++i) net.variables.push_back("X" + std::to_string(i));
  for (int i = 1; i <= n; ++i)
    net.constraints.push_back({"X" + std::to_string(i),
                               {"X" + std::to_string(i % n + 1)}});
  return compile_network(net, params, mode);
}

std::vector<double> CompiledCircuit::initial_state(
    const std::vector<double>& variable_m) const {
  if (variable_m.size() != variables.size())
    throw std::invalid_argument("one multiplier per variable required");
  std::vector<double> m(instance.n_bidders(), 1.0);
  for (std::size_t k = 0; k < variables.size(); ++k) m[variable_indices[k]] = variable_m[k];
  for (const auto& [name, v] : aux_start) m[*instance.bidder_index(name)] = v;
  return m;
}

std::vector<double> CompiledCircuit::random_initial_state(std::uint64_t seed) const {
  auto rng = make_rng(derive_seed(seed, "circuit-m0"));
  std::uniform_real_distribution<double> dist(params.floor, params.ceiling);
  std::vector<double> vm(variables.size());
  for (auto& v : vm) v = dist(rng);
  return initial_state(vm);
}

void CompiledCircuit::apply_bounds(IntegrateOptions& opt) const {
  opt.lower_bounds = lower_bounds;
  opt.upper_bounds = upper_bounds;
}

std::vector<double> CompiledCircuit::variable_state(const std::vector<double>& m) const {
  std::vector<double> out;
  out.reserve(variables.size());
  for (std::size_t idx : variable_indices) out.push_back(m.at(idx));
  return out;
}

std::vector<bool> read_assignment(const std::vector<double>& m,
                                  const std::vector<std::size_t>& variable_indices,
                                  double threshold) {
  std::vector<bool> out;
  out.reserve(variable_indices.size());
  for (std::size_t idx : variable_indices) out.push_back(m.at(idx) > threshold);
  return out;
}

std::vector<bool> read_assignment(const CompiledCircuit& cc, const std::vector<double>& m) {
  return read_assignment(m, cc.variable_indices, cc.params.threshold);
}

std::vector<double> assignment_multipliers(const CompiledCircuit& cc,
                                           const std::vector<bool>& assignment) {
  if (assignment.size() != cc.variables.size())
    throw std::invalid_argument("assignment length mismatch");
  std::vector<double> vm(assignment.size());
  for (std::size_t k = 0; k < assignment.size(); ++k)
    vm[k] = assignment[k] ? cc.params.high : cc.params.low;
  return cc.initial_state(vm);
}

}  // namespace rosdyn::circuit
