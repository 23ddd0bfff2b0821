#include <cmath>

#include "doctest.h"
#include "rosdyn/analysis.hpp"
#include "rosdyn/circuit.hpp"
#include "rosdyn/cli.hpp"
#include "rosdyn/utility.hpp"

using namespace rosdyn;
using namespace rosdyn::circuit;

TEST_CASE("default gate parameters satisfy the full relation chain") {
  const auto p = default_gate_params();
  CHECK(p.low == 1.5);
  CHECK(p.high == 3.0);
  CHECK(p.T() == doctest::Approx(2.1));
  CHECK(p.C() == doctest::Approx(3.15));
  // ordering chain
  CHECK(1.0 <= p.floor);
  CHECK(p.floor < p.low);
  CHECK(p.low <= p.threshold);
  CHECK(p.threshold < p.high);
  CHECK(p.high == p.ceiling);
  CHECK(p.ceiling < p.low * p.threshold);
  // gate balance relations
  CHECK(p.T() - p.low * p.V >= 0.0);             // winning both items pays off
  CHECK(p.low * p.T() == p.C());                 // exact tie at the low point
  CHECK(p.floor * p.C() > p.ceiling * p.V);      // output always wins the cheap item
  CHECK(p.C() - p.ceiling * p.V > 0.0);
  CHECK(p.T() - p.threshold * p.V <= 0.0);

  GateParams bad = p;
  bad.threshold = 3.5;
  CHECK_THROWS(bad.validate());
  bad = p;
  bad.floor = 0.9;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("network parsing and structure") {
  const auto net = parse_network("X = NOR(Y, Z)\nY = NOR(Z, X)\n# comment\nZ = NOR(X, Y)\n");
  CHECK(net.variables == std::vector<std::string>{"X", "Y", "Z"});
  CHECK(!net.acyclic());
  CHECK_THROWS(net.evaluate());

  const auto acyclic = cli::acyclic3_network();
  CHECK(acyclic.acyclic());
  CHECK(acyclic.evaluate() == std::vector<bool>{true, false, false});

  CHECK_THROWS(parse_network("X = NOT(A, B)\nA = NOR()\nB = NOR()\n"));
  CHECK_THROWS(parse_network("X = NOR(Y)\n"));          // Y undeclared
  CHECK_THROWS(parse_network("X = AND(X)\n"));          // unknown gate
  CHECK_THROWS(parse_network("X = NOR()\nX = NOR()\n"));  // two constraints
  CHECK_NOTHROW(parse_network("X = NOR()\n"));          // constant true gate
}

namespace {

// A lone gate in simplified mode: inputs are bidders with no winning items,
// so their gradient is exactly zero and we can pin them anywhere.
CompiledCircuit lone_gate(int k) {
  CircuitBuilder builder(default_gate_params(), GateMode::simplified);
  std::vector<std::string> inputs;
  for (int i = 0; i < k; ++i) inputs.push_back("x" + std::to_string(i + 1));
  builder.add_bidder("y");
  for (const auto& in : inputs) builder.add_bidder(in);
  builder.add_nor_gate(inputs, "y");
  std::vector<std::string> vars{"y"};
  return builder.finish(vars);
}

}  // namespace

TEST_CASE("single gate gradient table") {
  const auto cc = lone_gate(2);
  const auto& inst = cc.instance;
  const auto yi = *inst.bidder_index("y");
  const auto p = cc.params;
  const UtilityEngine engine(inst);

  int checked = 0;
  for (double x1 = 1.2; x1 <= 3.01; x1 += 0.2) {
    for (double y = 1.2; y <= 3.01; y += 0.2) {
      std::vector<double> m(inst.n_bidders());
      m[*inst.bidder_index("x1")] = x1;
      m[*inst.bidder_index("x2")] = 1.25;
      m[yi] = y;
      const auto u = engine.utilities(m);
      // input bidders never win, so their gradient is identically zero
      CHECK(u[*inst.bidder_index("x1")] == 0.0);
      CHECK(u[*inst.bidder_index("x2")] == 0.0);
      const double xmax = std::max(x1, 1.25);
      if (xmax < p.threshold - 1e-9) {
        CHECK(u[yi] > 0.0);  // pulled toward high
      } else if (xmax > p.threshold + 1e-9) {
        if (y <= p.low)
          CHECK(u[yi] > 0.0);  // pulled up toward low
        else
          CHECK(u[yi] < 0.0);  // pushed down toward low
      }
      ++checked;
    }
  }
  CHECK(checked >= 100);

  SUBCASE("threshold-straddling inputs leave a flat band") {
    std::vector<double> m(inst.n_bidders());
    m[*inst.bidder_index("x1")] = p.threshold;
    m[*inst.bidder_index("x2")] = 1.3;
    for (double y : {1.7, 2.0, 2.5, 2.9}) {
      m[yi] = y;
      CHECK(engine.utilities(m)[yi] == 0.0);
    }
    m[yi] = 1.3;  // below low the pull is still upward
    CHECK(engine.utilities(m)[yi] > 0.0);
  }

  SUBCASE("zero-input gate is a constant true source") {
    const auto tt = lone_gate(0);
    const UtilityEngine e2(tt.instance);
    const auto yidx = *tt.instance.bidder_index("y");
    for (double y : {1.2, 1.5, 2.0, 2.9}) {
      std::vector<double> m(tt.instance.n_bidders(), y);
      CHECK(e2.utilities(m)[yidx] > 0.0);
    }
  }

  SUBCASE("inputs pinned at the ceiling push the output below low") {
    std::vector<double> m(inst.n_bidders());
    m[*inst.bidder_index("x1")] = p.ceiling;
    m[*inst.bidder_index("x2")] = p.ceiling;
    for (double y : {1.6, 2.0, 3.0}) {
      m[yi] = y;
      CHECK(engine.utilities(m)[yi] < 0.0);
    }
  }
}

TEST_CASE("reserve gadget") {
  // full-mode gate: the H item's reserve C is realized by two aux bidders
  CircuitBuilder builder(default_gate_params(), GateMode::full);
  builder.add_bidder("y");
  builder.add_bidder("x1");
  builder.add_nor_gate({"x1"}, "y");
  auto cc = builder.finish({"y"});
  const auto& inst = cc.instance;
  const auto p = cc.params;
  REQUIRE(inst.n_bidders() == 4);  // y, x1, res_y_1, res_y_2
  const UtilityEngine engine(inst);

  // at the designed fixed point both aux utilities vanish for any gate state
  for (double y : {1.3, 1.5, 2.4, 3.0}) {
    std::vector<double> m(inst.n_bidders(), 1.0);
    m[*inst.bidder_index("y")] = y;
    m[*inst.bidder_index("x1")] = 1.4;
    const auto u = engine.utilities(m);
    CHECK(u[*inst.bidder_index("res_y_1")] == 0.0);
    CHECK(u[*inst.bidder_index("res_y_2")] == 0.0);
  }

  // the aux pair reproduces the native reserve: winning H costs exactly C
  {
    std::vector<double> m(inst.n_bidders(), 1.0);
    m[*inst.bidder_index("x1")] = 3.0;  // input high: y pushed to low
    m[*inst.bidder_index("y")] = 2.0;
    const auto u = engine.utilities(m);
    // wins L at price 3 and H at price C: (C - 3) + (T - C)
    CHECK(u[*inst.bidder_index("y")] ==
          doctest::Approx(p.C() - 3.0 + p.T() - p.C()).epsilon(1e-12));
  }

  SUBCASE("a zero reserve leaves the gadget inert") {
    CircuitBuilder b2(default_gate_params(), GateMode::full);
    b2.add_bidder("a");
    ItemSpec item;
    item.values["a"] = ValueSpec::fixed(1.0);
    // free item, then expanded: aux bidders get no value on it
    MarketInstance probe;
    b2.add_floor_gadget("a");  // contains the free F item
    auto built = b2.finish({"a"});
    for (const auto& it : built.instance.items) {
      if (it.values.count("a") && it.values.at("a").value == built.params.floor - 1.0) {
        CHECK(it.values.size() == 1);  // nobody else bids on the free item
      }
    }
  }
}

TEST_CASE("ceiling gadget caps the multiplier") {
  CircuitBuilder builder(default_gate_params(), GateMode::simplified);
  builder.add_bidder("a");
  ItemSpec sweet;  // something the bidder likes, to have positive drift
  sweet.values["a"] = ValueSpec::fixed(1.0);
  const double M = 50.0;
  builder.add_ceiling_gadget("a", M);
  auto cc = builder.finish({"a"});
  const auto& inst = cc.instance;
  const UtilityEngine engine(inst);
  const double ceiling = cc.params.ceiling;

  // exactly at the ceiling the tie goes against the bidder: no contribution
  CHECK(engine.utilities(std::vector<double>{ceiling})[0] == 0.0);
  // above it, winning the reserve item dominates everything else
  const double above = engine.utilities(std::vector<double>{ceiling + 0.01})[0];
  CHECK(above <= -(ceiling - 1.0) * M + 1e-9);
}

TEST_CASE("floor gadget guarantees lift below the floor") {
  CircuitBuilder builder(default_gate_params(), GateMode::simplified);
  builder.add_bidder("a");
  builder.add_floor_gadget("a");
  auto cc = builder.finish({"a"});
  const UtilityEngine engine(cc.instance);
  const double fl = cc.params.floor;

  for (double m : {1.0, 1.1}) {
    // wins only the free item: + (floor - 1)
    CHECK(engine.utilities(std::vector<double>{m})[0] ==
          doctest::Approx(fl - 1.0).epsilon(1e-12));
  }
  for (double m : {fl, 1.5, 2.0}) {
    // wins both: (1 - floor) + (floor - 1) = 0
    CHECK(engine.utilities(std::vector<double>{m})[0] == doctest::Approx(0.0));
  }
}

TEST_CASE("full-mode compilation of the three-gate network") {
  const auto cc = compile_network(cli::nor3_network(), default_gate_params(), GateMode::full);
  CHECK(cc.instance.n_bidders() == 21);
  CHECK(cc.variables == std::vector<std::string>{"X", "Y", "Z"});
  CHECK(validate_instance(cc.instance).empty());

  SUBCASE("empty network compiles to an empty instance") {
    BooleanNetwork empty;
    const auto e = compile_network(empty, default_gate_params(), GateMode::full);
    CHECK(e.instance.n_bidders() == 0);
    CHECK(e.instance.items.empty());
  }
  SUBCASE("simplified mode carries bounds instead of gadgets") {
    const auto s =
        compile_network(cli::nor3_network(), default_gate_params(), GateMode::simplified);
    CHECK(s.instance.n_bidders() == 3);
    REQUIRE(s.lower_bounds.has_value());
    CHECK((*s.lower_bounds)[0] == s.params.floor);
    CHECK((*s.upper_bounds)[2] == s.params.ceiling);
  }
}

TEST_CASE("reading assignments off multipliers") {
  const std::vector<std::size_t> idx{0, 1, 2};
  CHECK(read_assignment({3.0, 1.5, 1.5}, idx, 2.1) ==
        std::vector<bool>{true, false, false});
  CHECK(read_assignment({1.5, 1.5, 1.5}, idx, 2.1) ==
        std::vector<bool>{false, false, false});
  // exact threshold reads as false
  CHECK(read_assignment({2.1, 2.2, 2.0}, idx, 2.1) ==
        std::vector<bool>{false, true, false});
}

TEST_CASE("clock construction") {
  const auto c3 = build_clock(3, default_gate_params(), GateMode::full);
  CHECK(c3.variables.size() == 3);
  for (const auto& item : c3.instance.items) CHECK(!item.is_smooth());
  const auto c9 = build_clock(9, default_gate_params(), GateMode::simplified);
  CHECK(c9.variables.size() == 9);
  CHECK_THROWS(build_clock(4, default_gate_params(), GateMode::full));
  CHECK_THROWS(build_clock(1, default_gate_params(), GateMode::full));
}

TEST_CASE("boolean points are equilibria exactly when they satisfy the network") {
  const auto net = cli::nor3_network();
  const auto cc = compile_network(net, default_gate_params(), GateMode::full);
  analysis::StabilitySettings settings;
  settings.samples = 4;  // only the equilibrium precondition matters here
  settings.seed = 2;

  for (int bits = 0; bits < 8; ++bits) {
    std::vector<bool> assign{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
    // satisfied iff every constraint holds
    bool satisfies = true;
    for (const auto& c : net.constraints) {
      bool any = false;
      for (const auto& in : c.inputs) {
        const auto pos = std::find(net.variables.begin(), net.variables.end(), in) -
                         net.variables.begin();
        any = any || assign[pos];
      }
      const auto pos = std::find(net.variables.begin(), net.variables.end(), c.output) -
                       net.variables.begin();
      if (assign[pos] != !any) satisfies = false;
    }
    const auto m = assignment_multipliers(cc, assign);
    const auto report = analysis::check_coordinatewise_stability(cc.instance, m, settings);
    CHECK(report.is_equilibrium == satisfies);
  }
}

TEST_CASE("coordinate-wise stability of the gate-level system") {
  const auto cc =
      compile_network(cli::nor3_network(), default_gate_params(), GateMode::simplified);
  analysis::StabilitySettings settings;
  settings.samples = 50;
  settings.seed = 11;

  SUBCASE("satisfying assignment is stable") {
    const auto m = assignment_multipliers(cc, {true, false, false});
    const auto report = analysis::check_coordinatewise_stability(
        cc.instance, m, settings, cc.lower_bounds, cc.upper_bounds);
    CHECK(report.is_equilibrium);
    CHECK(report.stable);
  }
  SUBCASE("threshold-straddling point is an unstable equilibrium") {
    const std::vector<double> m(3, cc.params.threshold);
    const auto report = analysis::check_coordinatewise_stability(
        cc.instance, m, settings, cc.lower_bounds, cc.upper_bounds);
    CHECK(report.is_equilibrium);
    CHECK(!report.stable);
    CHECK(!report.witness_point.empty());
  }
  SUBCASE("the all-low point is not an equilibrium at all") {
    const auto m = assignment_multipliers(cc, {false, false, false});
    const auto report = analysis::check_coordinatewise_stability(
        cc.instance, m, settings, cc.lower_bounds, cc.upper_bounds);
    CHECK(!report.is_equilibrium);
    CHECK(!report.stable);
  }
}
