#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rosdyn/analysis.hpp"
#include "rosdyn/builders.hpp"
#include "rosdyn/rng.hpp"

using namespace rosdyn;
using namespace rosdyn::analysis;

namespace {

// Synthetic two-coordinate trajectory from closed-form coordinate functions;
// utilities are filled with the derivatives so equilibrium detection fails
// unless the signal really is flat.
template <typename FX, typename FY, typename DX, typename DY>
Trajectory synthetic(double T, double dt, FX fx, FY fy, DX dx, DY dy) {
  Trajectory traj;
  traj.bidder_names = {"a", "b"};
  for (double t = 0.0; t <= T + 1e-12; t += dt) {
    traj.times.push_back(t);
    traj.states.push_back({fx(t), fy(t)});
    traj.utilities.push_back({dx(t), dy(t)});
  }
  return traj;
}

Trajectory circle_osc(double period, double T, double dt) {
  const double w = 2.0 * std::numbers::pi / period;
  return synthetic(
      T, dt, [&](double t) { return 1.5 - 0.4 * std::cos(w * t); },
      [&](double t) { return 1.5 - 0.4 * std::sin(w * t); },
      [&](double t) { return 0.4 * w * std::sin(w * t); },
      [&](double t) { return -0.4 * w * std::cos(w * t); });
}

}  // namespace

TEST_CASE("equilibrium detection") {
  const auto flat = synthetic(
      20.0, 0.1, [](double) { return 1.7; }, [](double) { return 2.2; },
      [](double) { return 0.0; }, [](double) { return 0.0; });
  const auto eq = detect_equilibrium(flat);
  REQUIRE(eq.has_value());
  CHECK((*eq)[0] == 1.7);

  const auto moving = circle_osc(2.0 * std::numbers::pi, 40.0, 0.05);
  CHECK(!detect_equilibrium(moving).has_value());

  Trajectory tiny = flat;
  tiny.times.resize(3);
  tiny.states.resize(3);
  tiny.utilities.resize(3);
  CHECK_THROWS(detect_equilibrium(tiny));  // shorter than the window
}

TEST_CASE("period detection recovers known periods within 1%") {
  for (double period : {1.0, 2.0 * std::numbers::pi, 10.0}) {
    const auto traj = circle_osc(period, 8.0 * period, period / 200.0);
    const auto got = detect_period(traj);
    REQUIRE(got.has_value());
    CHECK(std::abs(*got - period) / period < 0.01);
  }
  // constant trajectories yield nothing
  const auto flat = synthetic(
      20.0, 0.1, [](double) { return 1.0; }, [](double) { return 1.0; },
      [](double) { return 0.0; }, [](double) { return 0.0; });
  CHECK(!detect_period(flat).has_value());
}

TEST_CASE("rational approximation test") {
  CHECK(has_rational_approximation(0.5, 20, 1e-3));
  CHECK(has_rational_approximation(2.0 / 3.0 + 5e-4, 20, 1e-3));
  const double golden_inverse = 2.0 / (1.0 + std::sqrt(5.0));
  CHECK(!has_rational_approximation(golden_inverse, 20, 1e-3));
}

TEST_CASE("classification hierarchy") {
  SUBCASE("flat orbit is an equilibrium") {
    const auto flat = synthetic(
        30.0, 0.05, [](double) { return 1.2; }, [](double) { return 3.0; },
        [](double) { return 0.0; }, [](double) { return 0.0; });
    CHECK(classify_orbit(flat).kind == OrbitClass::Kind::equilibrium);
  }
  SUBCASE("a plain cycle is periodic, never quasi-periodic") {
    const auto traj = circle_osc(2.0 * std::numbers::pi, 80.0, 0.02);
    const auto orbit = classify_orbit(traj);
    REQUIRE(orbit.kind == OrbitClass::Kind::periodic);
    CHECK(std::abs(orbit.period - 2.0 * std::numbers::pi) / (2.0 * std::numbers::pi) < 0.01);
    CHECK(orbit.amplitude[0] == doctest::Approx(0.4).epsilon(0.02));
  }
  SUBCASE("two incommensurate tones classify as quasi-periodic") {
    const double f1 = 1.0;
    const double f2 = 2.0 / (1.0 + std::sqrt(5.0));  // inverse golden ratio
    const auto traj = synthetic(
        400.0, 0.05,
        [&](double t) { return 2.0 + 0.3 * std::sin(2.0 * std::numbers::pi * f1 * t); },
        [&](double t) { return 2.0 + 0.3 * std::sin(2.0 * std::numbers::pi * f2 * t); },
        [&](double t) { return 0.3 * 2.0 * std::numbers::pi * f1 *
                               std::cos(2.0 * std::numbers::pi * f1 * t); },
        [&](double t) { return 0.3 * 2.0 * std::numbers::pi * f2 *
                               std::cos(2.0 * std::numbers::pi * f2 * t); });
    const auto orbit = classify_orbit(traj);
    REQUIRE(orbit.kind == OrbitClass::Kind::quasi_periodic);
    REQUIRE(orbit.frequencies.size() == 2);
    const double ratio = orbit.frequencies[1] / orbit.frequencies[0];
    CHECK(std::abs(ratio - f2 / f1) < 5e-3);
  }
}

TEST_CASE("random projections") {
  const auto traj = circle_osc(5.0, 20.0, 0.05);

  SUBCASE("identity rows return the path itself") {
    const auto proj = project(traj, {1.0, 0.0}, {0.0, 1.0});
    for (std::size_t k = 0; k < traj.n_samples(); ++k) {
      CHECK(proj.points[k][0] == traj.states[k][0]);
      CHECK(proj.points[k][1] == traj.states[k][1]);
    }
  }
  SUBCASE("same seed gives identical paths") {
    const auto a = random_projection(traj, 12);
    const auto b = random_projection(traj, 12);
    CHECK(a.points == b.points);
    CHECK(a.row_x == b.row_x);
  }
  SUBCASE("projection norm bound") {
    const auto proj = random_projection(traj, 12);
    // spectral norm of the 2 x n matrix from its 2x2 gram matrix
    double gxx = 0.0, gxy = 0.0, gyy = 0.0, orbit_bound = 0.0;
    for (std::size_t i = 0; i < proj.row_x.size(); ++i) {
      gxx += proj.row_x[i] * proj.row_x[i];
      gxy += proj.row_x[i] * proj.row_y[i];
      gyy += proj.row_y[i] * proj.row_y[i];
    }
    const double tr = gxx + gyy, det = gxx * gyy - gxy * gxy;
    const double norm = std::sqrt(0.5 * (tr + std::sqrt(tr * tr - 4.0 * det)));
    for (const auto& st : traj.states)
      orbit_bound = std::max(orbit_bound, std::hypot(st[0], st[1]));
    for (const auto& p : proj.points)
      CHECK(std::hypot(p[0], p[1]) <= norm * orbit_bound + 1e-9);
  }
}

TEST_CASE("bistability scan on a no-item instance") {
  MarketInstance inst;
  inst.bidder_names = {"a", "b"};
  IntegrateOptions opt;
  opt.horizon = 15.0;
  const auto scan = bistability_scan(inst, 5, 1.0, 3.0, 77, opt);
  CHECK(scan.n_converged == 5);
  CHECK(scan.clusters.size() == 5);  // every start is its own equilibrium
  int hits = 0;
  for (const auto& c : scan.clusters) hits += c.hits;
  CHECK(hits == 5);

  SUBCASE("cluster count ignores the order of the starts") {
    std::vector<std::vector<double>> starts{{1.0, 1.0}, {2.0, 2.0}, {1.0, 1.0}, {2.5, 1.1}};
    const auto s1 = bistability_scan_from(inst, starts, opt);
    std::rotate(starts.begin(), starts.begin() + 2, starts.end());
    const auto s2 = bistability_scan_from(inst, starts, opt);
    CHECK(s1.clusters.size() == s2.clusters.size());
    CHECK(s1.clusters.size() == 3);
  }
}

TEST_CASE("stability checker edge cases") {
  SUBCASE("isolated bidders are vacuously stable anywhere") {
    MarketInstance inst;
    inst.bidder_names = {"a", "b"};
    StabilitySettings s;
    s.samples = 10;
    const auto report =
        check_coordinatewise_stability(inst, std::vector<double>{1.7, 2.9}, s);
    CHECK(report.is_equilibrium);
    CHECK(report.stable);
  }
  SUBCASE("drifting points are rejected as non-equilibria") {
    MarketInstance inst;
    inst.bidder_names = {"i", "peg"};
    ItemSpec item;
    item.values["i"] = ValueSpec::fixed(2.1);
    item.values["peg"] = ValueSpec::fixed(1.0);
    inst.items.push_back(item);
    StabilitySettings s;
    const auto report =
        check_coordinatewise_stability(inst, std::vector<double>{1.5, 2.0}, s);
    CHECK(!report.is_equilibrium);
  }
}

TEST_CASE("lambda sweep rows carry ranges and convergence flags") {
  // cheap family: the two-bidder cycle converges at every lambda
  IntegrateOptions opt;
  opt.sample_every = 0.05;
  const auto rows = lambda_sweep(
      [](double lambda) {
        auto inst = build_cycle(2, 7);
        inst.lambda = lambda;
        return inst;
      },
      {0.0, 1.0}, 80.0, 0.5, 5, opt);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].lambda == 0.0);
  CHECK(rows[0].converged);
  CHECK(rows[0].m1_max - rows[0].m1_min < 1e-3);
  // first price drives the multiplier to 1
  CHECK(std::abs(rows[0].m1_max - 1.0) < 1e-3);
}
