#include <cmath>
#include <complex>

#include "doctest.h"
#include "rosdyn/cli.hpp"
#include "rosdyn/dynamics.hpp"
#include "rosdyn/linear.hpp"
#include "rosdyn/rng.hpp"
#include "rosdyn/utility.hpp"

using namespace rosdyn;
using namespace rosdyn::linear;
using Complex = std::complex<double>;

namespace {

Eigen::Vector4cd probe_vector() {
  Eigen::Vector4cd u;
  u << Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1);
  return u;
}

Eigen::MatrixXd random_diagonalizable(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  while (true) {
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = entry(rng);
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    if (sv(n - 1) > 1e-3 * sv(0)) return A;
  }
}

}  // namespace

TEST_CASE("nonnegative matrix with a prescribed eigenvalue") {
  SUBCASE("both displayed sign cases") {
    Eigen::Matrix4d M = nonneg_for_eigenvalue(Complex(2.0, 3.0));
    Eigen::Matrix4d want;
    want << 2, 3, 0, 0, 0, 2, 3, 0, 0, 0, 2, 3, 3, 0, 0, 2;
    CHECK(M == want);
    M = nonneg_for_eigenvalue(Complex(-2.0, 3.0));
    want << 0, 3, 2, 0, 0, 0, 3, 2, 2, 0, 0, 3, 3, 2, 0, 0;
    CHECK(M == want);
    CHECK(nonneg_for_eigenvalue(Complex(0.0, 0.0)) == Eigen::Matrix4d::Zero());
  }
  SUBCASE("(1, i, -1, -i) is an eigenvector for any complex value") {
    auto rng = make_rng(derive_seed(4, "nonneg-eigen"));
    std::uniform_real_distribution<double> entry(-5.0, 5.0);
    const auto u = probe_vector();
    for (int t = 0; t < 20; ++t) {
      const Complex lambda(entry(rng), entry(rng));
      const Eigen::Matrix4d M = nonneg_for_eigenvalue(lambda);
      CHECK(M.minCoeff() >= 0.0);
      const Eigen::Vector4cd err = M.cast<Complex>() * u - lambda * u;
      CHECK(err.norm() <= 1e-12);
    }
  }
}

TEST_CASE("jordan lift") {
  SUBCASE("multiplicity one reduces to the eigenvalue construction") {
    const auto M = jordan_lift(Complex(2.0, 0.0), 1);
    CHECK(M == nonneg_for_eigenvalue(Complex(2.0, 0.0)));
    CHECK(realizes_jordan_block(M, Complex(2.0, 0.0), 1));
  }
  SUBCASE("an 8x8 lift realizes a true multiplicity-2 block at i") {
    const auto M = jordan_lift(Complex(0.0, 1.0), 2);
    REQUIRE(M.rows() == 8);
    CHECK(M.minCoeff() >= 0.0);
    CHECK(realizes_jordan_block(M, Complex(0.0, 1.0), 2));
    // minimal polynomial divisible by (x - i)^2, not just (x - i)
    CHECK(realizes_jordan_block(M, Complex(0.0, 1.0), 1));
  }
  SUBCASE("entries stay nonnegative for random inputs") {
    auto rng = make_rng(derive_seed(6, "jordan-nonneg"));
    std::uniform_real_distribution<double> entry(-3.0, 3.0);
    std::uniform_int_distribution<int> mult(1, 3);
    for (int t = 0; t < 10; ++t) {
      const auto M = jordan_lift(Complex(entry(rng), entry(rng)), mult(rng));
      CHECK(M.minCoeff() >= 0.0);
    }
  }
  CHECK_THROWS(jordan_lift(Complex(1.0, 0.0), 0));
}

TEST_CASE("purely competitive matrices from jordan specs") {
  const std::vector<JordanBlockSpec> spec{{Complex(0, 1), 1}, {Complex(0, -1), 1}};
  const auto B = purely_competitive_from_jordan(spec);
  CHECK(is_purely_competitive(B));
  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(B);
  bool has_i = false, has_minus_i = false;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()(k) - Complex(0, 1)) < 1e-9) has_i = true;
    if (std::abs(es.eigenvalues()(k) - Complex(0, -1)) < 1e-9) has_minus_i = true;
  }
  CHECK(has_i);
  CHECK(has_minus_i);

  CHECK(is_purely_competitive(purely_competitive_from_jordan({{Complex(0, 0), 1}})));
  auto rng = make_rng(derive_seed(61, "pure-competitive"));
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  for (int t = 0; t < 5; ++t) {
    const auto M = purely_competitive_from_jordan(
        {{Complex(entry(rng), entry(rng)), 1}, {Complex(entry(rng), 0.0), 2}});
    CHECK(is_purely_competitive(M));
  }
}

TEST_CASE("competitive embedding") {
  SUBCASE("the planar rotation maps to the 4x4 negative cycle") {
    Eigen::MatrixXd A(2, 2);
    A << 0, -1, 1, 0;
    const auto emb = competitive_embedding(A);
    REQUIRE(emb.B.rows() == 4);
    Eigen::MatrixXd want(4, 4);
    want << 0, -1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1, -1, 0, 0, 0;
    CHECK((emb.B - want).cwiseAbs().maxCoeff() == 0.0);
    CHECK(emb.residual <= 1e-12);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(emb.T);
    CHECK(svd.singularValues()(1) > 1e-10);
  }
  SUBCASE("already purely competitive matrices embed as themselves") {
    Eigen::MatrixXd A(2, 2);
    A << 0, -0.5, -0.25, 0;
    const auto emb = competitive_embedding(A);
    CHECK(emb.B == A);
    CHECK(emb.T == Eigen::MatrixXd::Identity(2, 2));
  }
  SUBCASE("seeded diagonalizable matrices intertwine to 1e-10") {
    auto rng = make_rng(derive_seed(7, "embed-random"));
    for (int t = 0; t < 10; ++t) {
      const int n = 2 + int(t % 3);
      const auto A = random_diagonalizable(rng, n);
      const auto emb = competitive_embedding(A);
      CHECK(is_purely_competitive(emb.B));
      CHECK((emb.T * A - emb.B * emb.T).norm() <= 1e-10 * std::max(1.0, A.norm()));
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(emb.T);
      CHECK(svd.singularValues()(n - 1) > 1e-10 * svd.singularValues()(0));
    }
  }
  SUBCASE("defective matrices are rejected with a condition diagnostic") {
    Eigen::MatrixXd A(2, 2);
    A << 1, 1, 0, 1;  // Jordan block, not diagonalizable
    CHECK_THROWS_WITH_AS(static_cast<void>(competitive_embedding(A)),
                         doctest::Contains("Jordan"), std::invalid_argument);
  }
  SUBCASE("exact jordan mode handles a supplied chain basis") {
    // A itself a Jordan block with eigenvalue 2: chain e1, e2
    Eigen::MatrixXd A(2, 2);
    A << 2, 1, 0, 2;
    const std::vector<JordanBlockSpec> blocks{{Complex(2, 0), 2}};
    const Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(2, 2);
    const auto emb = competitive_embedding(A, blocks, P);
    CHECK(is_purely_competitive(emb.B));
    CHECK((emb.T * A - emb.B * emb.T).norm() <= 1e-10);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(emb.T);
    CHECK(svd.singularValues()(1) > 1e-10 * svd.singularValues()(0));
    // nilpotent blocks cannot be realized by the lift
    CHECK_THROWS(competitive_embedding(A, {{Complex(0, 0), 2}}, P));
  }
}

TEST_CASE("compiling competitive systems to markets") {
  SUBCASE("zero matrix compiles to the bare auxiliary pair") {
    const auto compiled =
        compile_competitive_to_ros(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2));
    CHECK(compiled.instance.n_bidders() == 4);
    CHECK(compiled.instance.items.size() == 2);  // just the mutual aux items
    const auto u = utilities(compiled.instance, std::vector<double>{1.5, 1.5, 2.0, 2.0});
    for (double v : u) CHECK(v == 0.0);
  }
  SUBCASE("a single off-diagonal entry reproduces B(m - b) exactly") {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
    B(0, 1) = -0.3;
    const auto compiled = compile_competitive_to_ros(B, Eigen::VectorXd::Zero(2));
    const auto u = utilities(compiled.instance, std::vector<double>{1.5, 1.7, 2.0, 2.0});
    CHECK(u[0] == doctest::Approx(-0.3 * 1.7).epsilon(1e-14));
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.0);
    CHECK(u[3] == 0.0);
  }
  SUBCASE("compiled utilities equal B(m - b) across sampled box points") {
    auto rng = make_rng(derive_seed(9, "compile-box"));
    std::uniform_real_distribution<double> entry(0.0, 1.0), box(1.1, 1.9);
    for (int t = 0; t < 5; ++t) {
      const int n = 3;
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && entry(rng) < 0.7) B(i, j) = -entry(rng);
      Eigen::VectorXd b(n);
      for (int i = 0; i < n; ++i) b(i) = 1.1 + 0.8 * entry(rng);
      const auto compiled = compile_competitive_to_ros(B, b);
      const UtilityEngine engine(compiled.instance);
      for (int s = 0; s < 20; ++s) {
        std::vector<double> m(n + 2, 2.0);
        Eigen::VectorXd mv(n);
        for (int i = 0; i < n; ++i) {
          mv(i) = box(rng);
          m[i] = mv(i);
        }
        const auto u = engine.utilities(m);
        const Eigen::VectorXd want = B * (mv - b);
        for (int i = 0; i < n; ++i) CHECK(u[i] == doctest::Approx(want(i)).epsilon(1e-12));
        CHECK(u[n] == 0.0);
        CHECK(u[n + 1] == 0.0);
      }
    }
  }
}

TEST_CASE("simulating linear systems end to end") {
  SUBCASE("zero matrix: constant reference and constant compiled trajectory") {
    LinearSystem sys;
    sys.A = Eigen::MatrixXd::Zero(2, 2);
    sys.x0 = Eigen::VectorXd::Constant(2, 0.3);
    sys.horizon = 5.0;
    const auto sim = simulate_linear(sys);
    IntegrateOptions opt;
    opt.horizon = 5.0;
    const auto traj = integrate(sim.instance, sim.m0, opt);
    for (const auto& st : traj.states)
      for (std::size_t i = 0; i < st.size(); ++i)
        CHECK(st[i] == doctest::Approx(sim.m0[i]).epsilon(1e-12));
  }
  SUBCASE("random stable system matches the matrix-exponential oracle") {
    auto rng = make_rng(derive_seed(13, "simulate-stable"));
    Eigen::MatrixXd A(2, 2);
    A << -0.4, 0.3, -0.2, -0.5;  // eigenvalues in the left half plane
    LinearSystem sys{A, Eigen::Vector2d(1.0, -0.5), 10.0};
    const auto sim = simulate_linear(sys);
    (void)rng;

    IntegrateOptions opt;
    opt.horizon = 10.0;
    opt.dt = 0.005;
    opt.sample_every = 0.1;
    const auto traj = integrate(sim.instance, sim.m0, opt);

    const auto xs = matrix_exponential_orbit(A, sys.x0, traj.times);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.n_samples(); ++k) {
      const Eigen::VectorXd want = sim.map.offset + sim.map.scale * (sim.T * xs[k]);
      for (int i = 0; i < want.size(); ++i)
        worst = std::max(worst, std::abs(traj.states[k][i] - want(i)));
    }
    CHECK(worst <= 1e-3);
  }
  SUBCASE("explicit map must fit the operating box") {
    LinearSystem sys;
    sys.A.resize(2, 2);
    sys.A << 0, -1, 1, 0;
    sys.x0 = Eigen::Vector2d(1.0, 0.0);
    sys.horizon = 10.0;
    Eigen::MatrixXd T(4, 2);
    T << -1, 0, 0, -1, 1, 0, 0, 1;
    AffineMap bad;
    bad.scale = 2.0;  // would leave (1.1, 1.9)
    bad.offset = Eigen::VectorXd::Constant(4, 1.5);
    CHECK_THROWS_WITH_AS(static_cast<void>(simulate_linear(sys, T, bad)),
                         doctest::Contains("operating box"), std::invalid_argument);
  }
}

TEST_CASE("the circle scenario reproduces the analytic orbit") {
  const auto sim = cli::circle_scenario();
  CHECK(sim.instance.n_bidders() == 6);
  CHECK(sim.instance.total_copies() == doctest::Approx(26.0));
  REQUIRE(sim.m0.size() == 6);
  const double expect_m0[] = {1.1, 1.5, 1.9, 1.5, 2.0, 2.0};
  for (int i = 0; i < 6; ++i) CHECK(sim.m0[i] == doctest::Approx(expect_m0[i]).epsilon(1e-12));

  IntegrateOptions opt;
  opt.horizon = 2.0 * 3.14159265358979323846;
  opt.dt = 1e-3;
  opt.sample_every = 0.05;
  const auto traj = integrate(sim.instance, sim.m0, opt);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.n_samples(); ++k) {
    const double t = traj.times[k];
    worst = std::max(worst, std::abs(traj.states[k][0] - (1.5 - 0.4 * std::cos(t))));
    worst = std::max(worst, std::abs(traj.states[k][1] - (1.5 - 0.4 * std::sin(t))));
  }
  CHECK(worst <= 1e-3);

  // residual shrinks monotonically under step refinement
  double prev = 1e9;
  for (double dt : {0.08, 0.04, 0.02}) {
    IntegrateOptions ref;
    ref.horizon = 4.0;
    ref.dt = dt;
    ref.sample_every = dt;
    const auto t2 = integrate(sim.instance, sim.m0, ref);
    double res = 0.0;
    for (double r : fundamental_identity_residual(t2)) res = std::max(res, std::abs(r));
    CHECK(res < prev);
    prev = res;
  }
}

TEST_CASE("rk4 order check on the circle") {
  const auto sim = cli::circle_scenario();
  const auto error_at = [&](double dt) {
    IntegrateOptions opt;
    opt.horizon = 3.0;
    opt.dt = dt;
    opt.sample_every = 3.0;
    const auto traj = integrate(sim.instance, sim.m0, opt);
    const double t = traj.times.back();
    double err = 0.0;
    err = std::max(err, std::abs(traj.states.back()[0] - (1.5 - 0.4 * std::cos(t))));
    err = std::max(err, std::abs(traj.states.back()[1] - (1.5 - 0.4 * std::sin(t))));
    return err;
  };
  const double e1 = error_at(0.2);
  const double e2 = error_at(0.1);
  const double e4 = error_at(0.05);
  // fourth order: halving dt twice divides the error by about 256 = 16^2;
  // allow a factor of 2 on each 16
  CHECK(e1 / e2 > 8.0);
  CHECK(e1 / e2 < 32.0);
  CHECK(e2 / e4 > 8.0);
  CHECK(e2 / e4 < 32.0);
}
