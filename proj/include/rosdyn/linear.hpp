#pragma once

// Lifts a linear system dx/dt = Ax into a purely competitive system
// dy/dt = By with TA = BT, then compiles the competitive system into an ROS
// market whose utilities satisfy U(m) = B(m - b) inside the operating box.

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rosdyn/market.hpp"

namespace rosdyn::linear {

struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd x0;
  double horizon = 10.0;
};

struct JordanBlockSpec {
  std::complex<double> eigenvalue;
  int multiplicity = 1;
};

struct CompetitiveEmbedding {
  Eigen::MatrixXd B;  // purely competitive: zero diagonal, off-diagonals <= 0
  Eigen::MatrixXd T;  // full column rank, TA = BT
  double residual = 0.0;
};

struct AffineMap {
  double scale = 1.0;
  Eigen::VectorXd offset;
};

// 4x4 nonnegative matrix with (1, i, -1, -i) as an eigenvector for lambda;
// works for every complex lambda by distributing |Re| and |Im| over powers of
// the cyclic shift.
Eigen::Matrix4d nonneg_for_eigenvalue(std::complex<double> lambda);

// Nonnegative matrix carrying a Jordan block (lambda, d): the d = 1 case is
// nonneg_for_eigenvalue, d > 1 the Kronecker product with the unit Jordan
// block. The construction genuinely realizes the block only for lambda != 0.
Eigen::MatrixXd jordan_lift(std::complex<double> lambda, int d);

// Rank-pattern check: M has at least one Jordan block of size >= d at lambda.
bool realizes_jordan_block(const Eigen::MatrixXd& M, std::complex<double> lambda, int d);

// Direct sum of jordan_lift outputs, Kronecker'd with [[0,-1],[-1,0]].
Eigen::MatrixXd purely_competitive_from_jordan(const std::vector<JordanBlockSpec>& spec);

bool is_purely_competitive(const Eigen::MatrixXd& B, double tol = 1e-12);

// Numerically diagonalizable route. Real eigenvalues get 2x2 blocks,
// complex pairs with nonnegative real part a 4x4 negative-circulant block,
// remaining pairs the Kronecker construction. Rejects ill-conditioned
// eigenbases, directing the caller to the exact-Jordan mode.
CompetitiveEmbedding competitive_embedding(const Eigen::MatrixXd& A,
                                           double condition_limit = 1e8);

// Exact-Jordan route: the caller supplies A's Jordan blocks and the chain
// basis P (A = P J P^{-1}, columns ordered block by block, each block's
// columns forming its chain).
CompetitiveEmbedding competitive_embedding(const Eigen::MatrixXd& A,
                                           const std::vector<JordanBlockSpec>& blocks,
                                           const Eigen::MatrixXcd& basis);

struct CompiledCompetitive {
  MarketInstance instance;  // n + 2 bidders: y1..yn plus auxA, auxB at 2
  AffineMap map;            // scale 1, offset b: U_i(m) = (B(m_{1..n} - b))_i
  std::vector<double> aux_multipliers;  // {2, 2}
  std::vector<double> initial_state(const Eigen::VectorXd& y0) const;
};

// Gadget compiler: mutual auxiliary items pin m_auxA = m_auxB = 2, each
// nonzero B_ik becomes a two-bidder item, and constant terms are met with
// stacks of 0.1-utility price-pressure items against auxA.
CompiledCompetitive compile_competitive_to_ros(const Eigen::MatrixXd& B,
                                               const Eigen::VectorXd& offset);

struct SimulatedLinear {
  MarketInstance instance;
  Eigen::MatrixXd B, T;
  AffineMap map;            // m_{1..n}(t) = map.offset + map.scale * T * x(t)
  std::vector<double> m0;
  std::vector<double> ref_times;
  std::vector<std::vector<double>> ref_multipliers;  // matrix-exponential oracle
};

// End-to-end pipeline. When explicit_T / explicit_map are given they are
// validated (intertwining, box fit) and used instead of the automatic fit.
SimulatedLinear simulate_linear(const LinearSystem& sys,
                                const std::optional<Eigen::MatrixXd>& explicit_T = std::nullopt,
                                const std::optional<AffineMap>& explicit_map = std::nullopt,
                                int ref_samples = 2048);

// Reference solution x(t) = exp(tA) x0 at the given times.
std::vector<Eigen::VectorXd> matrix_exponential_orbit(const Eigen::MatrixXd& A,
                                                      const Eigen::VectorXd& x0,
                                                      const std::vector<double>& times);

}  // namespace rosdyn::linear
