#include "rosdyn/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace rosdyn::linear {

namespace {

using Complex = std::complex<double>;

// Cyclic shift with wraparound: P e_{k} = e_{k-1}, i.e. (Pv)_j = v_{j+1}.
Eigen::Matrix4d shift_up() {
  Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
  P(0, 1) = P(1, 2) = P(2, 3) = P(3, 0) = 1.0;
  return P;
}

Eigen::MatrixXd unit_jordan_block(int d) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(d, d);
  for (int k = 0; k + 1 < d; ++k) J(k, k + 1) = 1.0;
  return J;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Eigen::Matrix2d competition_pair() {
  Eigen::Matrix2d S;
  S << 0.0, -1.0, -1.0, 0.0;
  return S;
}

int matrix_rank(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  const double tol = std::max(M.rows(), M.cols()) * 1e-12 * (sv.size() ? sv(0) : 0.0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r;
  return r;
}

}  // namespace

Eigen::Matrix4d nonneg_for_eigenvalue(Complex lambda) {
  const double re = lambda.real(), im = lambda.imag();
  const Eigen::Matrix4d P = shift_up();
  const Eigen::Matrix4d P2 = P * P;
  const Eigen::Matrix4d P3 = P2 * P;
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  // (1, i, -1, -i) is an eigenvector of P with eigenvalue i, so
  // c0 I + c1 P + c2 P^2 + c3 P^3 has eigenvalue c0 - c2 + (c1 - c3) i.
  if (re >= 0.0)
    M += re * Eigen::Matrix4d::Identity();
  else
    M += (-re) * P2;
  if (im >= 0.0)
    M += im * P;
  else
    M += (-im) * P3;
  return M;
}

Eigen::MatrixXd jordan_lift(Complex lambda, int d) {
  if (d < 1) throw std::invalid_argument("jordan_lift needs multiplicity >= 1");
  const Eigen::Matrix4d M = nonneg_for_eigenvalue(lambda);
  if (d == 1) return M;
  return kron(M, unit_jordan_block(d));
}

bool realizes_jordan_block(const Eigen::MatrixXd& M, Complex lambda, int d) {
  const int n = int(M.rows());
  Eigen::MatrixXcd shifted = M.cast<Complex>() - lambda * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 0; k < d - 1; ++k) power = power * shifted;
  const int r_lo = matrix_rank(power);        // rank (M - lambda I)^(d-1)
  const int r_hi = matrix_rank(power * shifted);
  // Number of Jordan blocks of size >= d equals the rank drop.
  return r_lo - r_hi >= 1;
}

Eigen::MatrixXd purely_competitive_from_jordan(const std::vector<JordanBlockSpec>& spec) {
  if (spec.empty()) throw std::invalid_argument("jordan spec must be nonempty");
  int total = 0;
  for (const auto& blk : spec) {
    if (blk.multiplicity < 1) throw std::invalid_argument("block multiplicity must be >= 1");
    total += 4 * blk.multiplicity;
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(total, total);
  int at = 0;
  for (const auto& blk : spec) {
    const auto lift = jordan_lift(blk.eigenvalue, blk.multiplicity);
    M.block(at, at, lift.rows(), lift.cols()) = lift;
    at += int(lift.rows());
  }
  return kron(M, competition_pair());
}

bool is_purely_competitive(const Eigen::MatrixXd& B, double tol) {
  if (B.rows() != B.cols()) return false;
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      if (i == j && std::abs(B(i, j)) > tol) return false;
      if (i != j && B(i, j) > tol) return false;
    }
  return true;
}

namespace {

struct BlockColumn {
  Eigen::VectorXcd vec;  // eigenvector inside the block
  int eigen_index;       // which eigenvalue of A this column represents
};

CompetitiveEmbedding finish_embedding(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXcd& W, const Eigen::MatrixXcd& P,
                                      const char* mode) {
  const int n = int(A.rows());
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(P);
  const Eigen::MatrixXcd Pinv = lu.inverse();

  // A per-conjugate-pair phase keeps Re(W P^-1) an intertwiner; retry a few
  // deterministic phases if the real part loses column rank.
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXcd Wp = W;
    if (attempt > 0) {
      const Complex phase = std::exp(Complex(0.0, 0.4 + 0.3 * attempt));
      for (int c = 0; c < Wp.cols(); ++c) {
        // conjugate columns get conjugate phases (detected by the sign of the
        // leading imaginary entry) so Re of the product stays an intertwiner
        Complex lead(0.0, 0.0);
        for (int r = 0; r < Wp.rows(); ++r)
          if (std::abs(Wp(r, c).imag()) > 1e-14) {
            lead = Wp(r, c);
            break;
          }
        Wp.col(c) *= (lead.imag() >= 0.0 ? phase : std::conj(phase));
      }
    }
    CompetitiveEmbedding emb;
    emb.B = B;
    emb.T = (Wp * Pinv).real();
    emb.residual = (emb.T * A - B * emb.T).norm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(emb.T);
    const auto& sv = svd.singularValues();
    const bool full_rank = sv.size() == n && sv(n - 1) > 1e-10 * sv(0);
    if (full_rank && emb.residual <= 1e-10 * std::max(1.0, A.norm())) return emb;
    if (attempt == 7) {
      throw std::runtime_error(std::string("competitive embedding (") + mode +
                               ") failed: residual " + std::to_string(emb.residual) +
                               ", smallest singular value " +
                               std::to_string(sv.size() ? sv(sv.size() - 1) : 0.0));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

CompetitiveEmbedding competitive_embedding(const Eigen::MatrixXd& A, double condition_limit) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw std::invalid_argument("A must be square and nonempty");
  const int n = int(A.rows());

  if (is_purely_competitive(A)) {
    CompetitiveEmbedding emb;
    emb.B = A;
    emb.T = Eigen::MatrixXd::Identity(n, n);
    emb.residual = 0.0;
    return emb;
  }

  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::MatrixXcd P = es.eigenvectors();
  {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(n - 1);
    if (!(sv(n - 1) > 0.0) || cond > condition_limit)
      throw std::invalid_argument(
          "A is defective or its eigenbasis is ill-conditioned (cond = " +
          std::to_string(cond) + "); supply exact Jordan data instead");
  }
  const Eigen::VectorXcd lambdas = es.eigenvalues();
  const double scale = std::max(1.0, A.norm());

  // Build one competitive block per real eigenvalue / conjugate pair.
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<std::vector<BlockColumn>> block_cols;
  std::vector<bool> used(n, false);
  const Eigen::Matrix4d P4 = shift_up();
  for (int k = 0; k < n; ++k) {
    if (used[k]) continue;
    used[k] = true;
    const Complex lam = lambdas(k);
    if (std::abs(lam.imag()) <= 1e-10 * scale) {
      const double re = lam.real();
      if (std::abs(re) <= 1e-13 * scale) {
        blocks.push_back(Eigen::MatrixXd::Zero(1, 1));
        block_cols.push_back({{Eigen::VectorXcd::Ones(1), k}});
      } else {
        Eigen::MatrixXd blk(2, 2);
        blk << 0.0, -std::abs(re), -std::abs(re), 0.0;
        Eigen::VectorXcd v(2);
        v << Complex(1.0, 0.0), Complex(re > 0.0 ? -1.0 : 1.0, 0.0);
        blocks.push_back(blk);
        block_cols.push_back({{v, k}});
      }
      continue;
    }
    // find the conjugate partner
    int partner = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(std::conj(lam) - lambdas(j));
      if (d < best) {
        best = d;
        partner = j;
      }
    }
    if (partner < 0 || best > 1e-8 * scale)
      throw std::runtime_error("complex eigenvalue without a conjugate partner");
    used[partner] = true;
    const bool k_is_plus = lam.imag() > 0.0;
    Complex gamma = k_is_plus ? lam : std::conj(lam);  // Im(gamma) > 0
    if (std::abs(gamma.real()) <= 1e-10 * scale) gamma.real(0.0);  // eigensolver noise
    const int plus_index = k_is_plus ? k : partner;
    const int minus_index = k_is_plus ? partner : k;

    if (gamma.real() >= 0.0) {
      // negative circulant: eigenvalue alpha + beta i at omega = -i with
      // eigenvector (1, -i, -1, i); adding 0.0 clears negative zeros
      Eigen::MatrixXd blk =
          ((-gamma.imag() * P4 - gamma.real() * (P4 * P4)).array() + 0.0).matrix();
      Eigen::VectorXcd v(4);
      v << Complex(1, 0), Complex(0, -1), Complex(-1, 0), Complex(0, 1);
      blocks.push_back(blk);
      block_cols.push_back({{v, plus_index}, {v.conjugate(), minus_index}});
    } else {
      const Eigen::MatrixXd M = nonneg_for_eigenvalue(gamma);
      const Eigen::MatrixXd blk = kron(M, competition_pair());
      Eigen::VectorXcd u(4);
      u << Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1);
      Eigen::VectorXcd v(8);
      for (int r = 0; r < 4; ++r) {
        v(2 * r) = u(r);
        v(2 * r + 1) = -u(r);
      }
      blocks.push_back(blk);
      block_cols.push_back({{v, plus_index}, {v.conjugate(), minus_index}});
    }
  }

  int m = 0;
  for (const auto& blk : blocks) m += int(blk.rows());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(m, n);
  int at = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const int bs = int(blocks[bi].rows());
    B.block(at, at, bs, bs) = blocks[bi];
    for (const auto& col : block_cols[bi]) W.block(at, col.eigen_index, bs, 1) = col.vec;
    at += bs;
  }
  return finish_embedding(A, B, W, P, "numeric");
}

CompetitiveEmbedding competitive_embedding(const Eigen::MatrixXd& A,
                                           const std::vector<JordanBlockSpec>& blocks,
                                           const Eigen::MatrixXcd& basis) {
  if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
  const int n = int(A.rows());
  int total = 0;
  for (const auto& blk : blocks) total += blk.multiplicity;
  if (total != n || basis.rows() != n || basis.cols() != n)
    throw std::invalid_argument("jordan blocks and basis must cover all of A");
  for (const auto& blk : blocks)
    if (std::abs(blk.eigenvalue) < 1e-14 && blk.multiplicity > 1)
      throw std::invalid_argument(
          "nilpotent Jordan blocks (eigenvalue 0, multiplicity > 1) are not realizable "
          "by the Kronecker lift");

  const Eigen::MatrixXd B = purely_competitive_from_jordan(blocks);
  const int m = int(B.rows());

  // Chain vectors inside each lifted block: with u the eigenvector of the
  // 4x4 factor and s = (1, -1) the +1 eigenvector of the competition pair,
  // v_k = lambda^{1-k} (u (x) e_k) (x) s continues the Jordan chain.
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(m, n);
  int col = 0;
  int at = 0;
  for (const auto& blk : blocks) {
    const int d = blk.multiplicity;
    const Complex lam = blk.eigenvalue;
    Eigen::VectorXcd u(4);
    u << Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1);
    Complex coef(1.0, 0.0);
    for (int k = 0; k < d; ++k) {
      if (k > 0) coef /= lam;
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8 * d);
      for (int r = 0; r < 4; ++r) {
        const int base = 2 * (r * d + k);
        v(base) = coef * u(r);
        v(base + 1) = -coef * u(r);
      }
      W.block(at, col, 8 * d, 1) = v;
      ++col;
    }
    at += 8 * d;
  }
  return finish_embedding(A, B, W, basis, "exact-jordan");
}

std::vector<double> CompiledCompetitive::initial_state(const Eigen::VectorXd& y0) const {
  std::vector<double> m0(y0.data(), y0.data() + y0.size());
  m0.insert(m0.end(), aux_multipliers.begin(), aux_multipliers.end());
  return m0;
}

CompiledCompetitive compile_competitive_to_ros(const Eigen::MatrixXd& B,
                                               const Eigen::VectorXd& offset) {
  if (!is_purely_competitive(B))
    throw std::invalid_argument("compile_competitive_to_ros needs a purely competitive matrix");
  const int n = int(B.rows());
  if (offset.size() != n) throw std::invalid_argument("offset length must match B");

  CompiledCompetitive out;
  out.map.scale = 1.0;
  out.map.offset = offset;
  out.aux_multipliers = {2.0, 2.0};

  MarketInstance& inst = out.instance;
  inst.lambda = 1.0;
  for (int i = 0; i < n; ++i) inst.bidder_names.push_back("y" + std::to_string(i + 1));
  inst.bidder_names.push_back("auxA");
  inst.bidder_names.push_back("auxB");

  constexpr double kUnit = 0.1;  // utility of one price-pressure gadget

  // Linear terms: bidder i wins against price-setter k, contributing
  // 2|B_ik| + B_ik m_k; the induced constant is cancelled below.
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      const double w = -B(i, k);
      if (w <= 1e-14) continue;
      ItemSpec item;
      item.values["y" + std::to_string(i + 1)] = ValueSpec::fixed(2.0 * w);
      item.values["y" + std::to_string(k + 1)] = ValueSpec::fixed(w);
      inst.items.push_back(std::move(item));
    }
  }

  // Constant terms: c_i = -(B b)_i minus the constants induced by the linear
  // items. Stacked unit gadgets against auxA, one scaled residual gadget.
  const Eigen::VectorXd bb = B * offset;
  for (int i = 0; i < n; ++i) {
    double induced = 0.0;
    for (int k = 0; k < n; ++k)
      if (k != i && -B(i, k) > 1e-14) induced += 2.0 * (-B(i, k));
    const double c = -bb(i) - induced;
    const double mag = std::abs(c);
    if (mag <= 1e-12) continue;
    const double own_value = c < 0.0 ? 1.9 : 2.1;
    const double units = std::floor(mag / kUnit + 1e-9);
    const double rem = mag - units * kUnit;
    if (units >= 1.0) {
      ItemSpec item;
      item.values["y" + std::to_string(i + 1)] = ValueSpec::fixed(own_value);
      item.values["auxA"] = ValueSpec::fixed(1.0);
      item.copies = units;
      inst.items.push_back(std::move(item));
    }
    if (rem > 1e-9 * (1.0 + mag)) {
      const double s = rem / kUnit;
      ItemSpec item;
      item.values["y" + std::to_string(i + 1)] = ValueSpec::fixed(own_value * s);
      item.values["auxA"] = ValueSpec::fixed(s);
      inst.items.push_back(std::move(item));
    }
  }

  // Mutual auxiliary pair: each wins its own item at price 2, so both
  // utilities vanish while m_aux stays at 2.
  {
    ItemSpec a;
    a.values["auxA"] = ValueSpec::fixed(2.0);
    a.values["auxB"] = ValueSpec::fixed(1.0);
    inst.items.push_back(std::move(a));
    ItemSpec b;
    b.values["auxA"] = ValueSpec::fixed(1.0);
    b.values["auxB"] = ValueSpec::fixed(2.0);
    inst.items.push_back(std::move(b));
  }

  require_valid(inst);
  return out;
}

std::vector<Eigen::VectorXd> matrix_exponential_orbit(const Eigen::MatrixXd& A,
                                                      const Eigen::VectorXd& x0,
                                                      const std::vector<double>& times) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  for (double t : times) out.push_back((t * A).exp() * x0);
  return out;
}

SimulatedLinear simulate_linear(const LinearSystem& sys,
                                const std::optional<Eigen::MatrixXd>& explicit_T,
                                const std::optional<AffineMap>& explicit_map,
                                int ref_samples) {
  if (sys.x0.size() != sys.A.rows()) throw std::invalid_argument("x0 length must match A");
  if (!(sys.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (ref_samples < 2) throw std::invalid_argument("need at least 2 reference samples");

  SimulatedLinear out;
  Eigen::MatrixXd T;
  if (explicit_T) {
    T = *explicit_T;
    const auto emb = competitive_embedding(sys.A);
    out.B = emb.B;
    const double res = (T * sys.A - out.B * T).norm();
    if (res > 1e-10 * std::max(1.0, sys.A.norm()))
      throw std::invalid_argument("explicit T does not intertwine: residual " +
                                  std::to_string(res));
  } else {
    const auto emb = competitive_embedding(sys.A);
    out.B = emb.B;
    T = emb.T;
  }
  out.T = T;
  const int m = int(out.B.rows());

  // Dense reference solution of the source system (matrix-exponential
  // stepping is exact at the sample points).
  out.ref_times.resize(ref_samples);
  const double step = sys.horizon / double(ref_samples - 1);
  for (int k = 0; k < ref_samples; ++k) out.ref_times[k] = k * step;
  const Eigen::MatrixXd E = (step * sys.A).exp();
  std::vector<Eigen::VectorXd> xs(ref_samples);
  xs[0] = sys.x0;
  for (int k = 1; k < ref_samples; ++k) xs[k] = E * xs[k - 1];

  // Per-coordinate range of the competitive orbit, for the affine fit.
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (const auto& x : xs) {
    const Eigen::VectorXd z = T * x;
    lo = lo.cwiseMin(z);
    hi = hi.cwiseMax(z);
  }
  if (!lo.allFinite() || !hi.allFinite())
    throw std::invalid_argument("reference orbit is not finite over [0, T]");

  AffineMap map;
  if (explicit_map) {
    map = *explicit_map;
    if (!(map.scale > 0.0)) throw std::invalid_argument("map scale must be positive");
    if (map.offset.size() != m) throw std::invalid_argument("map offset length must match B");
  } else {
    double c = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      const double range = hi(j) - lo(j);
      if (range > 0.0) c = std::min(c, 0.76 / range);
    }
    if (!std::isfinite(c)) c = 1.0;  // constant orbit
    map.scale = c;
    map.offset = Eigen::VectorXd::Constant(m, 1.5) - 0.5 * c * (lo + hi);
  }

  // The compiled utilities are exact on the closed operating box.
  for (int j = 0; j < m; ++j) {
    const double y_lo = map.offset(j) + map.scale * lo(j);
    const double y_hi = map.offset(j) + map.scale * hi(j);
    if (y_lo < 1.1 - 1e-9 || y_hi > 1.9 + 1e-9)
      throw std::invalid_argument("mapped orbit leaves the operating box on coordinate " +
                                  std::to_string(j) + ": [" + std::to_string(y_lo) + ", " +
                                  std::to_string(y_hi) + "]");
  }

  auto compiled = compile_competitive_to_ros(out.B, map.offset);
  out.instance = std::move(compiled.instance);
  out.map = map;
  out.m0 = compiled.initial_state(map.offset + map.scale * (T * sys.x0));

  out.ref_multipliers.reserve(ref_samples);
  for (const auto& x : xs) {
    const Eigen::VectorXd y = map.offset + map.scale * (T * x);
    std::vector<double> row(y.data(), y.data() + y.size());
    row.push_back(2.0);
    row.push_back(2.0);
    out.ref_multipliers.push_back(std::move(row));
  }
  return out;
}

}  // namespace rosdyn::linear
