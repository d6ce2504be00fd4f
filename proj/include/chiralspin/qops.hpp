// Operator and state algebra over N spin-1/2 systems.
//
// Conventions (frozen for the whole library):
//   - spin 1 is the most significant bit of the basis index,
//   - |g> = 0, |e> = 1,
//   - sigma_j = |g><e| is the lowering operator of spin j.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chiralspin {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Operators are stored sparsely; spin-network Hamiltonians and jump
// operators have O(N^2 2^N) nonzeros, so this is what keeps N = 12-14
// trajectories affordable.
using Operator = SpMat;
using PureState = Vector;
using DensityMatrix = DenseMatrix;

inline constexpr std::size_t kMaxSpins = 24;

inline std::size_t dim_for(std::size_t n_spins) { return std::size_t{1} << n_spins; }

inline std::size_t n_spins_for(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension must be a power of two");
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

// Bit holding spin `site` (1-based) in an N-spin basis index.
inline std::size_t bit_of(std::size_t site, std::size_t n_spins) {
  if (site < 1 || site > n_spins) throw std::invalid_argument("site out of range");
  return n_spins - site;
}

// ---------------------------------------------------------------------------
// Single-site matrices

inline Eigen::Matrix2cd sigma_lower() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = 1.0;  // |g><e|
  return m;
}

inline Eigen::Matrix2cd sigma_raise() { return sigma_lower().adjoint(); }

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = cplx(0, -1);
  m(1, 0) = cplx(0, 1);
  return m;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = -1.0;  // |g> is the -1 eigenstate
  m(1, 1) = 1.0;
  return m;
}

inline Eigen::Matrix2cd pauli(int axis) {
  switch (axis) {
    case 0: return pauli_x();
    case 1: return pauli_y();
    case 2: return pauli_z();
  }
  throw std::invalid_argument("pauli axis must be 0, 1 or 2");
}

// ---------------------------------------------------------------------------
// Embedding and basic constructions

// identity (x) ... (x) site_op (x) ... (x) identity
inline Operator embed(const Eigen::Matrix2cd& site_op, std::size_t site,
                      std::size_t n_spins) {
  const std::size_t bit = bit_of(site, n_spins);
  const std::size_t dim = dim_for(n_spins);
  const std::size_t mask = std::size_t{1} << bit;

  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(2 * dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const std::size_t cb = (col >> bit) & 1;
    for (std::size_t rb = 0; rb < 2; ++rb) {
      const cplx v = site_op(rb, cb);
      if (v == cplx(0.0)) continue;
      const std::size_t row = (col & ~mask) | (rb << bit);
      trips.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    }
  }
  Operator out(static_cast<int>(dim), static_cast<int>(dim));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// Embeds a 4x4 operator acting on (site_a, site_b); site_a is the more
// significant qubit of the 2-qubit block.
inline Operator embed_pair(const Eigen::Matrix4cd& op4, std::size_t site_a, std::size_t site_b,
                           std::size_t n_spins) {
  if (site_a == site_b) throw std::invalid_argument("embed_pair: sites must differ");
  const std::size_t ba = bit_of(site_a, n_spins), bb = bit_of(site_b, n_spins);
  const std::size_t dim = dim_for(n_spins);
  const std::size_t mask = (std::size_t{1} << ba) | (std::size_t{1} << bb);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(4 * dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const std::size_t c2 = (((col >> ba) & 1) << 1) | ((col >> bb) & 1);
    for (std::size_t r2 = 0; r2 < 4; ++r2) {
      const cplx v = op4(static_cast<int>(r2), static_cast<int>(c2));
      if (v == cplx(0.0)) continue;
      const std::size_t row = (col & ~mask) | (((r2 >> 1) & 1) << ba) | ((r2 & 1) << bb);
      trips.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    }
  }
  Operator out(static_cast<int>(dim), static_cast<int>(dim));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline Operator identity_op(std::size_t n_spins) {
  const auto dim = static_cast<int>(dim_for(n_spins));
  Operator id(dim, dim);
  id.setIdentity();
  return id;
}

inline Operator zero_op(std::size_t n_spins) {
  const auto dim = static_cast<int>(dim_for(n_spins));
  return Operator(dim, dim);
}

// sum_j sigma_j^z with our sign convention: eigenvalue 2*(#excited) - N
inline Operator total_jz(std::size_t n_spins) {
  Operator jz = zero_op(n_spins);
  for (std::size_t j = 1; j <= n_spins; ++j) jz += embed(pauli_z(), j, n_spins);
  return jz;
}

// Applies a single-site operator to a pure state without materializing the
// 2^N x 2^N matrix.
inline PureState apply_site_op(const Eigen::Matrix2cd& site_op, std::size_t site,
                               const PureState& psi) {
  const std::size_t dim = static_cast<std::size_t>(psi.size());
  const std::size_t n = n_spins_for(dim);
  const std::size_t bit = bit_of(site, n);
  const std::size_t mask = std::size_t{1} << bit;
  PureState out = PureState::Zero(psi.size());
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t b = (i >> bit) & 1;
    const std::size_t i0 = i & ~mask;
    out[i0] += site_op(0, b) * psi[i];
    out[i0 | mask] += site_op(1, b) * psi[i];
  }
  return out;
}

// Unitary permutation of spin labels: spin j of the input becomes spin
// perm[j-1] of the output.
inline Operator permutation_operator(const std::vector<std::size_t>& perm) {
  const std::size_t n = perm.size();
  const std::size_t dim = dim_for(n);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim);
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t row = 0;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t b = (col >> bit_of(j, n)) & 1;
      if (b) row |= std::size_t{1} << bit_of(perm[j - 1], n);
    }
    trips.emplace_back(static_cast<int>(row), static_cast<int>(col), cplx(1.0));
  }
  Operator out(static_cast<int>(dim), static_cast<int>(dim));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// ---------------------------------------------------------------------------
// Validity checks

inline double hermiticity_residual(const DensityMatrix& rho) {
  return (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
}

inline void check_density_matrix(const DensityMatrix& rho, double herm_tol = 1e-9,
                                 double trace_tol = 1e-9, double pos_tol = 1e-7) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix not square");
  if (hermiticity_residual(rho) > herm_tol)
    throw std::invalid_argument("density matrix not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol)
    throw std::invalid_argument("density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -pos_tol)
    throw std::invalid_argument("density matrix not positive semidefinite");
}

inline void check_pure_state(const PureState& psi, double tol = 1e-10) {
  if (std::abs(psi.norm() - 1.0) > tol)
    throw std::invalid_argument("pure state not normalized");
}

// ---------------------------------------------------------------------------
// Partial trace and state functionals

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   const std::vector<std::size_t>& keep) {
  const std::size_t dim = static_cast<std::size_t>(rho.rows());
  const std::size_t n = n_spins_for(dim);
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep list");
  std::vector<bool> seen(n + 1, false);
  for (std::size_t s : keep) {
    if (s < 1 || s > n) throw std::invalid_argument("partial_trace: site out of range");
    if (seen[s]) throw std::invalid_argument("partial_trace: duplicate site");
    seen[s] = true;
  }

  const std::size_t nk = keep.size();
  std::vector<std::size_t> keep_bits(nk), traced_bits;
  for (std::size_t a = 0; a < nk; ++a) keep_bits[a] = bit_of(keep[a], n);
  for (std::size_t s = 1; s <= n; ++s)
    if (!seen[s]) traced_bits.push_back(bit_of(s, n));

  const std::size_t dk = std::size_t{1} << nk;
  const std::size_t dt = std::size_t{1} << traced_bits.size();
  // keep order defines the bit order of the reduced state: keep[0] is its MSB
  auto compose = [&](std::size_t a, std::size_t t) {
    std::size_t idx = 0;
    for (std::size_t q = 0; q < nk; ++q)
      if ((a >> (nk - 1 - q)) & 1) idx |= std::size_t{1} << keep_bits[q];
    for (std::size_t q = 0; q < traced_bits.size(); ++q)
      if ((t >> q) & 1) idx |= std::size_t{1} << traced_bits[q];
    return idx;
  };

  DensityMatrix out = DensityMatrix::Zero(static_cast<int>(dk), static_cast<int>(dk));
  for (std::size_t t = 0; t < dt; ++t)
    for (std::size_t a = 0; a < dk; ++a) {
      const std::size_t ia = compose(a, t);
      for (std::size_t b = 0; b < dk; ++b)
        out(static_cast<int>(a), static_cast<int>(b)) += rho(static_cast<int>(ia), static_cast<int>(compose(b, t)));
    }
  return out;
}

inline DensityMatrix reduced_from_pure(const PureState& psi,
                                       const std::vector<std::size_t>& keep) {
  // Streaming version of partial_trace(psi psi^dag, keep); O(2^N * 2^K).
  const std::size_t dim = static_cast<std::size_t>(psi.size());
  const std::size_t n = n_spins_for(dim);
  const std::size_t nk = keep.size();
  std::vector<std::size_t> keep_bits(nk);
  std::vector<bool> seen(n + 1, false);
  for (std::size_t a = 0; a < nk; ++a) {
    keep_bits[a] = bit_of(keep[a], n);
    if (seen[keep[a]]) throw std::invalid_argument("reduced_from_pure: duplicate site");
    seen[keep[a]] = true;
  }
  std::size_t keep_mask = 0;
  for (auto b : keep_bits) keep_mask |= std::size_t{1} << b;

  const std::size_t dk = std::size_t{1} << nk;
  // group amplitudes by the traced-bit configuration
  std::vector<Vector> slices(dim >> nk, Vector::Zero(static_cast<int>(dk)));
  auto traced_rank = [&](std::size_t i) {
    std::size_t r = 0, q = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (keep_mask & (std::size_t{1} << b)) continue;
      if ((i >> b) & 1) r |= std::size_t{1} << q;
      ++q;
    }
    return r;
  };
  auto kept_rank = [&](std::size_t i) {
    std::size_t a = 0;
    for (std::size_t q = 0; q < nk; ++q)
      if ((i >> keep_bits[q]) & 1) a |= std::size_t{1} << (nk - 1 - q);
    return a;
  };
  for (std::size_t i = 0; i < dim; ++i)
    slices[traced_rank(i)][static_cast<int>(kept_rank(i))] += psi[i];
  DensityMatrix out = DensityMatrix::Zero(static_cast<int>(dk), static_cast<int>(dk));
  for (auto& v : slices) out.noalias() += v * v.adjoint();
  return out;
}

inline double purity(const DensityMatrix& rho) {
  return (rho * rho).trace().real();
}

inline std::vector<double> density_eigenvalues(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
  std::vector<double> p(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return p;
}

// von Neumann entropy, natural log. Eigenvalues in [-1e-8, 1e-14) count as
// zero (integrator positivity drift); anything more negative is an error.
inline double entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double p : density_eigenvalues(rho)) {
    if (p < -1e-8) throw std::domain_error("entropy: state not positive semidefinite");
    if (p < 1e-14) continue;
    s -= p * std::log(p);
  }
  return s;
}

inline cplx expectation(const Operator& op, const DensityMatrix& rho) {
  if (op.rows() != rho.rows()) throw std::invalid_argument("expectation: dimension mismatch");
  return (op * rho).eval().trace();
}

inline cplx expectation(const Operator& op, const PureState& psi) {
  if (op.rows() != psi.size()) throw std::invalid_argument("expectation: dimension mismatch");
  return psi.dot(op * psi);
}

inline double fidelity_pure(const PureState& psi, const DensityMatrix& rho) {
  if (psi.size() != rho.rows()) throw std::invalid_argument("fidelity_pure: dimension mismatch");
  return psi.dot(rho * psi).real();
}

inline double fidelity_pure(const PureState& psi, const PureState& phi) {
  if (psi.size() != phi.size()) throw std::invalid_argument("fidelity_pure: dimension mismatch");
  return std::norm(psi.dot(phi));
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Singular values of psi reshaped across the cut {keep} | rest.
inline std::vector<double> schmidt_coefficients(const PureState& psi,
                                                const std::vector<std::size_t>& keep) {
  DensityMatrix rho = reduced_from_pure(psi, keep);
  std::vector<double> out;
  for (double p : density_eigenvalues(rho)) out.push_back(std::sqrt(std::max(p, 0.0)));
  return out;
}

// ---------------------------------------------------------------------------
// A few named states

inline PureState ground_state(std::size_t n_spins) {
  PureState psi = PureState::Zero(static_cast<int>(dim_for(n_spins)));
  psi[0] = 1.0;
  return psi;
}

inline PureState basis_state(std::size_t n_spins, const std::string& pattern) {
  // e.g. basis_state(2, "eg") = |eg>
  if (pattern.size() != n_spins) throw std::invalid_argument("basis_state: length mismatch");
  std::size_t idx = 0;
  for (std::size_t j = 1; j <= n_spins; ++j) {
    char c = pattern[j - 1];
    if (c == 'e') idx |= std::size_t{1} << bit_of(j, n_spins);
    else if (c != 'g') throw std::invalid_argument("basis_state: pattern must be g/e");
  }
  PureState psi = PureState::Zero(static_cast<int>(dim_for(n_spins)));
  psi[static_cast<int>(idx)] = 1.0;
  return psi;
}

// (|g>_j |e>_l - |e>_j |g>_l)/sqrt(2), ground elsewhere
inline PureState singlet_state(std::size_t j, std::size_t l, std::size_t n_spins) {
  if (j == l) throw std::invalid_argument("singlet_state: sites must differ");
  PureState psi = PureState::Zero(static_cast<int>(dim_for(n_spins)));
  psi[std::size_t{1} << bit_of(l, n_spins)] = 1.0 / std::sqrt(2.0);
  psi[std::size_t{1} << bit_of(j, n_spins)] = -1.0 / std::sqrt(2.0);
  return psi;
}

inline PureState triplet_state(std::size_t j, std::size_t l, std::size_t n_spins) {
  PureState psi = PureState::Zero(static_cast<int>(dim_for(n_spins)));
  psi[std::size_t{1} << bit_of(l, n_spins)] = 1.0 / std::sqrt(2.0);
  psi[std::size_t{1} << bit_of(j, n_spins)] = 1.0 / std::sqrt(2.0);
  return psi;
}

}  // namespace chiralspin
