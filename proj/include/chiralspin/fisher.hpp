// Classical and quantum Fisher information, producibility bounds and the
// optimization over local generator directions for entanglement-depth
// witnessing.
#pragma once

#include "chiralspin/mcwf.hpp"
#include "chiralspin/qops.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <stdexcept>
#include <vector>

namespace chiralspin {

struct GeneratorSpec {
  std::vector<Eigen::Vector3d> directions;  // unit 3-vector per spin
};

struct Povm {
  std::vector<Operator> effects;
};

struct FisherResult {
  double value = 0.0;
  GeneratorSpec generator;
  std::vector<double> bound_table;  // f(k, N) for k = 1..N
  int witnessed_depth = 1;
  double spectral_bound = 0.0;  // N * lambda_max(Gamma)
};

namespace detail {

inline void check_generator(const GeneratorSpec& gen, std::size_t n) {
  if (gen.directions.size() != n)
    throw std::invalid_argument("GeneratorSpec: direction count mismatch");
  for (const auto& v : gen.directions)
    if (std::abs(v.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("GeneratorSpec: directions must be unit vectors");
}

inline void check_povm(const Povm& povm, std::size_t dim) {
  DenseMatrix sum = DenseMatrix::Zero(dim, dim);
  for (const auto& m : povm.effects) sum += DenseMatrix(m);
  if ((sum - DenseMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("Povm: effects do not sum to identity");
}

}  // namespace detail

// G = (1/2) sum_j n_j . sigma_j as a sparse operator
inline Operator generator_operator(const GeneratorSpec& gen, std::size_t n_spins) {
  detail::check_generator(gen, n_spins);
  Operator g = zero_op(n_spins);
  for (std::size_t j = 1; j <= n_spins; ++j) {
    const auto& v = gen.directions[j - 1];
    Eigen::Matrix2cd local = 0.5 * (v[0] * pauli_x() + v[1] * pauli_y() + v[2] * pauli_z());
    g += embed(local, j, n_spins);
  }
  return g;
}

// F = sum_mu (d_theta P_mu)^2 / P_mu at theta = 0, with
// d_theta P_mu = Tr(-i [G, rho] M_mu). Outcomes with vanishing probability
// take the theta -> 0 limit value 4 Tr(M_mu G rho G).
inline double classical_fisher(const DensityMatrix& rho, const GeneratorSpec& gen,
                               const Povm& povm) {
  const std::size_t dim = rho.rows();
  const auto n = static_cast<std::size_t>(std::round(std::log2(double(dim))));
  detail::check_povm(povm, dim);
  Operator g = generator_operator(gen, n);

  DenseMatrix grho = g * rho;
  DenseMatrix comm = cplx(0, -1) * (grho - grho.adjoint().eval());
  DenseMatrix grg = DenseMatrix(grho * g);  // G rho G for the zero-probability limit

  double fisher = 0.0;
  for (const auto& m : povm.effects) {
    const DenseMatrix md(m);
    const double p = (md * rho).trace().real();
    const double dp = (md * comm).trace().real();
    if (p < 1e-14) {
      if (dp * dp < 1e-20) {
        fisher += 4.0 * (md * grg).trace().real();
      }
      continue;
    }
    fisher += dp * dp / p;
  }
  return fisher;
}

// F_Q = 4 (<G^2> - <G>^2) for pure states
inline double qfi_pure(const PureState& psi, const GeneratorSpec& gen) {
  const auto n = static_cast<std::size_t>(std::round(std::log2(double(psi.size()))));
  check_pure_state(psi);
  Operator g = generator_operator(gen, n);
  PureState gpsi = g * psi;
  const double g2 = gpsi.squaredNorm();
  const double g1 = psi.dot(gpsi).real();
  return 4.0 * (g2 - g1 * g1);
}

// Spectral symmetric-logarithmic-derivative formula:
//   F_Q = 2 sum_{k,l: p_k + p_l > 1e-12} (p_k - p_l)^2 / (p_k + p_l) |<k|G|l>|^2
inline double qfi_mixed(const DensityMatrix& rho, const GeneratorSpec& gen) {
  const std::size_t dim = rho.rows();
  const auto n = static_cast<std::size_t>(std::round(std::log2(double(dim))));
  Operator g = generator_operator(gen, n);

  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho);
  const auto& p = es.eigenvalues();
  DenseMatrix gbasis = es.eigenvectors().adjoint() * (g * es.eigenvectors());

  double fisher = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k)
    for (Eigen::Index l = 0; l < p.size(); ++l) {
      const double s = p[k] + p[l];
      if (s <= 1e-12) continue;
      const double d = p[k] - p[l];
      fisher += 2.0 * d * d / s * std::norm(gbasis(k, l));
    }
  return fisher;
}

// f(k, N) = n k^2 + (N - n k)^2 with n = floor(N / k)
inline double producibility_bound(std::size_t k, std::size_t n_spins) {
  if (k < 1 || k > n_spins) throw std::invalid_argument("producibility_bound: k out of range");
  const std::size_t n = n_spins / k;
  const double rem = double(n_spins) - double(n * k);
  return double(n) * double(k) * double(k) + rem * rem;
}

// Symmetrized covariance matrix of all single-site Pauli operators,
//   Gamma_{(i,a),(j,b)} = (1/2)<{sigma_i^a, sigma_j^b}> - <sigma_i^a><sigma_j^b>
inline Eigen::MatrixXd correlation_matrix(const PureState& psi) {
  const auto n = static_cast<std::size_t>(std::round(std::log2(double(psi.size()))));
  check_pure_state(psi);

  std::vector<PureState> spsi(3 * n);
  std::vector<double> mean(3 * n);
  for (std::size_t j = 0; j < n; ++j)
    for (int a = 0; a < 3; ++a) {
      spsi[3 * j + a] = apply_site_op(pauli(a), j + 1, psi);
      mean[3 * j + a] = psi.dot(spsi[3 * j + a]).real();
    }

  Eigen::MatrixXd gamma(3 * n, 3 * n);
  for (std::size_t r = 0; r < 3 * n; ++r)
    for (std::size_t c = r; c < 3 * n; ++c) {
      const double cov = spsi[r].dot(spsi[c]).real() - mean[r] * mean[c];
      gamma(r, c) = gamma(c, r) = cov;
    }
  return gamma;
}

namespace detail {

// max over |x| = 1 of x^T A x + 2 b^T x, exact via the secular equation: the
// maximizer satisfies (lam I - A) x = b with lam >= lam_max(A).
inline double sphere_quadratic_max(const Eigen::Matrix3d& a, const Eigen::Vector3d& b,
                                   Eigen::Vector3d& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a);
  const Eigen::Vector3d w = es.eigenvalues();
  const Eigen::Matrix3d q = es.eigenvectors();
  const Eigen::Vector3d beta = q.transpose() * b;
  const double lmax = w[2];

  auto phi = [&](double lam) {  // |x(lam)|^2 - 1
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += beta[i] * beta[i] / ((lam - w[i]) * (lam - w[i]));
    return s - 1.0;
  };

  const double bnorm = b.norm();
  if (bnorm < 1e-14) {
    x = q.col(2);
    return lmax;
  }

  double lo = lmax, hi = lmax + bnorm + 1e-12;
  if (std::abs(beta[2]) > 1e-14 || phi(lmax + 1e-14 * std::max(1.0, std::abs(lmax))) > 0) {
    // interior root lam > lmax
    while (phi(hi) > 0) hi = lmax + 2.0 * (hi - lmax);
    lo = lmax + 1e-300;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (phi(mid) > 0 ? lo : hi) = mid;
    }
    const double lam = 0.5 * (lo + hi);
    Eigen::Vector3d y;
    for (int i = 0; i < 3; ++i) y[i] = beta[i] / (lam - w[i]);
    x = q * y;
    x.normalize();
  } else {
    // hard case: b orthogonal to the top eigenspace and no exterior root
    Eigen::Vector3d y = Eigen::Vector3d::Zero();
    double used = 0.0;
    for (int i = 0; i < 2; ++i) {
      if (lmax - w[i] > 1e-14) {
        y[i] = beta[i] / (lmax - w[i]);
        used += y[i] * y[i];
      }
    }
    if (used > 1.0) {  // fall back to boundary bisection above lmax
      double lo2 = lmax, hi2 = lmax + bnorm + 1.0;
      while (phi(hi2) > 0) hi2 = lmax + 2.0 * (hi2 - lmax);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo2 + hi2);
        (phi(mid) > 0 ? lo2 : hi2) = mid;
      }
      const double lam = 0.5 * (lo2 + hi2);
      for (int i = 0; i < 3; ++i) y[i] = beta[i] / (lam - w[i]);
      x = q * y;
      x.normalize();
    } else {
      y[2] = std::sqrt(std::max(0.0, 1.0 - used));
      x = q * y;
    }
  }
  return x.dot(a * x) + 2.0 * b.dot(x);
}

inline double ascend(const Eigen::MatrixXd& gamma, std::vector<Eigen::Vector3d>& dirs) {
  const std::size_t n = dirs.size();
  auto value = [&]() {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        v += dirs[i].dot(gamma.block<3, 3>(3 * i, 3 * j) * dirs[j]);
    return v;
  };
  double prev = value();
  for (int sweep = 0; sweep < 500; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Matrix3d a = gamma.block<3, 3>(3 * i, 3 * i);
      Eigen::Vector3d b = Eigen::Vector3d::Zero();
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) b += gamma.block<3, 3>(3 * i, 3 * j) * dirs[j];
      sphere_quadratic_max(a, b, dirs[i]);
    }
    const double cur = value();
    if (std::abs(cur - prev) <= 1e-10 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

inline Eigen::Vector3d random_direction(StreamRng& rng) {
  for (;;) {
    Eigen::Vector3d v(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                      2.0 * rng.uniform() - 1.0);
    const double n2 = v.squaredNorm();
    if (n2 > 1e-4 && n2 <= 1.0) return v / std::sqrt(n2);
  }
}

}  // namespace detail

inline int witnessed_depth_for(double value, std::size_t n, const std::vector<double>& bounds) {
  int depth = 1;
  for (std::size_t k = 1; k <= n; ++k)
    if (value > bounds[k - 1] + 1e-9) depth = std::min<int>(int(k) + 1, int(n));
  return depth;
}

// Maximizes F_Q = 4 Var(G) over local generator directions by block
// coordinate ascent on n^T Gamma n with exact per-site sphere subproblems,
// restarted from random direction sets.
inline FisherResult optimize_generator(const PureState& psi, int restarts = 32,
                                       std::uint64_t seed = 0, int n_threads = 1) {
  const auto n = static_cast<std::size_t>(std::round(std::log2(double(psi.size()))));
  const Eigen::MatrixXd gamma = correlation_matrix(psi);

  auto one_restart = [&](int r) {
    StreamRng rng(seed, static_cast<std::uint64_t>(r));
    std::vector<Eigen::Vector3d> dirs(n);
    for (auto& d : dirs) d = detail::random_direction(rng);
    const double v = detail::ascend(gamma, dirs);
    return std::make_pair(v, std::move(dirs));
  };

  double best = -1.0;
  std::vector<Eigen::Vector3d> best_dirs;
  if (n_threads > 1) {
    std::vector<std::future<std::pair<double, std::vector<Eigen::Vector3d>>>> futs;
    for (int r = 0; r < restarts; ++r)
      futs.push_back(std::async(std::launch::async, one_restart, r));
    for (auto& f : futs) {
      auto [v, dirs] = f.get();
      if (v > best) best = v, best_dirs = std::move(dirs);
    }
  } else {
    for (int r = 0; r < restarts; ++r) {
      auto [v, dirs] = one_restart(r);
      if (v > best) best = v, best_dirs = std::move(dirs);
    }
  }

  FisherResult res;
  res.value = best;
  res.generator.directions = std::move(best_dirs);
  for (std::size_t k = 1; k <= n; ++k) res.bound_table.push_back(producibility_bound(k, n));
  res.witnessed_depth = witnessed_depth_for(res.value, n, res.bound_table);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma, Eigen::EigenvaluesOnly);
  res.spectral_bound = double(n) * es.eigenvalues().maxCoeff();
  return res;
}

// G = (1/2) sum_j (-1)^j sigma_j^x
inline GeneratorSpec staggered_probe(std::size_t n_spins) {
  GeneratorSpec gen;
  for (std::size_t j = 1; j <= n_spins; ++j)
    gen.directions.push_back(Eigen::Vector3d((j % 2 == 0) ? 1.0 : -1.0, 0.0, 0.0));
  return gen;
}

// Projectors onto the eigenspaces of J^z = sum_j sigma_j^z, one effect per
// distinct eigenvalue (grouped by excitation number).
inline Povm jz_measurement(std::size_t n_spins) {
  const std::size_t dim = dim_for(n_spins);
  Povm povm;
  for (std::size_t k = 0; k <= n_spins; ++k) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t b = 0; b < dim; ++b)
      if (static_cast<std::size_t>(__builtin_popcountll(b)) == k)
        trip.emplace_back(int(b), int(b), cplx(1.0));
    Operator m(dim, dim);
    m.setFromTriplets(trip.begin(), trip.end());
    povm.effects.push_back(std::move(m));
  }
  return povm;
}

}  // namespace chiralspin
