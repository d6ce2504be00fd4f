// Analytic dark-state constructions and certification: dimers, tetramers,
// permutation-generated multimers, two-waveguide reductions and
// detuning-pattern classification.
#pragma once

#include "chiralspin/netmodel.hpp"
#include "chiralspin/qops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace chiralspin {

using DetuningPattern = std::vector<double>;

struct MultimerState {
  std::vector<std::vector<std::size_t>> partition;  // disjoint even-size clusters
  DetuningPattern detunings;                        // pattern the state is dark for
  std::vector<cplx> pair_alphas;                    // per-pair singlet fractions (dimerized case)
  PureState realized;
};

struct DarkCertificate {
  std::vector<double> jump_residuals;  // ||c psi|| per channel
  double hamiltonian_residual = 0.0;   // ||(H - <H>) psi||
  bool verdict = false;
};

// (|gg> + alpha |S>)/sqrt(1 + |alpha|^2) on two spins
inline PureState dimer_state(cplx alpha) {
  PureState psi = PureState::Zero(4);
  psi[0] = 1.0;
  psi += alpha * singlet_state(1, 2, 2);
  psi.normalize();
  return psi;
}

// alpha = -2 sqrt(2) Omega / (2 delta + i Delta_gamma)
inline cplx singlet_fraction(cplx omega, double delta, double dgamma) {
  if (delta == 0.0 && dgamma == 0.0)
    throw std::domain_error("singlet_fraction: delta and Delta_gamma both zero, no unique dark state");
  return -2.0 * std::sqrt(2.0) * omega / cplx(2.0 * delta, dgamma);
}

// Relaxation rate of the two-spin dark state,
//   gamma_eff = 2 (gL + gR) (dg^2/4 + delta^2) / (dg^2/4 + delta^2 + 2 |Omega|^2)
inline double gamma_eff(cplx omega, double delta, double gamma_L, double gamma_R) {
  if (gamma_L < 0 || gamma_R < 0) throw std::invalid_argument("gamma_eff: negative rate");
  const double dg = gamma_R - gamma_L;
  const double a = 0.25 * dg * dg + delta * delta;
  return 2.0 * (gamma_L + gamma_R) * a / (a + 2.0 * std::norm(omega));
}

namespace detail {

// Product over disjoint pairs of (1 + alpha_p (sigma_l^dag - sigma_j^dag)/sqrt(2))
// applied to |g...g>, normalized.
inline PureState paired_dimer_product(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                      const std::vector<cplx>& alphas, std::size_t n) {
  PureState psi = ground_state(n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [j, l] = pairs[p];
    PureState sing = (apply_site_op(sigma_raise(), l, psi) -
                      apply_site_op(sigma_raise(), j, psi)) / std::sqrt(2.0);
    psi += alphas[p] * sing;
  }
  psi.normalize();
  return psi;
}

inline bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool cancels(double a, double b) { return close(a, -b); }

}  // namespace detail

// Staggered pattern (delta_{2j} = -delta_{2j-1}) => product of adjacent dimers.
inline MultimerState dimerized_state(const DetuningPattern& pattern, cplx omega, double dgamma) {
  const std::size_t n = pattern.size();
  if (n % 2 != 0) throw std::invalid_argument("dimerized_state: N must be even");
  MultimerState out;
  out.detunings = pattern;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < n; j += 2) {
    if (!detail::cancels(pattern[j], pattern[j + 1]))
      throw std::invalid_argument("dimerized_state: pattern is not staggered");
    if (pattern[j] == 0.0 && dgamma == 0.0)
      throw std::domain_error("dimerized_state: resonant pair with Delta_gamma = 0 has no unique dark state");
    out.partition.push_back({j + 1, j + 2});
    pairs.emplace_back(j + 1, j + 2);
    out.pair_alphas.push_back(singlet_fraction(omega, pattern[j], dgamma));
  }
  out.realized = detail::paired_dimer_product(pairs, out.pair_alphas, n);
  return out;
}

enum class TetramerCondition { I, II, III };

using ComplexPattern = std::vector<cplx>;

inline std::optional<TetramerCondition> tetramer_condition(const ComplexPattern& d,
                                                           double tol = 1e-12) {
  auto c = [&](std::size_t a, std::size_t b) { return std::abs(d[a] + d[b]) <= tol * std::max(1.0, std::abs(d[a])); };
  if (c(0, 1) && c(2, 3)) return TetramerCondition::I;
  if (c(0, 2) && c(1, 3)) return TetramerCondition::II;
  if (c(0, 3) && c(1, 2)) return TetramerCondition::III;
  return std::nullopt;
}

inline std::optional<TetramerCondition> tetramer_condition(const DetuningPattern& d,
                                                           double tol = 1e-12) {
  return tetramer_condition(ComplexPattern(d.begin(), d.end()), tol);
}

// Four-spin dark state for detuning patterns satisfying one of the pairwise
// cancellation conditions, built from the closed-form singlet-product
// coefficients with Q = -i Delta_gamma / 2. The coefficients are rational in
// the detunings, so the construction extends to complex patterns (as arise
// from two-waveguide reductions with a complex mapping angle).
inline PureState tetramer_state(const ComplexPattern& deltas, cplx omega, double dgamma) {
  if (deltas.size() != 4) throw std::invalid_argument("tetramer_state: need 4 detunings");
  if (dgamma <= 0) throw std::invalid_argument("tetramer_state: Delta_gamma must be > 0");
  const auto cond = tetramer_condition(deltas);
  if (!cond) throw std::domain_error("tetramer_state: detunings do not cancel in pairs, not a dark state");

  const cplx Q(0.0, -0.5 * dgamma);
  const cplx d1 = deltas[0], d2 = deltas[1], d3 = deltas[2], d4 = deltas[3];
  const double sqrt2 = std::sqrt(2.0);

  const cplx a12 = omega * (2.0 * Q * Q + 2.0 * d3 * d4 + (Q + d1) * (d3 + d4)) /
                   (sqrt2 * (Q - d1) * (Q + d3) * (Q + d4));
  const cplx a34 = omega * (2.0 * Q + d3 - d4) / (sqrt2 * (Q + d3) * (Q + d4));
  const cplx a13 = omega * (d3 + d4) / (2.0 * sqrt2 * (Q + d3) * (Q + d4));
  const cplx a1324 = 2.0 * sqrt2 * omega * a13 / (2.0 * Q - d1 - d2);
  cplx a1234;
  if (*cond == TetramerCondition::III) {
    a1234 = sqrt2 * omega * (4.0 * Q + d3 + d4) * a34 /
            ((2.0 * Q + d3 + d4) * (2.0 * Q - d3 + d4));
  } else {
    a1234 = omega * omega * (d1 + d2 - 4.0 * Q) /
            ((Q - d1) * (Q + d4) * (d1 + d2 - 2.0 * Q));
  }

  auto s2 = [](std::size_t j, std::size_t l) { return singlet_state(j, l, 4); };
  auto ss = [&](std::size_t j1, std::size_t l1, std::size_t j2, std::size_t l2) {
    // |S>_{j1 l1} |S>_{j2 l2} on disjoint pairs
    PureState psi = ground_state(4);
    auto raise_singlet = [&](PureState base, std::size_t j, std::size_t l) {
      return ((apply_site_op(sigma_raise(), l, base) -
               apply_site_op(sigma_raise(), j, base)) / std::sqrt(2.0)).eval();
    };
    return raise_singlet(raise_singlet(psi, j1, l1), j2, l2);
  };

  PureState psi = ground_state(4);
  psi += a12 * s2(1, 2) + a34 * s2(3, 4);
  psi += a13 * (s2(1, 3) + s2(1, 4) + s2(2, 3) + s2(2, 4));
  psi += a1234 * ss(1, 2, 3, 4);
  psi += a1324 * (ss(1, 3, 2, 4) + ss(1, 4, 2, 3));
  psi.normalize();
  return psi;
}

inline PureState tetramer_state(const DetuningPattern& deltas, cplx omega, double dgamma) {
  return tetramer_state(ComplexPattern(deltas.begin(), deltas.end()), omega, dgamma);
}

// exp(i (theta/2) sigma_j . sigma_{j+1}) = e^{-i theta/2} (cos theta + i sin theta SWAP).
// For complex theta the gate is invertible (inverse: -theta) but not unitary.
inline Operator swap_gate(cplx theta, std::size_t site, std::size_t n_spins) {
  if (site < 1 || site >= n_spins) throw std::invalid_argument("swap_gate: site out of range");
  Eigen::Matrix4cd swap = Eigen::Matrix4cd::Zero();
  swap(0, 0) = swap(3, 3) = 1.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  Eigen::Matrix4cd u = std::exp(cplx(0, -0.5) * theta) *
                       (std::cos(theta) * Eigen::Matrix4cd::Identity() +
                        cplx(0, 1) * std::sin(theta) * swap);
  return embed_pair(u, site, site + 1, n_spins);
}

inline Operator swap_unitary(double theta, std::size_t site, std::size_t n_spins) {
  return swap_gate(cplx(theta, 0.0), site, n_spins);
}

// Swap angle that leaves the chiral master equation invariant up to the
// exchange delta_j <-> delta_{j+1}.
inline double theta_for_swap(double delta_j, double delta_j1, double dgamma) {
  if (dgamma == 0.0)
    throw std::domain_error("theta_for_swap: Delta_gamma = 0, the swap is not an entangling gate");
  return std::atan((delta_j1 - delta_j) / dgamma);
}

// Builds the dark state for the pattern staggered . perm (i.e. spin i carries
// detuning staggered[perm[i]-1]) by applying adjacent-transposition swap
// gates to the dimerized state, recomputing the angle against the
// intermediate pattern after each swap.
inline MultimerState multimer_from_permutation(const std::vector<std::size_t>& perm,
                                               const DetuningPattern& staggered, cplx omega,
                                               double dgamma) {
  const std::size_t n = staggered.size();
  if (n % 2 != 0) throw std::invalid_argument("multimer_from_permutation: N must be even");
  if (dgamma <= 0) throw std::invalid_argument("multimer_from_permutation: Delta_gamma must be > 0");
  if (perm.size() != n) throw std::invalid_argument("multimer_from_permutation: permutation length mismatch");
  {
    std::vector<bool> seen(n + 1, false);
    for (std::size_t v : perm) {
      if (v < 1 || v > n || seen[v])
        throw std::invalid_argument("multimer_from_permutation: not a permutation of 1..N");
      seen[v] = true;
    }
  }

  MultimerState state = dimerized_state(staggered, omega, dgamma);
  // cluster id per spin; merged when an entangling swap straddles clusters
  std::vector<std::size_t> cluster(n);
  for (std::size_t i = 0; i < n; ++i) cluster[i] = i / 2;

  // bubble the identity arrangement into perm, swapping detunings (and the
  // state) one adjacent transposition at a time
  std::vector<std::size_t> arrangement(n);
  for (std::size_t i = 0; i < n; ++i) arrangement[i] = i + 1;
  std::vector<std::size_t> target_rank(n + 1);
  for (std::size_t i = 0; i < n; ++i) target_rank[perm[i]] = i;

  DetuningPattern pattern = staggered;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (target_rank[arrangement[i]] > target_rank[arrangement[i + 1]]) {
        const double theta = theta_for_swap(pattern[i], pattern[i + 1], dgamma);
        // the gate at +theta maps dark states of the swapped pattern back to
        // the current one, so transporting forward takes the inverse
        state.realized = Operator(swap_unitary(theta, i + 1, n).adjoint()) * state.realized;
        std::swap(pattern[i], pattern[i + 1]);
        std::swap(arrangement[i], arrangement[i + 1]);
        if (theta != 0.0 && cluster[i] != cluster[i + 1]) {
          const std::size_t from = cluster[i + 1], to = cluster[i];
          for (auto& c : cluster)
            if (c == from) c = to;
        } else {
          std::swap(cluster[i], cluster[i + 1]);
        }
        changed = true;
      }
    }
  }

  state.detunings = pattern;
  state.pair_alphas.clear();
  state.partition.clear();
  std::set<std::size_t> done;
  for (std::size_t i = 0; i < n; ++i) {
    if (done.count(cluster[i])) continue;
    done.insert(cluster[i]);
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < n; ++k)
      if (cluster[k] == cluster[i]) members.push_back(k + 1);
    state.partition.push_back(std::move(members));
  }
  state.realized.normalize();
  return state;
}

struct TwoGuideReduction {
  cplx theta{0.0, 0.0};
  cplx epsilon{0.0, 0.0};
  cplx mapped_delta_j{0.0, 0.0};
  cplx mapped_delta_j1{0.0, 0.0};
  bool real(double tol = 1e-12) const { return std::abs(epsilon.imag()) <= tol; }
};

// Maps a two-waveguide network whose guides interchange spins j and j+1 onto
// a single-guide one with asymmetry dgamma1 + dgamma2. The gate angle solves
//   dgamma1 tan^2(theta) - (delta_j - delta_j1) tan(theta) + dgamma2 = 0,
// and the detuning split of the mapped pair is
//   epsilon = (delta_j - delta_j1) cos(2 theta) - (dgamma1 - dgamma2) sin(2 theta),
// which evaluates to sqrt((delta_j - delta_j1)^2 - 4 dgamma1 dgamma2). When
// the discriminant is negative the mapping continues analytically: theta is
// complex, the gate is non-unitary, and the mapped detunings of the pair are
// complex conjugates of each other. The transported dark state remains an
// exact dark state of the physical two-waveguide network in either regime.
// second_branch selects the other root (epsilon -> -epsilon).
inline TwoGuideReduction two_waveguide_reduction(double dgamma1, double dgamma2, double delta_j,
                                                 double delta_j1, bool second_branch = false) {
  if (dgamma1 <= 0 || dgamma2 <= 0)
    throw std::invalid_argument("two_waveguide_reduction: asymmetries must be positive");
  const double d = delta_j - delta_j1;
  cplx eps = std::sqrt(cplx(d * d - 4.0 * dgamma1 * dgamma2, 0.0));
  if (second_branch) eps = -eps;
  TwoGuideReduction out;
  out.theta = std::atan((d - eps) / (2.0 * dgamma1));
  out.epsilon = eps;
  const double mean = 0.5 * (delta_j + delta_j1);
  out.mapped_delta_j = mean + 0.5 * eps;
  out.mapped_delta_j1 = mean - 0.5 * eps;
  return out;
}

struct PatternClassification {
  bool pairable = false;
  std::vector<std::pair<std::size_t, std::size_t>> pairing;  // 1-based spin pairs
  std::set<TetramerCondition> n4_conditions;                 // populated for N = 4
};

inline PatternClassification classify_pattern(const DetuningPattern& pattern) {
  PatternClassification out;
  const std::size_t n = pattern.size();
  if (n % 2 == 0) {
    // sort by value; pair extremes inward, zeros pair among themselves
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return pattern[a] < pattern[b]; });
    bool ok = true;
    std::vector<std::pair<std::size_t, std::size_t>> pairing;
    for (std::size_t i = 0; i < n / 2; ++i) {
      const std::size_t a = idx[i], b = idx[n - 1 - i];
      if (!detail::cancels(pattern[a], pattern[b])) {
        ok = false;
        break;
      }
      pairing.emplace_back(std::min(a, b) + 1, std::max(a, b) + 1);
    }
    if (ok) {
      out.pairable = true;
      std::sort(pairing.begin(), pairing.end());
      out.pairing = std::move(pairing);
    }
  }
  if (n == 4) {
    auto c = [&](std::size_t a, std::size_t b) { return detail::cancels(pattern[a], pattern[b]); };
    if (c(0, 1) && c(2, 3)) out.n4_conditions.insert(TetramerCondition::I);
    if (c(0, 2) && c(1, 3)) out.n4_conditions.insert(TetramerCondition::II);
    if (c(0, 3) && c(1, 2)) out.n4_conditions.insert(TetramerCondition::III);
  }
  return out;
}

// Unique pairing of spins with opposite detunings (bidirectional channel);
// requires all detunings distinct and nonzero.
inline std::vector<std::pair<std::size_t, std::size_t>> bidirectional_pairing(
    const DetuningPattern& pattern) {
  const std::size_t n = pattern.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (pattern[i] == 0.0)
      throw std::domain_error("bidirectional_pairing: zero detuning, steady state not unique");
    for (std::size_t j = i + 1; j < n; ++j)
      if (detail::close(pattern[i], pattern[j]))
        throw std::domain_error("bidirectional_pairing: equal detunings, steady state not unique");
  }
  auto cls = classify_pattern(pattern);
  if (!cls.pairable)
    throw std::invalid_argument("bidirectional_pairing: pattern does not cancel in pairs");
  return cls.pairing;
}

// Product of dimers over (possibly non-adjacent) pairs; alpha of each pair is
// evaluated at the detuning of its first (lower-index) spin.
inline MultimerState paired_dimer_state(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairing,
    const DetuningPattern& pattern, cplx omega, double dgamma) {
  const std::size_t n = pattern.size();
  MultimerState out;
  out.detunings = pattern;
  std::vector<cplx> alphas;
  for (const auto& [j, l] : pairing) {
    out.partition.push_back({j, l});
    alphas.push_back(singlet_fraction(omega, pattern[j - 1], dgamma));
  }
  out.pair_alphas = alphas;
  out.realized = detail::paired_dimer_product(pairing, alphas, n);
  return out;
}

// Residuals of the dark-state conditions: ||c psi|| for every jump channel
// and ||(H - <H>) psi|| with the drive at its plateau value.
inline DarkCertificate verify_dark(const PureState& psi, const LindbladModel& model,
                                   double tol = 1e-9) {
  if (psi.size() != static_cast<Eigen::Index>(model.dim()))
    throw std::invalid_argument("verify_dark: dimension mismatch");
  DarkCertificate cert;
  cert.verdict = true;
  for (const auto& j : model.jumps) {
    const double r = (j.op * psi).norm();
    cert.jump_residuals.push_back(r);
    if (r >= tol) cert.verdict = false;
  }
  Operator h = model.hamiltonian;
  if (model.schedule) h = (h + model.schedule->omega_scale * model.drive_coupling).eval();
  const cplx e = psi.dot(h * psi);
  cert.hamiltonian_residual = (h * psi - e * psi).norm();
  if (cert.hamiltonian_residual >= tol) cert.verdict = false;
  return cert;
}

}  // namespace chiralspin
