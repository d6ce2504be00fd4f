// Translation of a declarative chiral-network description into a concrete
// Lindblad model: system Hamiltonian, waveguide-mediated interactions and
// collective jump operators.
//
// Units: gamma_R of the first waveguide == 1; all rates, Rabi frequencies,
// detunings and times are expressed in these units. Positions enter only
// through phases mod 2*pi and the ordering of the spins along each guide.
#pragma once

#include "chiralspin/qops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace chiralspin {

struct RampSchedule {
  double omega_scale = 1.0;  // final plateau multiplier for the rabi vector
  double t_max = 0.0;        // sin^2 ramp duration

  double value(double t) const {
    if (t >= t_max) return omega_scale;
    const double s = std::sin(0.5 * std::numbers::pi * t / t_max);
    return omega_scale * s * s;
  }
};

struct DriveSpec {
  std::vector<cplx> rabi;        // Omega_j
  std::vector<double> detuning;  // delta_j
  std::optional<RampSchedule> schedule;  // absent => constant drive
};

struct WaveguideSpec {
  double gamma_L = 0.0;
  double gamma_R = 1.0;
  std::vector<std::size_t> order;  // spin ordering along the guide; order[0] is leftmost
  std::vector<double> phases;      // k x_j mod 2*pi, indexed by spin (not by position)
  std::vector<double> per_spin_rates;  // optional scale factors for gamma_{lambda j}; empty => uniform
};

struct NetworkSpec {
  std::size_t n_spins = 0;
  DriveSpec drive;
  std::vector<WaveguideSpec> waveguides;
  double onsite_decay = 0.0;  // gamma'
};

struct JumpChannel {
  double rate;
  Operator op;
  bool waveguide = true;  // false for on-site gamma' channels
};

struct LindbladModel {
  std::size_t n_spins = 0;
  Operator hamiltonian;     // time-independent part (detunings + waveguide terms)
  Operator drive_coupling;  // sum_j (Omega_j sigma_j + h.c.), scaled by the schedule
  std::optional<RampSchedule> schedule;
  std::vector<JumpChannel> jumps;

  std::size_t dim() const { return dim_for(n_spins); }

  double drive_scale(double t) const {
    return schedule ? schedule->value(t) : 1.0;
  }

  // H(t) as a sparse operator (drive included at its instantaneous value)
  Operator hamiltonian_at(double t) const {
    if (!schedule) return hamiltonian;
    return (hamiltonian + drive_scale(t) * drive_coupling).eval();
  }
};

namespace detail {

inline void validate_spec(const NetworkSpec& spec) {
  const std::size_t n = spec.n_spins;
  if (n < 1) throw std::invalid_argument("NetworkSpec: n_spins must be >= 1");
  if (spec.drive.rabi.size() != n || spec.drive.detuning.size() != n)
    throw std::invalid_argument("NetworkSpec: drive vectors must have length n_spins");
  if (spec.waveguides.empty())
    throw std::invalid_argument("NetworkSpec: at least one waveguide required");
  if (spec.onsite_decay < 0) throw std::invalid_argument("NetworkSpec: onsite_decay < 0");
  for (const auto& wg : spec.waveguides) {
    if (wg.gamma_L < 0 || wg.gamma_R < 0 || wg.gamma_L + wg.gamma_R <= 0)
      throw std::invalid_argument("WaveguideSpec: need gamma_L, gamma_R >= 0 and gamma_L + gamma_R > 0");
    if (wg.order.size() != n || wg.phases.size() != n)
      throw std::invalid_argument("WaveguideSpec: order/phases must have length n_spins");
    if (!wg.per_spin_rates.empty() && wg.per_spin_rates.size() != n)
      throw std::invalid_argument("WaveguideSpec: per_spin_rates length mismatch");
    std::vector<bool> seen(n + 1, false);
    for (std::size_t s : wg.order) {
      if (s < 1 || s > n || seen[s])
        throw std::invalid_argument("WaveguideSpec: order must be a permutation of 1..N");
      seen[s] = true;
    }
  }
}

inline double rate_scale(const WaveguideSpec& wg, std::size_t spin) {
  return wg.per_spin_rates.empty() ? 1.0 : wg.per_spin_rates[spin - 1];
}

// All phases equal mod 2*pi (tolerance for the c_L = c_R degeneracy check).
inline bool commensurate(const WaveguideSpec& wg, double tol = 1e-9) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 1; j < wg.phases.size(); ++j) {
    double d = std::remainder(wg.phases[j] - wg.phases[0], two_pi);
    if (std::abs(d) > tol) return false;
  }
  return true;
}

}  // namespace detail

// H_sys = sum_j (-delta_j sigma_j^dag sigma_j + Omega_j sigma_j + h.c.).
// When a drive schedule is present the Omega part is kept separate (see
// assemble_model); this function always returns the full resonant form.
inline Operator build_system_hamiltonian(const NetworkSpec& spec) {
  detail::validate_spec(spec);
  const std::size_t n = spec.n_spins;
  Operator h = zero_op(n);
  const Eigen::Matrix2cd num = sigma_raise() * sigma_lower();
  for (std::size_t j = 1; j <= n; ++j) {
    h += cplx(-spec.drive.detuning[j - 1]) * embed(num, j, n);
    Eigen::Matrix2cd d = spec.drive.rabi[j - 1] * sigma_lower() +
                         std::conj(spec.drive.rabi[j - 1]) * sigma_raise();
    h += embed(d, j, n);
  }
  return h;
}

inline Operator build_detuning_hamiltonian(const NetworkSpec& spec) {
  const std::size_t n = spec.n_spins;
  Operator h = zero_op(n);
  const Eigen::Matrix2cd num = sigma_raise() * sigma_lower();
  for (std::size_t j = 1; j <= n; ++j)
    h += cplx(-spec.drive.detuning[j - 1]) * embed(num, j, n);
  return h;
}

inline Operator build_drive_coupling(const NetworkSpec& spec) {
  const std::size_t n = spec.n_spins;
  Operator h = zero_op(n);
  for (std::size_t j = 1; j <= n; ++j) {
    Eigen::Matrix2cd d = spec.drive.rabi[j - 1] * sigma_lower() +
                         std::conj(spec.drive.rabi[j - 1]) * sigma_raise();
    h += embed(d, j, n);
  }
  return h;
}

// Waveguide-mediated interaction of guide m (0-based index), summed over both
// propagation directions. For each direction the spin downstream picks up the
// raising operator:
//   right-movers: -i gamma_R/2 sum_{pos_j > pos_l} (e^{i(phi_j - phi_l)} s_j^dag s_l - h.c.)
//   left-movers:  -i gamma_L/2 sum_{pos_j < pos_l} (e^{i(phi_l - phi_j)} s_j^dag s_l - h.c.)
// The result is Hermitian term by term.
inline Operator build_waveguide_hamiltonian(const NetworkSpec& spec, std::size_t m) {
  detail::validate_spec(spec);
  if (m >= spec.waveguides.size())
    throw std::invalid_argument("build_waveguide_hamiltonian: waveguide index out of range");
  const auto& wg = spec.waveguides[m];
  const std::size_t n = spec.n_spins;

  std::vector<std::size_t> pos(n + 1);
  for (std::size_t r = 0; r < n; ++r) pos[wg.order[r]] = r;

  Operator h = zero_op(n);
  for (std::size_t j = 1; j <= n; ++j)
    for (std::size_t l = 1; l <= n; ++l) {
      if (j == l) continue;
      const double amp_scale = std::sqrt(detail::rate_scale(wg, j) * detail::rate_scale(wg, l));
      // downstream-of relation per direction
      for (int dir = 0; dir < 2; ++dir) {
        const bool right = (dir == 0);
        const double gamma = right ? wg.gamma_R : wg.gamma_L;
        if (gamma == 0.0) continue;
        const bool downstream = right ? (pos[j] > pos[l]) : (pos[j] < pos[l]);
        if (!downstream) continue;
        const double phase = right ? (wg.phases[j - 1] - wg.phases[l - 1])
                                   : (wg.phases[l - 1] - wg.phases[j - 1]);
        const cplx coef = cplx(0, -0.5) * gamma * amp_scale * std::exp(cplx(0, phase));
        Operator term = embed(sigma_raise(), j, n) * embed(sigma_lower(), l, n);
        h += coef * term + std::conj(coef) * Operator(term.adjoint());
      }
    }
  return h;
}

// Collective jump operators c_lambda^(m) = sum_j sqrt(s_j) e^{-i lambda phi_j} sigma_j
// with rates gamma_lambda^(m); the two directions merge into a single channel
// when the guide is commensurate and uniformly coupled. On-site decay adds N
// channels sigma_j at rate gamma'. Zero-rate channels are dropped.
inline std::vector<JumpChannel> build_jump_operators(const NetworkSpec& spec) {
  detail::validate_spec(spec);
  const std::size_t n = spec.n_spins;
  std::vector<JumpChannel> jumps;

  for (const auto& wg : spec.waveguides) {
    auto collective = [&](int lambda) {  // +1 = R, -1 = L
      Operator c = zero_op(n);
      for (std::size_t j = 1; j <= n; ++j) {
        const cplx amp = std::sqrt(detail::rate_scale(wg, j)) *
                         std::exp(cplx(0, -lambda * wg.phases[j - 1]));
        c += amp * embed(sigma_lower(), j, n);
      }
      return c;
    };
    if (detail::commensurate(wg)) {
      // c_L and c_R coincide up to a global phase
      const double rate = wg.gamma_L + wg.gamma_R;
      if (rate > 0) {
        Operator c = zero_op(n);
        for (std::size_t j = 1; j <= n; ++j)
          c += cplx(std::sqrt(detail::rate_scale(wg, j))) * embed(sigma_lower(), j, n);
        jumps.push_back({rate, std::move(c)});
      }
    } else {
      if (wg.gamma_R > 0) jumps.push_back({wg.gamma_R, collective(+1)});
      if (wg.gamma_L > 0) jumps.push_back({wg.gamma_L, collective(-1)});
    }
  }

  if (spec.onsite_decay > 0)
    for (std::size_t j = 1; j <= n; ++j)
      jumps.push_back({spec.onsite_decay, embed(sigma_lower(), j, n), false});

  return jumps;
}

inline LindbladModel assemble_model(const NetworkSpec& spec) {
  detail::validate_spec(spec);
  LindbladModel model;
  model.n_spins = spec.n_spins;
  model.schedule = spec.drive.schedule;

  Operator h = build_detuning_hamiltonian(spec);
  for (std::size_t m = 0; m < spec.waveguides.size(); ++m)
    h += build_waveguide_hamiltonian(spec, m);

  model.drive_coupling = build_drive_coupling(spec);
  if (model.schedule) {
    model.hamiltonian = h;
  } else {
    model.hamiltonian = (h + model.drive_coupling).eval();
  }
  model.jumps = build_jump_operators(spec);
  return model;
}

// Asymmetry Delta_gamma of a single-waveguide commensurate network.
inline double delta_gamma(const NetworkSpec& spec) {
  if (spec.waveguides.size() != 1)
    throw std::invalid_argument("delta_gamma: single-waveguide networks only");
  return spec.waveguides.front().gamma_R - spec.waveguides.front().gamma_L;
}

// Convenience constructor: single commensurate waveguide, homogeneous drive.
inline NetworkSpec single_guide_network(std::size_t n, double omega,
                                        std::vector<double> detunings,
                                        double gamma_L, double gamma_R = 1.0,
                                        double onsite = 0.0) {
  NetworkSpec spec;
  spec.n_spins = n;
  spec.drive.rabi.assign(n, cplx(omega));
  spec.drive.detuning = std::move(detunings);
  WaveguideSpec wg;
  wg.gamma_L = gamma_L;
  wg.gamma_R = gamma_R;
  wg.order.resize(n);
  for (std::size_t j = 0; j < n; ++j) wg.order[j] = j + 1;
  wg.phases.assign(n, 0.0);
  spec.waveguides.push_back(std::move(wg));
  spec.onsite_decay = onsite;
  return spec;
}

}  // namespace chiralspin
