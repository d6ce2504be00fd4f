// Quantum-jump (Monte-Carlo wavefunction) unraveling of a LindbladModel.
//
// Waiting times are sampled by norm-threshold bisection on top of the
// adaptive integrator: draw u ~ U(0,1), propagate |psi> under the
// non-Hermitian effective Hamiltonian until ||psi||^2 = u, then jump.
#pragma once

#include "chiralspin/evolve.hpp"
#include "chiralspin/integrate.hpp"
#include "chiralspin/netmodel.hpp"
#include "chiralspin/qops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <thread>
#include <vector>

namespace chiralspin {

struct TrajectoryConfig {
  std::size_t n_traj = 1;
  std::uint64_t seed = 0;
  double t_max = 100.0;
  std::vector<double> sample_times;
  double jump_tolerance = 1e-10;  // bisection tolerance on ||psi||^2 - u
  double rel_tol = 1e-7;
  double abs_tol = 1e-9;
  std::size_t n_threads = 1;
  bool allow_large = false;  // lift the N <= 14 state-vector cap (memory!)
};

struct TrajectoryRecord {
  std::vector<double> jump_times;
  std::vector<std::size_t> jump_channels;
  std::vector<PureState> sampled_states;  // normalized, at cfg.sample_times
};

/// Counter-based splittable stream: each (seed, traj_index) keys an
// independent, reproducible sequence.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(seed ^ 0x9e3779b97f4a7c15ull);
    state_ = mix(state_ ^ mix(stream + 0xbf58476d1ce4e5b9ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // uniform in the open interval (0, 1)
  double uniform() {
    const double u = (next_u64() >> 11) * 0x1.0p-53;
    return std::clamp(u, 0x1.0p-53, 1.0 - 0x1.0p-53);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }
  std::uint64_t state_;
};

// H - (i/2) sum_k rate_k op_k^dag op_k (static part; drive schedule excluded)
inline Operator effective_hamiltonian(const LindbladModel& model) {
  Operator damping = zero_op(model.n_spins);
  for (const auto& j : model.jumps)
    damping += cplx(j.rate) * Operator(j.op.adjoint() * j.op);
  return (model.hamiltonian - cplx(0, 0.5) * damping).eval();
}

inline TrajectoryRecord run_trajectory(const LindbladModel& model, const PureState& psi0,
                                       const TrajectoryConfig& cfg, std::size_t traj_index) {
  check_pure_state(psi0);
  if (model.n_spins > 14 && !cfg.allow_large)
    throw std::invalid_argument(
        "run_trajectory: N > 14 needs allow_large (state vector exceeds 16384 amplitudes)");

  const Operator heff = effective_hamiltonian(model);
  auto rhs = [&](double t, const Vector& psi) -> Vector {
    Vector out = cplx(0, -1) * (heff * psi);
    if (model.schedule)
      out.noalias() += cplx(0, -model.drive_scale(t)) * (model.drive_coupling * psi);
    return out;
  };

  StreamRng rng(cfg.seed, traj_index);
  StepControl ctl{cfg.rel_tol, cfg.abs_tol, 0.5, 1e-3};

  TrajectoryRecord rec;
  std::vector<double> samples = cfg.sample_times;
  if (samples.empty()) samples = {cfg.t_max};

  PureState psi = psi0;  // unnormalized between jumps
  double t = 0.0, h = 1e-3;
  double u = rng.uniform();
  std::size_t next_sample = 0;

  auto do_jump = [&](double t_jump) {
    std::vector<double> w(model.jumps.size());
    double total = 0.0;
    for (std::size_t k = 0; k < model.jumps.size(); ++k) {
      w[k] = model.jumps[k].rate * (model.jumps[k].op * psi).squaredNorm();
      total += w[k];
    }
    if (total <= 0.0)
      throw std::runtime_error("run_trajectory: all jump channels annihilate the state");
    double pick = rng.uniform() * total;
    std::size_t channel = 0;
    for (; channel + 1 < w.size(); ++channel) {
      if (pick < w[channel]) break;
      pick -= w[channel];
    }
    psi = model.jumps[channel].op * psi;
    psi.normalize();
    rec.jump_times.push_back(t_jump);
    rec.jump_channels.push_back(channel);
    u = rng.uniform();
  };

  while (next_sample < samples.size() && samples[next_sample] <= 1e-14)
    rec.sampled_states.push_back(psi.normalized()), ++next_sample;

  while (t < cfg.t_max - 1e-12) {
    const double t_stop = next_sample < samples.size() ? samples[next_sample] : cfg.t_max;
    // one adaptive step, clipped at the next sample boundary
    double h_try = std::min(h, t_stop - t);
    PureState psi_new;
    double err = 0.0;
    for (;;) {
      psi_new = rk45_fixed_step(rhs, psi, t, h_try, ctl, &err);
      if (err <= 1.0 || h_try <= 1e-13) break;
      h_try *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
    const double n2_old = psi.squaredNorm();
    double n2_new = psi_new.squaredNorm();
    if (n2_new > n2_old * (1.0 + 1e-10))
      throw std::runtime_error("run_trajectory: norm increased along no-jump evolution");

    if (n2_new < u) {
      // jump inside this step: bisect the crossing time
      double lo = 0.0, hi = h_try;
      PureState psi_hi = psi_new;
      while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        PureState psi_mid = rk45_fixed_step(rhs, psi, t, mid, ctl);
        const double g = psi_mid.squaredNorm() - u;
        if (std::abs(g) < cfg.jump_tolerance) {
          psi_hi = psi_mid;
          lo = hi = mid;
          break;
        }
        if (g > 0) lo = mid;
        else {
          hi = mid;
          psi_hi = psi_mid;
        }
      }
      t += 0.5 * (lo + hi);
      psi = psi_hi;
      do_jump(t);
      h = std::min(h_try, 1e-2);
      continue;
    }

    t += h_try;
    psi = std::move(psi_new);
    if (err <= 1.0)
      h = h_try * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    if (next_sample < samples.size() && t >= samples[next_sample] - 1e-12) {
      rec.sampled_states.push_back(psi.normalized());
      ++next_sample;
    }
  }
  while (next_sample < samples.size()) {
    rec.sampled_states.push_back(psi.normalized());
    ++next_sample;
  }
  return rec;
}

namespace detail {

struct ProbeAccumulator {
  // delete-one-bucket jackknife over n_buckets groups of trajectories
  std::size_t n_buckets;
  std::vector<std::size_t> counts;                      // per bucket
  std::vector<std::vector<DenseMatrix>> sums;           // [sample][bucket]
};

inline double jackknife_sem(const std::vector<double>& theta_k) {
  const double k = static_cast<double>(theta_k.size());
  double mean = 0.0;
  for (double v : theta_k) mean += v;
  mean /= k;
  double ss = 0.0;
  for (double v : theta_k) ss += (v - mean) * (v - mean);
  return std::sqrt((k - 1.0) / k * ss);
}

}  // namespace detail

// Ensemble average over cfg.n_traj trajectories. Probe-subset reduced density
// matrices are averaged over |psi><psi| samples; purity/entropy are derived
// from the averaged matrices, with standard errors from a delete-one-bucket
// jackknife (summation order fixed by trajectory index).
inline ObservableSeries ensemble_average(const LindbladModel& model, const PureState& psi0,
                                         const TrajectoryConfig& cfg,
                                         const std::vector<std::vector<std::size_t>>& probes) {
  if (cfg.n_traj < 1) throw std::invalid_argument("ensemble_average: n_traj must be >= 1");
  std::vector<double> samples = cfg.sample_times;
  if (samples.empty()) samples = {cfg.t_max};
  const std::size_t n_samples = samples.size();
  const std::size_t n_buckets = std::min<std::size_t>(cfg.n_traj, 20);

  std::vector<detail::ProbeAccumulator> acc(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto dk = static_cast<Eigen::Index>(dim_for(probes[p].size()));
    acc[p].n_buckets = n_buckets;
    acc[p].counts.assign(n_buckets, 0);
    acc[p].sums.assign(n_samples, std::vector<DenseMatrix>(n_buckets, DenseMatrix::Zero(dk, dk)));
  }
  // per-spin populations, accumulated the same way
  std::vector<std::vector<std::vector<double>>> pop_sums(
      n_samples, std::vector<std::vector<double>>(model.n_spins,
                                                  std::vector<double>(n_buckets, 0.0)));
  std::vector<std::size_t> bucket_counts(n_buckets, 0);
  auto bucket_of = [&](std::size_t traj) { return traj * n_buckets / cfg.n_traj; };

  TrajectoryConfig cfg1 = cfg;
  cfg1.sample_times = samples;

  auto process_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t traj = lo; traj < hi; ++traj) {
      TrajectoryRecord rec = run_trajectory(model, psi0, cfg1, traj);
      const std::size_t b = bucket_of(traj);
      for (std::size_t s = 0; s < n_samples; ++s) {
        const PureState& psi = rec.sampled_states[s];
        for (std::size_t p = 0; p < probes.size(); ++p)
          acc[p].sums[s][b] += reduced_from_pure(psi, probes[p]);
        for (std::size_t j = 1; j <= model.n_spins; ++j) {
          DenseMatrix r1 = reduced_from_pure(psi, {j});
          pop_sums[s][j - 1][b] += r1(1, 1).real();
        }
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, cfg.n_threads);
  if (n_threads == 1) {
    process_range(0, cfg.n_traj);
  } else {
    // bucket-aligned partitioning keeps within-bucket summation order fixed
    std::vector<std::future<void>> futs;
    const std::size_t per = (n_buckets + n_threads - 1) / n_threads;
    for (std::size_t tid = 0; tid < n_threads; ++tid) {
      const std::size_t b_lo = tid * per, b_hi = std::min(n_buckets, b_lo + per);
      if (b_lo >= b_hi) break;
      std::size_t lo = 0, hi = 0;
      for (std::size_t traj = 0; traj < cfg.n_traj; ++traj) {
        if (bucket_of(traj) == b_lo && (traj == 0 || bucket_of(traj - 1) < b_lo)) lo = traj;
        if (bucket_of(traj) < b_hi) hi = traj + 1;
      }
      futs.push_back(std::async(std::launch::async, process_range, lo, hi));
    }
    for (auto& f : futs) f.get();
  }
  for (std::size_t traj = 0; traj < cfg.n_traj; ++traj) ++bucket_counts[bucket_of(traj)];

  ObservableSeries series;
  series.times = samples;
  std::vector<std::vector<double>*> cols;
  for (const auto& probe : probes) {
    series.add_column("P_" + subset_label(probe));
    series.add_column("P_" + subset_label(probe) + "_sem");
    series.add_column("S_" + subset_label(probe));
    series.add_column("S_" + subset_label(probe) + "_sem");
  }
  for (std::size_t j = 1; j <= model.n_spins; ++j) {
    series.add_column("pop_" + std::to_string(j));
    series.add_column("pop_" + std::to_string(j) + "_sem");
  }

  const double n_total = static_cast<double>(cfg.n_traj);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::size_t col = 0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      DenseMatrix total = acc[p].sums[s][0];
      for (std::size_t b = 1; b < n_buckets; ++b) total += acc[p].sums[s][b];
      DenseMatrix mean = total / n_total;
      std::vector<double> pur_k, ent_k;
      if (n_buckets >= 2) {
        for (std::size_t b = 0; b < n_buckets; ++b) {
          DenseMatrix loo = (total - acc[p].sums[s][b]) /
                            (n_total - static_cast<double>(bucket_counts[b]));
          pur_k.push_back(purity(loo));
          ent_k.push_back(entropy(loo));
        }
      }
      series.columns[col++].push_back(purity(mean));
      series.columns[col++].push_back(n_buckets >= 2 ? detail::jackknife_sem(pur_k) : 0.0);
      series.columns[col++].push_back(entropy(mean));
      series.columns[col++].push_back(n_buckets >= 2 ? detail::jackknife_sem(ent_k) : 0.0);
    }
    for (std::size_t j = 0; j < model.n_spins; ++j) {
      double total = 0.0;
      for (std::size_t b = 0; b < n_buckets; ++b) total += pop_sums[s][j][b];
      std::vector<double> theta_k;
      if (n_buckets >= 2)
        for (std::size_t b = 0; b < n_buckets; ++b)
          theta_k.push_back((total - pop_sums[s][j][b]) /
                            (n_total - static_cast<double>(bucket_counts[b])));
      series.columns[col++].push_back(total / n_total);
      series.columns[col++].push_back(n_buckets >= 2 ? detail::jackknife_sem(theta_k) : 0.0);
    }
  }
  return series;
}

}  // namespace chiralspin
