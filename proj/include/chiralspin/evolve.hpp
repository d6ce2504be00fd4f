// Master-equation time evolution: Liouvillian application, observable time
// series, steady-state determination and integrated photon counting.
#pragma once

#include "chiralspin/integrate.hpp"
#include "chiralspin/netmodel.hpp"
#include "chiralspin/qops.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace chiralspin {

struct EvolveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  double t_max = 1000.0;
  std::vector<double> sample_times;
  double steady_residual = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
};

struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // columns[k][i] at times[i]

  std::vector<double>& add_column(const std::string& name) {
    names.push_back(name);
    columns.emplace_back();
    return columns.back();
  }
  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return columns[k];
    throw std::invalid_argument("ObservableSeries: no column named " + name);
  }
  bool has_column(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
  }
};

inline std::string subset_label(const std::vector<std::size_t>& sites) {
  std::ostringstream os;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (i) os << '_';
    os << sites[i];
  }
  return os.str();
}

namespace detail {

// Sparse operators unpacked into coordinate lists so matrix products against
// a dense state reduce to contiguous axpys (Eigen's own complex sparse-dense
// product runs at roughly dense-gemm cost at these dimensions).
struct SpEntry {
  Eigen::Index row, col;
  cplx v;
};

inline std::vector<SpEntry> sparse_entries(const Operator& op) {
  std::vector<SpEntry> out;
  out.reserve(static_cast<std::size_t>(op.nonZeros()));
  for (int k = 0; k < op.outerSize(); ++k)
    for (SpMat::InnerIterator it(op, k); it; ++it) out.push_back({it.row(), it.col(), it.value()});
  // source-major order keeps the column/row being read hot in cache
  std::sort(out.begin(), out.end(),
            [](const SpEntry& a, const SpEntry& b) { return a.col < b.col; });
  return out;
}

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// y += a x over n complex values, written in real arithmetic with restrict
// qualifiers so the compiler vectorizes it.
inline void cplx_axpy(cplx a, const cplx* x_, cplx* y_, Eigen::Index n) {
  const double ar = a.real(), ai = a.imag();
  const double* __restrict x = reinterpret_cast<const double*>(x_);
  double* __restrict y = reinterpret_cast<double*>(y_);
  for (Eigen::Index i = 0; i < 2 * n; i += 2) {
    const double xr = x[i], xi = x[i + 1];
    y[i] += ar * xr - ai * xi;
    y[i + 1] += ar * xi + ai * xr;
  }
}

// C += alpha * A * B with row-major B, C: per nonzero A(r,k), a contiguous
// row axpy C.row(r) += alpha A(r,k) B.row(k).
inline void sp_left_accum(cplx alpha, const std::vector<SpEntry>& a, const RowMatrix& b,
                          RowMatrix& c) {
  const Eigen::Index n = b.cols();
  for (const auto& e : a) cplx_axpy(alpha * e.v, b.data() + e.col * n, c.data() + e.row * n, n);
}

// C += alpha * B * A with column-major B, C: per nonzero A(k,j), a contiguous
// column axpy C.col(j) += alpha A(k,j) B.col(k).
inline void sp_right_accum(cplx alpha, const std::vector<SpEntry>& a, const DenseMatrix& b,
                           DenseMatrix& c) {
  const Eigen::Index n = b.rows();
  for (const auto& e : a) cplx_axpy(alpha * e.v, b.data() + e.row * n, c.data() + e.col * n, n);
}

}  // namespace detail

// Precompiled right-hand side of the master equation,
//   d rho/dt = -i (H_eff rho - rho H_eff^dag) + sum_k rate_k c_k rho c_k^dag,
// with H_eff = H(t) - (i/2) sum_k rate_k c_k^dag c_k. All operator products
// are sparse x dense, never materializing the dim^2 x dim^2 superoperator.
class Liouvillian {
 public:
  explicit Liouvillian(const LindbladModel& model) : model_(&model) {
    Operator damping = zero_op(model.n_spins);
    for (const auto& j : model.jumps)
      damping += cplx(j.rate) * Operator(j.op.adjoint() * j.op);
    heff_static_ = (model.hamiltonian - cplx(0, 0.5) * damping).eval();
    heff_entries_ = detail::sparse_entries(heff_static_);
    heff_dag_entries_ = detail::sparse_entries(Operator(heff_static_.adjoint()));
    if (model.schedule) drive_entries_ = detail::sparse_entries(model.drive_coupling);
    for (const auto& j : model.jumps) {
      jump_entries_.push_back(detail::sparse_entries(j.op));
      jump_dag_entries_.push_back(detail::sparse_entries(Operator(j.op.adjoint())));
    }
  }

  const LindbladModel& model() const { return *model_; }

  DenseMatrix apply(double t, const DenseMatrix& rho) const {
    if (rho.rows() != static_cast<Eigen::Index>(model_->dim()))
      throw std::invalid_argument("Liouvillian: dimension mismatch");
    // Written as the honest linear map -i (H_eff rho - rho H_eff^dag) rather
    // than a + a^dag with a = -i H_eff rho: the two agree on Hermitian rho,
    // but the latter maps the integrator's anti-Hermitian roundoff through a
    // non-contractive anticommutator and lets it grow exponentially.
    const Eigen::Index d = rho.rows();
    detail::RowMatrix rho_rm = rho;
    detail::RowMatrix left = detail::RowMatrix::Zero(d, d);
    detail::sp_left_accum(cplx(0, -1), heff_entries_, rho_rm, left);
    DenseMatrix out = DenseMatrix::Zero(d, d);
    detail::sp_right_accum(cplx(0, 1), heff_dag_entries_, rho, out);
    if (model_->schedule) {
      const cplx is(0, model_->drive_scale(t));
      detail::sp_left_accum(-is, drive_entries_, rho_rm, left);
      detail::sp_right_accum(is, drive_entries_, rho, out);
    }
    for (std::size_t k = 0; k < jump_entries_.size(); ++k) {
      detail::RowMatrix tmp_rm = detail::RowMatrix::Zero(d, d);
      detail::sp_left_accum(cplx(model_->jumps[k].rate), jump_entries_[k], rho_rm, tmp_rm);
      DenseMatrix tmp = tmp_rm;
      detail::sp_right_accum(cplx(1), jump_dag_entries_[k], tmp, out);
    }
    out += left;
    return out;
  }

  // sum over waveguide channels of rate * Tr(c^dag c rho) = rate * Tr(c rho c^dag)
  double photon_flux(const DenseMatrix& rho) const {
    double flux = 0.0;
    for (const auto& j : model_->jumps) {
      if (!j.waveguide) continue;
      DenseMatrix tmp = j.op * rho;
      cplx tr = 0.0;
      for (int col = 0; col < j.op.outerSize(); ++col)
        for (SpMat::InnerIterator it(j.op, col); it; ++it)
          tr += tmp(it.row(), it.col()) * std::conj(it.value());
      flux += j.rate * tr.real();
    }
    return flux;
  }

  const Operator& effective_hamiltonian_static() const { return heff_static_; }

 private:
  const LindbladModel* model_;
  Operator heff_static_;
  std::vector<detail::SpEntry> heff_entries_;
  std::vector<detail::SpEntry> heff_dag_entries_;
  std::vector<detail::SpEntry> drive_entries_;
  std::vector<std::vector<detail::SpEntry>> jump_entries_;
  std::vector<std::vector<detail::SpEntry>> jump_dag_entries_;
};

inline DenseMatrix liouvillian_apply(const LindbladModel& model, const DensityMatrix& rho,
                                     double t = 0.0) {
  return Liouvillian(model).apply(t, rho);
}

namespace detail {

inline void record_samples(const Liouvillian& liou, const DensityMatrix& rho, double t,
                           const std::vector<std::vector<std::size_t>>& probes,
                           ObservableSeries& series) {
  const std::size_t n = liou.model().n_spins;
  auto eigs = density_eigenvalues(rho);
  if (eigs.front() < -1e-6) {
    std::ostringstream os;
    os << "evolve_density: positivity violation " << eigs.front() << " at t = " << t
       << "; tighten integrator tolerances";
    throw std::runtime_error(os.str());
  }
  series.times.push_back(t);
  std::size_t k = 0;
  series.columns[k++].push_back(purity(rho));
  for (const auto& probe : probes) {
    DensityMatrix red = partial_trace(rho, probe);
    series.columns[k++].push_back(purity(red));
    series.columns[k++].push_back(entropy(red));
  }
  const Eigen::Matrix2cd num = sigma_raise() * sigma_lower();
  for (std::size_t j = 1; j <= n; ++j) {
    DensityMatrix r1 = partial_trace(rho, {j});
    series.columns[k++].push_back((num * r1).trace().real());
  }
  series.columns[k++].push_back(liou.photon_flux(rho));
}

inline ObservableSeries make_series_layout(std::size_t n,
                                           const std::vector<std::vector<std::size_t>>& probes) {
  ObservableSeries series;
  series.add_column("purity");
  for (const auto& probe : probes) {
    series.add_column("P_" + subset_label(probe));
    series.add_column("S_" + subset_label(probe));
  }
  for (std::size_t j = 1; j <= n; ++j) series.add_column("pop_" + std::to_string(j));
  series.add_column("photon_flux");
  return series;
}

}  // namespace detail

inline ObservableSeries evolve_density(const LindbladModel& model, const DensityMatrix& rho0,
                                       const EvolveOptions& opts,
                                       const std::vector<std::vector<std::size_t>>& probes = {}) {
  check_density_matrix(rho0);
  Liouvillian liou(model);
  auto rhs = [&](double t, const DenseMatrix& rho) { return liou.apply(t, rho); };

  std::vector<double> samples = opts.sample_times;
  if (samples.empty()) {
    const int n_samples = 101;
    for (int i = 0; i < n_samples; ++i) samples.push_back(opts.t_max * i / (n_samples - 1));
  }
  if (!std::is_sorted(samples.begin(), samples.end()))
    throw std::invalid_argument("evolve_density: sample_times must be sorted");

  ObservableSeries series = detail::make_series_layout(model.n_spins, probes);
  StepControl ctl{opts.rel_tol, opts.abs_tol, opts.max_step, 1e-3};

  DensityMatrix rho = rho0;
  double t = 0.0, h = 0.0;
  for (double ts : samples) {
    if (ts > t) h = rk45_integrate(rhs, rho, t, ts, ctl, h);
    t = ts;
    detail::record_samples(liou, rho, t, probes, series);
  }
  return series;
}

struct SteadyResult {
  DensityMatrix rho;
  double residual = 0.0;
  bool converged = false;
  double t_reached = 0.0;
};

// Long-time integration from |g...g><g...g| with a Frobenius residual check.
// Degenerate models (e.g. the bidirectional Dicke case) are reported with
// converged = false instead of failing.
inline SteadyResult steady_state(const LindbladModel& model, const EvolveOptions& opts) {
  Liouvillian liou(model);
  auto rhs = [&](double t, const DenseMatrix& rho) { return liou.apply(t, rho); };

  SteadyResult res;
  const auto dim = static_cast<Eigen::Index>(model.dim());
  res.rho = DenseMatrix::Zero(dim, dim);
  res.rho(0, 0) = 1.0;

  StepControl ctl{opts.rel_tol, opts.abs_tol, opts.max_step, 1e-3};
  const double chunk = std::max(1.0, opts.t_max / 400.0);
  double t = 0.0, h = 0.0;
  while (t < opts.t_max) {
    const double t_next = std::min(t + chunk, opts.t_max);
    h = rk45_integrate(rhs, res.rho, t, t_next, ctl, h);
    t = t_next;
    res.residual = liou.apply(t, res.rho).norm();
    if (res.residual < opts.steady_residual && (!model.schedule || t >= model.schedule->t_max)) {
      res.converged = true;
      break;
    }
  }
  res.t_reached = t;
  // keep the state numerically Hermitian for downstream consumers
  res.rho = 0.5 * (res.rho + res.rho.adjoint().eval());
  res.rho /= res.rho.trace().real();
  return res;
}

// Direct null-space solve of the asymptotic generator. Assembles the sparse
// d^2 x d^2 superoperator in row-major vectorization (vec index I = i*d + j),
// factorizes L - sigma*Id with a tiny shift, and runs inverse iteration from
// the maximally mixed state. Intended for near-degenerate models whose
// relaxation gap makes time integration impractical; for time-dependent
// schedules the drive is taken at its asymptotic (fully ramped) value.
inline SteadyResult steady_state_direct(const LindbladModel& model) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  Operator heff = Liouvillian(model).effective_hamiltonian_static();
  if (model.schedule) heff += model.drive_coupling;

  std::vector<Eigen::Triplet<cplx>> trips;
  // -i H_eff rho: for each H_eff(i,k), couples (i,j) <- (k,j) for all j
  // +i rho H_eff^dag: for each H_eff(j,k), couples (i,j) <- (i,k) for all i
  for (int outer = 0; outer < heff.outerSize(); ++outer)
    for (SpMat::InnerIterator it(heff, outer); it; ++it) {
      for (Eigen::Index j = 0; j < d; ++j)
        trips.emplace_back(it.row() * d + j, it.col() * d + j, cplx(0, -1) * it.value());
      for (Eigen::Index i = 0; i < d; ++i)
        trips.emplace_back(i * d + it.row(), i * d + it.col(), cplx(0, 1) * std::conj(it.value()));
    }
  // rate c rho c^dag: each pair of nonzeros c(i,k), c(j,l) couples (i,j) <- (k,l)
  for (const auto& jump : model.jumps) {
    const auto entries = detail::sparse_entries(jump.op);
    for (const auto& a : entries)
      for (const auto& b : entries)
        trips.emplace_back(a.row * d + b.row, a.col * d + b.col,
                           cplx(jump.rate) * a.v * std::conj(b.v));
  }
  const double sigma = 1e-9;  // keep the factorization nonsingular at the null space
  for (Eigen::Index i = 0; i < d * d; ++i) trips.emplace_back(i, i, cplx(-sigma));
  SpMat lshift(d * d, d * d);
  lshift.setFromTriplets(trips.begin(), trips.end());

  Eigen::SparseLU<SpMat> lu;
  lu.compute(lshift);
  SteadyResult res;
  if (lu.info() != Eigen::Success) return res;  // converged = false

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v(i * d + i) = 1.0 / static_cast<double>(d);
  for (int iter = 0; iter < 4; ++iter) {
    v = lu.solve(v);
    v /= v.norm();
  }
  res.rho = Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), d, d);
  res.rho = 0.5 * (res.rho + res.rho.adjoint().eval());
  res.rho /= res.rho.trace().real();
  LindbladModel asym = model;  // residual against the asymptotic generator
  if (asym.schedule) {
    asym.hamiltonian = (asym.hamiltonian + asym.drive_coupling).eval();
    asym.schedule.reset();
  }
  res.residual = liouvillian_apply(asym, res.rho).norm();
  res.converged = res.residual < 1e-8;
  return res;
}

inline double photon_count(const ObservableSeries& series) {
  if (!series.has_column("photon_flux"))
    throw std::invalid_argument("photon_count: series has no photon_flux column");
  const auto& flux = series.column("photon_flux");
  double total = 0.0;
  for (std::size_t i = 1; i < series.times.size(); ++i)
    total += 0.5 * (flux[i] + flux[i - 1]) * (series.times[i] - series.times[i - 1]);
  return total;
}

}  // namespace chiralspin
