// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) over Eigen states.
// Works for both density matrices (MatrixXcd) and state vectors (VectorXcd).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace chiralspin {

struct StepControl {
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 1e-3;
};

// One fixed Dormand-Prince step of size h from (t, y); returns the 5th order
// solution and the embedded error estimate (scaled against ctl tolerances).
template <typename State, typename Rhs>
State rk45_fixed_step(const Rhs& rhs, const State& y, double t, double h,
                      const StepControl& ctl, double* scaled_err = nullptr) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                          e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

  State k1 = rhs(t, y);
  State k2 = rhs(t + c2 * h, (y + h * a21 * k1).eval());
  State k3 = rhs(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
  State k4 = rhs(t + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
  State k5 = rhs(t + c5 * h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
  State k6 = rhs(t + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
  State ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  if (scaled_err) {
    State k7 = rhs(t + h, ynew);
    State y4th = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double sc = ctl.abs_tol +
                      ctl.rel_tol * std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
    *scaled_err = (ynew - y4th).cwiseAbs().maxCoeff() / sc;
  }
  return ynew;
}

// Integrates dy/dt = rhs(t, y) from t0 to t1, leaving the solution in y.
// Returns the last accepted step size (a reasonable guess for continuing).
template <typename State, typename Rhs>
double rk45_integrate(const Rhs& rhs, State& y, double t0, double t1,
                      const StepControl& ctl, double h_start = 0.0) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // embedded 4th order weights
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                          e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

  if (t1 <= t0) return h_start;
  double t = t0;
  double h = h_start > 0 ? h_start : ctl.initial_step;
  h = std::min({h, ctl.max_step, t1 - t0});

  State k1 = rhs(t, y);
  bool have_k1 = true;

  int rejects_in_a_row = 0;
  while (t < t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
    h = std::min({h, ctl.max_step, t1 - t});
    if (!have_k1) {
      k1 = rhs(t, y);
      have_k1 = true;
    }
    State y2 = y + h * a21 * k1;
    State k2 = rhs(t + c2 * h, y2);
    State y3 = y + h * (a31 * k1 + a32 * k2);
    State k3 = rhs(t + c3 * h, y3);
    State y4 = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    State k4 = rhs(t + c4 * h, y4);
    State y5 = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    State k5 = rhs(t + c5 * h, y5);
    State y6 = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    State k6 = rhs(t + h, y6);
    State ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    State k7 = rhs(t + h, ynew);  // FSAL
    State y4th = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double sc = ctl.abs_tol +
                      ctl.rel_tol * std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
    const double err = (ynew - y4th).cwiseAbs().maxCoeff() / sc;

    if (err <= 1.0 || h <= 1e-13) {
      t += h;
      y = std::move(ynew);
      k1 = std::move(k7);
      rejects_in_a_row = 0;
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++rejects_in_a_row;
      if (rejects_in_a_row > 50) throw std::runtime_error("rk45: step size underflow");
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
  return h;
}

}  // namespace chiralspin
