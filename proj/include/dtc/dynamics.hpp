#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "dtc/dop853_coefficients.hpp"
#include "dtc/operators.hpp"
#include "dtc/pulses.hpp"

namespace dtc {

struct PropagationStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  double max_error_rate = 0.0;  // worst accepted local error per unit time
  double min_step = std::numeric_limits<double>::infinity();
  double norm_drift = 0.0;      // worst |  ||psi(T)|| - ||psi(0)||  |
  double wall_seconds = 0.0;
};

struct PropagationResult {
  Eigen::MatrixXcd finals;  // one column per initial state
  PropagationStats stats;
};

struct PropagateOptions {
  double tol = 1e-10;        // target local error per unit time (1/ns)
  double first_step = 1e-3;  // ns
  double max_step = 0.25;    // ns
  double min_step = 1e-9;    // ns; underflow below this is an error
  // NaN selects max(1e-8, 20 * tol * duration): the local error budget is
  // per unit time, so the admissible accumulated drift grows with T
  double norm_drift_tol = std::numeric_limits<double>::quiet_NaN();
  // Constant energy shift subtracted from H to slow the global phase; NaN
  // selects the mean initial energy automatically. The phase is restored at
  // the end, so results are shift-independent.
  double energy_shift = std::numeric_limits<double>::quiet_NaN();
  double fixed_step = 0.0;   // >0 disables adaptivity (order studies)
  // called after each accepted step with (t, states)
  std::function<void(double, const Eigen::MatrixXcd&)> observer;
};

// Solves i d/dt |psi> = H(Theta(t), dTheta/dt) |psi> over [0, T] for a batch
// of initial states, with an adaptive 8th-order Dormand-Prince integrator.
inline PropagationResult propagate(
    const HamiltonianModel& model,
    const std::function<PulseSample(double)>& pulse, double duration,
    const Eigen::MatrixXcd& initial_states, const PropagateOptions& opt = {}) {
  namespace dp = dop853;
  if (initial_states.rows() != model.dim)
    throw NumericalError("initial states do not match model dimension");
  if (!(opt.tol > 0.0)) throw NumericalError("propagation tol must be > 0");
  const auto t_start = std::chrono::steady_clock::now();

  const long n = model.dim;
  const int ncols = static_cast<int>(initial_states.cols());
  const Eigen::VectorXd init_norms = initial_states.colwise().norm();

  double shift = opt.energy_shift;
  if (std::isnan(shift)) {
    const PulseSample s0 = pulse(0.0);
    Eigen::MatrixXcd hy(n, ncols);
    model.apply(s0.theta, s0.theta_dot, initial_states, hy);
    double acc = 0.0;
    for (int c = 0; c < ncols; ++c)
      acc += std::real(initial_states.col(c).dot(hy.col(c))) /
             (init_norms(c) * init_norms(c));
    shift = acc / ncols;
  }

  PropagationStats stats;
  auto rhs = [&](double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dydt) {
    const PulseSample s = pulse(t);
    model.apply(s.theta, s.theta_dot, y, dydt);
    dydt.noalias() -= shift * y;
    dydt *= cd(0.0, -1.0);
    ++stats.rhs_evaluations;
  };

  std::array<Eigen::MatrixXcd, 13> k;
  for (auto& m : k) m.resize(n, ncols);
  Eigen::MatrixXcd y = initial_states;
  Eigen::MatrixXcd y_new(n, ncols), ytmp(n, ncols);
  Eigen::MatrixXcd err5(n, ncols), err3(n, ncols);

  double t = 0.0;
  double h = opt.fixed_step > 0.0 ? opt.fixed_step
                                  : std::min(opt.first_step, opt.max_step);
  rhs(0.0, y, k[0]);
  const double total_elems = static_cast<double>(n) * ncols;
  bool last_rejected = false;

  while (t < duration) {
    if (h < opt.min_step)
      throw NumericalError("propagation step size underflow at t = " +
                           std::to_string(t) + " ns (h = " + std::to_string(h) +
                           ")");
    if (t + h > duration) h = duration - t;

    for (int s = 1; s < dp::n_stages; ++s) {
      ytmp = y;
      for (int j = 0; j < s; ++j)
        if (dp::a[s][j] != 0.0) ytmp.noalias() += (h * dp::a[s][j]) * k[j];
      rhs(t + dp::c[s] * h, ytmp, k[s]);
    }
    y_new = y;
    for (int j = 0; j < dp::n_stages; ++j)
      if (dp::b[j] != 0.0) y_new.noalias() += (h * dp::b[j]) * k[j];
    rhs(t + h, y_new, k[12]);

    err5.setZero();
    err3.setZero();
    for (int j = 0; j < 13; ++j) {
      if (dp::e5[j] != 0.0) err5.noalias() += dp::e5[j] * k[j];
      if (dp::e3[j] != 0.0) err3.noalias() += dp::e3[j] * k[j];
    }
    const double n5 = err5.squaredNorm(), n3 = err3.squaredNorm();
    double err_step = 0.0;  // local error for this step
    if (n5 > 0.0 || n3 > 0.0)
      err_step = h * n5 / std::sqrt((n5 + 0.01 * n3) * total_elems);
    const double err_rate = err_step / h;

    if (opt.fixed_step > 0.0 || err_rate <= opt.tol) {
      t += h;
      stats.steps += 1;
      stats.min_step = std::min(stats.min_step, h);
      stats.max_error_rate = std::max(stats.max_error_rate, err_rate);
      y.swap(y_new);
      k[0].swap(k[12]);  // FSAL
      if (opt.observer) opt.observer(t, y);
      if (opt.fixed_step <= 0.0) {
        double factor = err_rate == 0.0
                            ? 10.0
                            : 0.9 * std::pow(err_rate / opt.tol, -1.0 / 8.0);
        factor = std::min(10.0, std::max(0.2, factor));
        if (last_rejected) factor = std::min(1.0, factor);
        h = std::min(h * factor, opt.max_step);
        last_rejected = false;
      }
    } else {
      stats.rejected += 1;
      const double factor =
          std::max(0.2, 0.9 * std::pow(err_rate / opt.tol, -1.0 / 8.0));
      h *= factor;
      last_rejected = true;
    }
  }

  // undo the constant shift: psi_true = e^{-i*shift*T} psi_shifted
  y *= std::exp(cd(0.0, -shift * duration));

  double drift_tol = opt.norm_drift_tol;
  if (std::isnan(drift_tol))
    drift_tol = std::max(1e-8, 20.0 * opt.tol * duration);
  for (int c = 0; c < ncols; ++c) {
    const double drift = std::abs(y.col(c).norm() - init_norms(c));
    stats.norm_drift = std::max(stats.norm_drift, drift);
    if (drift > drift_tol) {
      char msg[128];
      std::snprintf(msg, sizeof(msg),
                    "norm drift %.3e exceeds bound %.3e for state %d", drift,
                    drift_tol, c);
      throw NumericalError(msg);
    }
  }

  PropagationResult out;
  out.finals = std::move(y);
  out.stats = stats;
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

// Propagates the four computational idle eigenstates (columns ordered
// |00>, |01>, |10>, |11>).
inline PropagationResult propagate_computational_basis(
    const HamiltonianModel& model,
    const std::function<PulseSample(double)>& pulse, double duration,
    const Eigen::MatrixXcd& idle_basis, const PropagateOptions& opt = {}) {
  if (idle_basis.cols() != 4)
    throw NumericalError("idle basis must have exactly 4 columns");
  return propagate(model, pulse, duration, idle_basis, opt);
}

}  // namespace dtc
