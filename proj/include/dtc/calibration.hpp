#pragma once

#include <functional>
#include <iostream>
#include <vector>

#include "dtc/dynamics.hpp"
#include "dtc/gate_metrics.hpp"
#include "dtc/parallel.hpp"
#include "dtc/pulses.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

// Everything a gate simulation needs about the idling point.
struct GateContext {
  const HamiltonianModel* model = nullptr;
  double theta0 = 0.0;              // radians
  double delta0 = 0.0;              // Delta(Theta_0), rad/ns
  Eigen::MatrixXcd idle_basis;      // dim x 4, columns |00>, |01>, |10>, |11>
  std::array<double, 4> idle_freqs{};  // rad/ns, same order (omega_00 = 0)
};

inline GateContext make_gate_context(const HamiltonianModel& model,
                                     const IdlePoint& idle) {
  if (idle.spectrum.vectors.size() == 0)
    throw NumericalError("idle point carries no eigenvectors");
  GateContext ctx;
  ctx.model = &model;
  ctx.theta0 = idle.theta;
  ctx.delta0 = idle.spectrum.delta;
  ctx.idle_basis.resize(model.dim, 4);
  for (int c = 0; c < 4; ++c) {
    const int e = idle.spectrum.comp_index[c];
    ctx.idle_basis.col(c) = idle.spectrum.vectors.col(e);
    ctx.idle_freqs[c] = idle.spectrum.omegas(e);
  }
  return ctx;
}

using PulseSampler = std::function<PulseSample(double)>;
// factory: gate time T -> flux waveform
using PulseFactory = std::function<PulseSampler(double)>;

inline PulseFactory ac_pulse_factory(const GateContext& ctx, double alpha,
                                     double beta) {
  const double theta0 = ctx.theta0, carrier = ctx.delta0;
  return [theta0, carrier, alpha, beta](double duration) -> PulseSampler {
    AcPulse p{theta0, alpha, beta, duration, carrier};
    return [p](double t) { return p.at(t); };
  };
}

inline PulseFactory dc_pulse_factory(const GateContext& ctx, double theta_peak,
                                     double ramp_frac,
                                     std::vector<double> ramp_coeffs) {
  const double theta0 = ctx.theta0;
  return [theta0, theta_peak, ramp_frac,
          ramp_coeffs](double duration) -> PulseSampler {
    DcPulse p{theta0, theta_peak, duration, ramp_frac, ramp_coeffs};
    p.validate();
    return [p](double t) { return p.at(t); };
  };
}

// Full gate simulation: propagate the computational basis, extract U',
// fit the ideal gate, score.
inline GateReport simulate_gate(const GateContext& ctx, GateKind kind,
                                const PulseSampler& pulse, double duration,
                                const PropagateOptions& popt = {}) {
  const PropagationResult pr = propagate_computational_basis(
      *ctx.model, pulse, duration, ctx.idle_basis, popt);
  const Eigen::Matrix4cd u =
      extract_u_prime(pr.finals, ctx.idle_basis, ctx.idle_freqs, duration);
  return make_gate_report(u, kind);
}

struct CalibrationPoint {
  double duration = 0.0;     // ns
  double angle = 0.0;        // radians, unwrapped for cphase
  double avg_fidelity = 0.0;
  double total_leakage = 0.0;
};

// Gate angle (theta_para or phi_CPHASE) as a function of gate time. Points
// run concurrently; cphase angles are unwrapped along the grid by
// nearest-branch continuation (the fitted phase is only defined mod 2pi).
inline std::vector<CalibrationPoint> angle_vs_time(
    const GateContext& ctx, GateKind kind, const PulseFactory& factory,
    const std::vector<double>& t_grid, const PropagateOptions& popt = {},
    int threads = 1) {
  std::vector<CalibrationPoint> out(t_grid.size());
  parallel_for(static_cast<long>(t_grid.size()), threads, [&](long i) {
    const double T = t_grid[i];
    try {
      const GateReport r = simulate_gate(ctx, kind, factory(T), T, popt);
      double lsum = 0.0;
      for (double l : r.leakage) lsum += l;
      out[i] = {T, r.angle, r.avg_fidelity, lsum};
    } catch (const std::exception& e) {
      throw NumericalError("gate simulation failed at T = " +
                           std::to_string(T) + " ns: " + e.what());
    }
  });
  if (kind == GateKind::cphase) {
    for (size_t i = 1; i < out.size(); ++i) {
      const double two_pi = 2.0 * constants::pi;
      out[i].angle +=
          two_pi * std::round((out[i - 1].angle - out[i].angle) / two_pi);
    }
  }
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].angle < out[i - 1].angle)
      std::cerr << "warning: gate angle not monotone between T = "
                << out[i - 1].duration << " and " << out[i].duration
                << " ns\n";
  return out;
}

// Bracketed scalar root finder (secant with bisection safeguard). Used for
// angle(T) = target; also exposed for unit testing.
inline double find_root_bracketed(const std::function<double(double)>& f,
                                  double a, double b, double fa, double fb,
                                  double ftol, int max_iter = 60) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0)
    throw CalibrationError("bracket does not straddle the target: f(" +
                           std::to_string(a) + ") = " + std::to_string(fa) +
                           ", f(" + std::to_string(b) + ") = " +
                           std::to_string(fb));
  for (int it = 0; it < max_iter; ++it) {
    double x = b - fb * (b - a) / (fb - fa);  // secant through the bracket
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (!(x > lo && x < hi)) x = 0.5 * (a + b);
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if (fa * fx <= 0.0) {
      b = x;
      fb = fx;
    } else {
      a = x;
      fa = fx;
    }
  }
  throw CalibrationError("root finding did not reach tolerance " +
                         std::to_string(ftol));
}

struct GateTimeSolution {
  double duration = 0.0;  // T*, ns
  GateReport report;      // re-simulated at T*
};

// Locate the gate time where the fitted angle hits `target` (radians).
// For cphase the angle is branch-aligned to the bracket's left endpoint.
inline GateTimeSolution solve_gate_time(const GateContext& ctx, GateKind kind,
                                        const PulseFactory& factory,
                                        double target, double t_lo, double t_hi,
                                        const PropagateOptions& popt = {},
                                        double angle_tol = 1e-4) {
  if (!(t_hi > t_lo && t_lo > 0.0))
    throw CalibrationError("invalid gate-time bracket [" + std::to_string(t_lo) +
                           ", " + std::to_string(t_hi) + "]");
  GateReport last;
  double prev_angle = 0.0;
  bool have_prev = false;
  auto angle_at = [&](double T) {
    last = simulate_gate(ctx, kind, factory(T), T, popt);
    double a = last.angle;
    if (kind == GateKind::cphase && have_prev) {
      const double two_pi = 2.0 * constants::pi;
      a += two_pi * std::round((prev_angle - a) / two_pi);
    }
    prev_angle = a;
    have_prev = true;
    return a;
  };
  const double fa = angle_at(t_lo) - target;
  const double fb = angle_at(t_hi) - target;
  double t_star = find_root_bracketed(
      [&](double T) { return angle_at(T) - target; }, t_lo, t_hi, fa, fb,
      angle_tol);
  if (std::abs(prev_angle - target) > angle_tol)
    last = simulate_gate(ctx, kind, factory(t_star), t_star, popt);
  return {t_star, last};
}

// Derivative-free pattern (compass) search. Each iteration polls +/- step
// along every coordinate, evaluating candidates concurrently; the step is
// halved when no candidate improves. Stops on budget or step underflow.
struct PatternSearchResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
};

inline PatternSearchResult pattern_search(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, double init_step, int budget,
    double min_step = 1e-3, int threads = 1) {
  PatternSearchResult r;
  r.x = x0;
  if (budget <= 0) {
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.budget_exhausted = true;
    return r;
  }
  r.value = f(r.x);
  r.evaluations = 1;
  double step = init_step;
  const int n = static_cast<int>(x0.size());
  while (step >= min_step) {
    const int ncand = 2 * n;
    if (r.evaluations >= budget) {
      r.budget_exhausted = true;
      break;
    }
    const int avail = std::min(ncand, budget - r.evaluations);
    std::vector<Eigen::VectorXd> cand;
    for (int i = 0; i < n && static_cast<int>(cand.size()) < avail; ++i)
      for (double s : {+1.0, -1.0}) {
        if (static_cast<int>(cand.size()) >= avail) break;
        Eigen::VectorXd x = r.x;
        x(i) += s * step;
        cand.push_back(x);
      }
    std::vector<double> fv(cand.size());
    parallel_for(static_cast<long>(cand.size()), threads,
                 [&](long i) { fv[i] = f(cand[i]); });
    r.evaluations += static_cast<int>(cand.size());
    int best = -1;
    for (size_t i = 0; i < cand.size(); ++i)
      if (fv[i] < r.value) {
        r.value = fv[i];
        best = static_cast<int>(i);
      }
    if (best >= 0)
      r.x = cand[best];
    else
      step *= 0.5;
  }
  if (r.evaluations >= budget) r.budget_exhausted = true;
  return r;
}

struct RampTuneResult {
  double ramp_frac = 0.0;
  std::vector<double> ramp_coeffs;
  double total_leakage = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
};

struct RampTuneOptions {
  int n_coeffs = 2;
  bool tune_ramp_frac = true;
  double init_step = 0.04;
  double min_step = 2e-3;
  double max_coeff_sum = 0.2;  // cap on sum |c_k| (bounds pulse overshoot)
  int threads = 1;
};

// Tune the dc ramp (shape coefficients, optionally the ramp fraction) to
// minimize total leakage at fixed gate time.
inline RampTuneResult tune_dc_ramp(const GateContext& ctx, double theta_peak,
                                   double duration, double ramp_frac0,
                                   const std::vector<double>& coeffs0,
                                   int budget, const PropagateOptions& popt = {},
                                   const RampTuneOptions& topt = {}) {
  const int nc = topt.n_coeffs;
  const int dim = nc + (topt.tune_ramp_frac ? 1 : 0);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < nc && i < static_cast<int>(coeffs0.size()); ++i)
    x0(i) = coeffs0[i];
  if (topt.tune_ramp_frac) x0(nc) = ramp_frac0;

  auto unpack = [&](const Eigen::VectorXd& x) {
    std::vector<double> c(nc);
    for (int i = 0; i < nc; ++i) c[i] = x(i);
    const double rf = topt.tune_ramp_frac ? x(nc) : ramp_frac0;
    return std::make_pair(c, rf);
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    const auto [c, rf] = unpack(x);
    if (rf <= 0.02 || rf > 0.5) return 1e9;  // infeasible ramp fraction
    double csum = 0.0;
    for (double v : c) csum += std::abs(v);
    if (csum > topt.max_coeff_sum) return 1e9;  // overshoot cap
    const PulseFactory fac = dc_pulse_factory(ctx, theta_peak, rf, c);
    const GateReport r =
        simulate_gate(ctx, GateKind::cphase, fac(duration), duration, popt);
    double lsum = 0.0;
    for (double l : r.leakage) lsum += l;
    return lsum;
  };

  RampTuneResult out;
  if (budget <= 0) {
    out.ramp_frac = ramp_frac0;
    out.ramp_coeffs = coeffs0;
    out.ramp_coeffs.resize(nc, 0.0);
    out.total_leakage = std::numeric_limits<double>::quiet_NaN();
    out.budget_exhausted = true;
    std::cerr << "warning: tune_dc_ramp called with zero budget; returning "
                 "initial coefficients\n";
    return out;
  }
  const PatternSearchResult ps = pattern_search(
      objective, x0, topt.init_step, budget, topt.min_step, topt.threads);
  const auto [c, rf] = unpack(ps.x);
  out.ramp_frac = rf;
  out.ramp_coeffs = c;
  out.total_leakage = ps.value;
  out.evaluations = ps.evaluations;
  out.budget_exhausted = ps.budget_exhausted;
  if (out.budget_exhausted)
    std::cerr << "warning: tune_dc_ramp budget exhausted; returning "
                 "best-so-far coefficients\n";
  return out;
}

}  // namespace dtc
