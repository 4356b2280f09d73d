#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dtc/calibration.hpp"

using namespace dtc;
using Catch::Approx;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

constexpr double pi = constants::pi;

// Tiny truncated model: dim 81, cheap enough for end-to-end gate runs.
const HamiltonianModel& tiny_model() {
  static const HamiltonianModel m = [] {
    const DeviceParams p = DeviceParams::paper_defaults();
    const DerivedParams d = derive(p);
    return truncate_to_eigenbasis(p, d, 3);
  }();
  return m;
}

GateContext tiny_context(double theta = 0.6525 * pi) {
  SpectrumOptions sopt;
  sopt.keep_vectors = true;
  IdlePoint ip;
  ip.theta = theta;
  ip.spectrum = spectrum_at(tiny_model(), theta, sopt);
  ip.zz = ip.spectrum.zz;
  return make_gate_context(tiny_model(), ip);
}

}  // namespace

TEST_CASE("context extraction and validation") {
  const GateContext ctx = tiny_context();
  CHECK(ctx.idle_basis.cols() == 4);
  CHECK(ctx.idle_basis.rows() == tiny_model().dim);
  CHECK(ctx.idle_freqs[0] == 0.0);  // referenced to the ground state
  CHECK(ctx.idle_freqs[1] > 0.0);
  CHECK(ctx.delta0 > 0.0);
  for (int c = 0; c < 4; ++c)
    CHECK(ctx.idle_basis.col(c).norm() == Approx(1.0).epsilon(1e-12));

  IdlePoint empty;  // no eigenvectors attached
  CHECK_THROWS_AS(make_gate_context(tiny_model(), empty), NumericalError);
}

TEST_CASE("idle waveform realizes the identity gate") {
  // With the flux parked at theta0 the propagator is diagonal in the idle
  // basis and the frame rotation cancels the dynamical phases exactly.
  const GateContext ctx = tiny_context();
  const PulseSampler idle = [&ctx](double) {
    return PulseSample{ctx.theta0, 0.0};
  };
  PropagateOptions popt;
  popt.tol = 1e-10;
  const GateReport r =
      simulate_gate(ctx, GateKind::parametric, idle, 3.0, popt);
  CHECK(r.avg_fidelity == Approx(1.0).margin(1e-7));
  CHECK(r.angle == Approx(0.0).margin(1e-4));
  for (double l : r.leakage) CHECK(std::abs(l) < 1e-7);
  CHECK((r.u_prime - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() <
        1e-3);  // residual ZZ at a generic theta accumulates a small phase
}

TEST_CASE("parametric angle grows with gate time") {
  const GateContext ctx = tiny_context();
  const PulseFactory fac = ac_pulse_factory(ctx, 0.12 * pi, 0.5);
  PropagateOptions popt;
  popt.tol = 1e-8;
  const auto pts = angle_vs_time(ctx, GateKind::parametric, fac,
                                 {2.0, 4.0, 6.0}, popt);
  REQUIRE(pts.size() == 3);
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].duration == Approx(2.0 * (i + 1)));
    CHECK(pts[i].angle >= 0.0);
    CHECK(pts[i].avg_fidelity > 0.9);
  }
  CHECK(pts[2].angle > pts[0].angle);
}

TEST_CASE("cphase angles are branch-aligned along the grid") {
  const GateContext ctx = tiny_context();
  // excursion toward the strong-ZZ region; exact phases are irrelevant,
  // only the continuity of the unwrapped angle matters here
  const PulseFactory fac = dc_pulse_factory(ctx, 0.75 * pi, 0.3, {});
  PropagateOptions popt;
  popt.tol = 1e-8;
  const auto pts =
      angle_vs_time(ctx, GateKind::cphase, fac, {3.0, 5.0, 7.0, 9.0}, popt);
  REQUIRE(pts.size() == 4);
  for (size_t i = 1; i < pts.size(); ++i)
    CHECK(std::abs(pts[i].angle - pts[i - 1].angle) <= pi + 1e-9);
}

TEST_CASE("bracketed root finder") {
  SECTION("transcendental root") {
    const auto f = [](double x) { return std::cos(x); };
    const double r =
        find_root_bracketed(f, 1.0, 2.0, f(1.0), f(2.0), 1e-12);
    CHECK(r == Approx(pi / 2).epsilon(1e-10));
  }
  SECTION("exact endpoint roots returned unchanged") {
    const auto f = [](double x) { return x - 1.0; };
    CHECK(find_root_bracketed(f, 1.0, 2.0, 0.0, 1.0, 1e-12) == 1.0);
    CHECK(find_root_bracketed(f, 0.0, 1.0, -1.0, 0.0, 1e-12) == 1.0);
  }
  SECTION("linear function solved by the first secant step") {
    const auto f = [](double x) { return 3.0 * x - 0.6; };
    CHECK(find_root_bracketed(f, 0.0, 1.0, f(0.0), f(1.0), 1e-12) ==
          Approx(0.2).epsilon(1e-12));
  }
  SECTION("non-straddling bracket rejected") {
    const auto f = [](double x) { return x * x + 1.0; };
    CHECK_THROWS_AS(find_root_bracketed(f, -1.0, 1.0, f(-1.0), f(1.0), 1e-12),
                    CalibrationError);
  }
  SECTION("unreachable tolerance reported") {
    const auto f = [](double x) { return std::cos(x); };
    CHECK_THROWS_AS(
        find_root_bracketed(f, 1.0, 2.0, f(1.0), f(2.0), 1e-300),
        CalibrationError);
  }
}

TEST_CASE("pattern search") {
  SECTION("separable quadratic minimized to the step floor") {
    const auto f = [](const VectorXd& x) {
      return std::pow(x(0) - 0.3, 2) + 2.0 * std::pow(x(1) + 0.2, 2);
    };
    const PatternSearchResult r =
        pattern_search(f, Vector2d::Zero(), 0.1, 400, 1e-4);
    CHECK(std::abs(r.x(0) - 0.3) < 5e-4);
    CHECK(std::abs(r.x(1) + 0.2) < 5e-4);
    CHECK(r.value < 1e-6);
    CHECK_FALSE(r.budget_exhausted);
  }
  SECTION("zero budget yields no evaluation") {
    const auto f = [](const VectorXd&) { return 1.0; };
    const PatternSearchResult r =
        pattern_search(f, Vector2d::Zero(), 0.1, 0);
    CHECK(std::isnan(r.value));
    CHECK(r.evaluations == 0);
    CHECK(r.budget_exhausted);
  }
  SECTION("tight budget reported as exhausted") {
    const auto f = [](const VectorXd& x) { return x.squaredNorm(); };
    const PatternSearchResult r =
        pattern_search(f, Vector2d::Constant(1.0), 0.1, 3);
    CHECK(r.evaluations <= 3);
    CHECK(r.budget_exhausted);
  }
  SECTION("never returns a point worse than the start") {
    const auto f = [](const VectorXd& x) {
      return std::sin(5.0 * x(0)) + x.squaredNorm();
    };
    const VectorXd x0 = VectorXd::Constant(1, 0.4);
    const PatternSearchResult r = pattern_search(f, x0, 0.2, 60, 1e-3);
    CHECK(r.value <= f(x0));
  }
}

TEST_CASE("ramp tuning edge cases") {
  const GateContext ctx = tiny_context();
  SECTION("zero budget returns the initial coefficients with a warning") {
    const RampTuneResult r =
        tune_dc_ramp(ctx, 0.75 * pi, 10.0, 0.3, {0.01}, 0);
    CHECK(r.ramp_frac == Approx(0.3));
    REQUIRE(r.ramp_coeffs.size() == 2);  // padded to n_coeffs
    CHECK(r.ramp_coeffs[0] == Approx(0.01));
    CHECK(r.ramp_coeffs[1] == 0.0);
    CHECK(std::isnan(r.total_leakage));
    CHECK(r.budget_exhausted);
  }
  SECTION("small budget improves or matches the initial leakage") {
    PropagateOptions popt;
    popt.tol = 1e-8;
    RampTuneOptions topt;
    topt.tune_ramp_frac = false;
    topt.n_coeffs = 1;
    const PulseFactory fac0 = dc_pulse_factory(ctx, 0.75 * pi, 0.3, {});
    const GateReport r0 =
        simulate_gate(ctx, GateKind::cphase, fac0(8.0), 8.0, popt);
    double l0 = 0.0;
    for (double l : r0.leakage) l0 += l;
    const RampTuneResult r =
        tune_dc_ramp(ctx, 0.75 * pi, 8.0, 0.3, {}, 7, popt, topt);
    CHECK(r.total_leakage <= l0 + 1e-12);
  }
}

TEST_CASE("gate-time bracket validation") {
  const GateContext ctx = tiny_context();
  const PulseFactory fac = ac_pulse_factory(ctx, 0.1 * pi, 0.5);
  CHECK_THROWS_AS(
      solve_gate_time(ctx, GateKind::parametric, fac, pi / 4, 5.0, 2.0),
      CalibrationError);
  CHECK_THROWS_AS(
      solve_gate_time(ctx, GateKind::parametric, fac, pi / 4, -1.0, 2.0),
      CalibrationError);
}

TEST_CASE("pulse factories reproduce the analytic waveforms") {
  const GateContext ctx = tiny_context();
  SECTION("ac factory pins carrier and idle flux") {
    const PulseFactory fac = ac_pulse_factory(ctx, 0.1 * pi, 0.4);
    const PulseSampler p = fac(12.0);
    AcPulse ref{ctx.theta0, 0.1 * pi, 0.4, 12.0, ctx.delta0};
    for (double t : {0.0, 1.3, 6.0, 11.7, 12.0}) {
      CHECK(p(t).theta == Approx(ref.at(t).theta).margin(1e-15));
      CHECK(p(t).theta_dot == Approx(ref.at(t).theta_dot).margin(1e-15));
    }
  }
  SECTION("dc factory validates the ramp fraction") {
    const PulseFactory bad = dc_pulse_factory(ctx, 0.75 * pi, 0.7, {});
    CHECK_THROWS_AS(bad(10.0), ConfigError);
  }
}
