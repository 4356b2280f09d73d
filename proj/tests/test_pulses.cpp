#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dtc/pulses.hpp"

using namespace dtc;
using Catch::Approx;

namespace {

constexpr double pi = constants::pi;

AcPulse paper_ac() {
  AcPulse p;
  p.theta0 = 0.6525 * pi;
  p.alpha = 0.1575 * pi;
  p.beta = 0.3;
  p.duration = 24.0;
  p.carrier = 2.0 * pi * 0.682;
  return p;
}

DcPulse sample_dc() {
  DcPulse p;
  p.theta0 = 0.6525 * pi;
  p.theta_peak = 0.78 * pi;
  p.duration = 18.0;
  p.ramp_frac = 0.3;
  p.ramp_coeffs = {0.05, -0.02};
  return p;
}

// Central finite difference of theta(t); oracle for the analytic theta_dot.
template <typename P>
double fd_theta_dot(const P& p, double t, double h = 1e-6) {
  return (p.at(t + h).theta - p.at(t - h).theta) / (2.0 * h);
}

}  // namespace

TEST_CASE("ac pulse shape") {
  const AcPulse p = paper_ac();

  SECTION("starts and ends at the idling flux, off outside") {
    CHECK(p.at(0.0).theta == Approx(p.theta0));
    CHECK(p.at(p.duration).theta == Approx(p.theta0));
    CHECK(p.at(-1.0).theta == p.theta0);
    CHECK(p.at(-1.0).theta_dot == 0.0);
    CHECK(p.at(p.duration + 1.0).theta == p.theta0);
    CHECK(p.at(p.duration + 1.0).theta_dot == 0.0);
  }

  SECTION("envelope is symmetric about T/2 with known maximum") {
    for (double t : {1.0, 3.7, 9.2}) {
      CHECK(p.envelope(t) == Approx(p.envelope(p.duration - t)).epsilon(1e-14));
    }
    const double mid = p.envelope(p.duration / 2.0);
    const double expected =
        p.alpha * std::pow(std::tanh(p.beta * p.duration / 2.0), 2);
    CHECK(mid == Approx(expected).epsilon(1e-14));
    CHECK(mid < p.alpha);
    CHECK(mid > 0.99 * p.alpha);  // beta T/2 = 3.6, deep saturation
  }

  SECTION("flux excursion bounded by theta0 +/- alpha") {
    for (int i = 0; i <= 2000; ++i) {
      const double t = p.duration * i / 2000.0;
      const double th = p.at(t).theta;
      CHECK(th <= p.theta0 + p.alpha + 1e-12);
      CHECK(th >= p.theta0 - p.alpha - 1e-12);
    }
  }

  SECTION("analytic derivative matches finite differences to 1e-6") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ts(0.1, p.duration - 0.1);
    const double scale = p.alpha * p.carrier;  // typical theta_dot magnitude
    for (int i = 0; i < 100; ++i) {
      const double t = ts(rng);
      CHECK(p.at(t).theta_dot ==
            Approx(fd_theta_dot(p, t)).margin(1e-6 * scale));
    }
  }

  SECTION("initial slope is alpha beta tanh(beta T)") {
    const double h = 1e-7;
    const double slope = (p.at(h).theta - p.at(0.0).theta) / h;
    CHECK(slope ==
          Approx(p.alpha * p.beta * std::tanh(p.beta * p.duration)).epsilon(1e-5));
  }
}

TEST_CASE("dc pulse shape") {
  const DcPulse p = sample_dc();
  const double tau = p.ramp_frac * p.duration;

  SECTION("flat top between the ramps") {
    for (double t : {tau, 0.5 * p.duration, p.duration - tau}) {
      CHECK(p.at(t).theta == Approx(p.theta_peak).epsilon(1e-12));
    }
    CHECK(p.at(0.5 * p.duration).theta_dot == 0.0);
  }

  SECTION("endpoints pinned with zero slope") {
    CHECK(p.at(0.0).theta == Approx(p.theta0));
    CHECK(p.at(p.duration).theta == Approx(p.theta0));
    CHECK(p.at(0.0).theta_dot == Approx(0.0).margin(1e-12));
    CHECK(p.at(p.duration).theta_dot == Approx(0.0).margin(1e-12));
    CHECK(p.shape(0.0) == Approx(0.0).margin(1e-15));
    CHECK(p.shape(1.0) == Approx(1.0).epsilon(1e-15));
  }

  SECTION("time-reversal symmetric") {
    for (double t : {0.7, 1.9, 3.3, 5.0}) {
      CHECK(p.at(t).theta == Approx(p.at(p.duration - t).theta).epsilon(1e-12));
      CHECK(p.at(t).theta_dot ==
            Approx(-p.at(p.duration - t).theta_dot).margin(1e-12));
    }
  }

  SECTION("analytic derivative matches finite differences to 1e-6") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ts(0.05, p.duration - 0.05);
    const double scale = (p.theta_peak - p.theta0) / tau;
    for (int i = 0; i < 100; ++i) {
      const double t = ts(rng);
      CHECK(p.at(t).theta_dot ==
            Approx(fd_theta_dot(p, t)).margin(1e-6 * scale));
    }
  }

  SECTION("excursion bounded by the overshoot bound") {
    double max_th = p.theta0, min_th = p.theta0;
    for (int i = 0; i <= 4000; ++i) {
      const double th = p.at(p.duration * i / 4000.0).theta;
      max_th = std::max(max_th, th);
      min_th = std::min(min_th, th);
    }
    CHECK(max_th <= p.theta_peak + p.overshoot_bound() + 1e-12);
    CHECK(min_th >= p.theta0 - p.overshoot_bound() - 1e-12);
    CHECK(p.overshoot_bound() ==
          Approx(0.07 * (p.theta_peak - p.theta0)).epsilon(1e-12));
  }

  SECTION("plain half-cosine ramp is monotone (no overshoot)") {
    DcPulse q = p;
    q.ramp_coeffs.clear();
    CHECK(q.overshoot_bound() == 0.0);
    double prev = q.at(0.0).theta;
    for (int i = 1; i <= 400; ++i) {
      const double th = q.at(tau * i / 400.0).theta;
      CHECK(th >= prev - 1e-12);
      prev = th;
    }
  }

  SECTION("validation") {
    DcPulse q = p;
    q.duration = 0.0;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q = p;
    q.ramp_frac = 0.6;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q.ramp_frac = 0.0;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q = p;
    CHECK_NOTHROW(q.validate());
  }
}

TEST_CASE("zz-peak search on the device model") {
  const DeviceParams p = DeviceParams::paper_defaults();
  const DerivedParams d = derive(p);
  const HamiltonianModel model = truncate_to_eigenbasis(p, d, 6);

  SECTION("interior |zz| maximum located for r_J = 0.3") {
    const ZzPeak pk =
        peak_from_zz_max(model, 0.70 * constants::pi, 0.95 * constants::pi);
    CHECK(pk.theta > 0.70 * constants::pi);
    CHECK(pk.theta < 0.95 * constants::pi);
    // the dip is tens of MHz deep; far larger than the idle residual
    CHECK(std::abs(pk.zz) * constants::rad_ns_to_mhz > 5.0);
  }

  SECTION("monotonic sweep rejected for r_J = 0.25") {
    DeviceParams p25 = p;
    p25.r_j = 0.25;
    const DerivedParams d25 = derive(p25);
    const HamiltonianModel m25 = truncate_to_eigenbasis(p25, d25, 6);
    CHECK_THROWS_AS(
        peak_from_zz_max(m25, 0.70 * constants::pi, 0.90 * constants::pi),
        CalibrationError);
  }

  SECTION("empty bracket rejected") {
    CHECK_THROWS_AS(peak_from_zz_max(model, 0.8, 0.7), CalibrationError);
  }
}
