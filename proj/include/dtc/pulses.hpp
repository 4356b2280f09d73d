#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "dtc/errors.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

struct PulseSample {
  double theta = 0.0;      // radians
  double theta_dot = 0.0;  // rad/ns
};

// Ac flux pulse Theta(t) = Theta_0 + env(t) cos(carrier * t) with
// env(t) = alpha tanh(beta t) tanh(beta (T - t)). Outside [0, T] the pulse
// is off: (Theta_0, 0).
struct AcPulse {
  double theta0 = 0.0;   // radians
  double alpha = 0.0;    // radians
  double beta = 0.0;     // 1/ns
  double duration = 0.0; // ns
  double carrier = 0.0;  // rad/ns, set to Delta(Theta_0)

  double envelope(double t) const {
    return alpha * std::tanh(beta * t) * std::tanh(beta * (duration - t));
  }

  PulseSample at(double t) const {
    if (t < 0.0 || t > duration) return {theta0, 0.0};
    const double th_a = std::tanh(beta * t);
    const double th_b = std::tanh(beta * (duration - t));
    const double env = alpha * th_a * th_b;
    const double denv =
        alpha * beta * ((1.0 - th_a * th_a) * th_b - th_a * (1.0 - th_b * th_b));
    const double c = std::cos(carrier * t), s = std::sin(carrier * t);
    return {theta0 + env * c, denv * c - env * carrier * s};
  }
};

// Dc flux pulse: flat top at theta_peak with smooth ramps of length
// ramp_frac * T on each side. The ramp shape is a half-cosine plus low-order
// corrections whose coefficients the calibration module tunes:
//   s(u) = (1 - cos(pi u))/2 + sum_k c_k sin(k pi u) sin(pi u),  u in [0,1],
// which keeps s(0)=0, s(1)=1 and zero slope at both ends for any c_k.
struct DcPulse {
  double theta0 = 0.0;      // radians
  double theta_peak = 0.0;  // radians
  double duration = 0.0;    // ns
  double ramp_frac = 0.25;  // ramp time as a fraction of T, in (0, 0.5]
  std::vector<double> ramp_coeffs;

  // Overshoot beyond [theta0, theta_peak] is bounded by this amount.
  double overshoot_bound() const {
    double s = 0.0;
    for (double c : ramp_coeffs) s += std::abs(c);
    return std::abs(theta_peak - theta0) * s;
  }

  void validate() const {
    if (!(duration > 0.0)) throw ConfigError("dc pulse duration must be > 0");
    if (!(ramp_frac > 0.0 && ramp_frac <= 0.5))
      throw ConfigError("dc pulse ramp_frac must lie in (0, 0.5]");
  }

  double shape(double u) const {
    double s = 0.5 * (1.0 - std::cos(constants::pi * u));
    const double sp = std::sin(constants::pi * u);
    for (size_t k = 0; k < ramp_coeffs.size(); ++k)
      s += ramp_coeffs[k] * std::sin((k + 1) * constants::pi * u) * sp;
    return s;
  }

  double shape_derivative(double u) const {
    const double pi = constants::pi;
    double d = 0.5 * pi * std::sin(pi * u);
    for (size_t k = 0; k < ramp_coeffs.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      d += ramp_coeffs[k] * (kk * pi * std::cos(kk * pi * u) * std::sin(pi * u) +
                             pi * std::sin(kk * pi * u) * std::cos(pi * u));
    }
    return d;
  }

  PulseSample at(double t) const {
    if (t < 0.0 || t > duration) return {theta0, 0.0};
    const double tau = ramp_frac * duration;
    const double amp = theta_peak - theta0;
    if (t < tau) {
      const double u = t / tau;
      return {theta0 + amp * shape(u), amp * shape_derivative(u) / tau};
    }
    if (t > duration - tau) {
      const double u = (duration - t) / tau;
      return {theta0 + amp * shape(u), -amp * shape_derivative(u) / tau};
    }
    return {theta_peak, 0.0};
  }
};

struct ZzPeak {
  double theta = 0.0;  // radians
  double zz = 0.0;     // rad/ns at the peak
};

// theta_peak for the dc CPHASE pulse: the interior maximum of |zeta_ZZ|
// over the dip region. The dip sits on a wide avoided crossing where |11>
// hybridizes with a coupler state and bare-product labeling fails, so the
// search tracks the adiabatic branch by eigenvector continuation from
// theta_lo and refines by grid zoom. Errors out when the sweep is monotonic.
inline ZzPeak peak_from_zz_max(const HamiltonianModel& model, double theta_lo,
                               double theta_hi, const SpectrumOptions& opt = {},
                               double theta_tol = 1e-4 * constants::pi) {
  if (!(theta_hi > theta_lo)) throw CalibrationError("empty zz-peak bracket");
  SpectrumOptions sopt = opt;
  sopt.keep_vectors = true;
  sopt.label_floor = 0.0;  // interior points are relabeled by continuation

  const int n_grid = 17;
  auto grid_between = [&](double a, double b) {
    std::vector<double> ts(n_grid);
    for (int i = 0; i < n_grid; ++i) ts[i] = a + (b - a) * i / (n_grid - 1);
    return ts;
  };

  // anchor at theta_lo must be labelable from bare products
  SpectrumResult anchor = spectrum_at(model, theta_lo, sopt);
  for (int c = 0; c < 4; ++c)
    if (anchor.labels[anchor.comp_index[c]].overlap < 0.5)
      throw CalibrationError("zz-peak bracket start is not adiabatically "
                             "connected to the computational manifold");

  double a = theta_lo, b = theta_hi;
  bool first = true;
  ZzPeak pk;
  while (true) {
    const std::vector<double> ts = grid_between(a, b);
    std::vector<SpectrumResult> pass(n_grid);
    const SpectrumResult* prev = &anchor;
    for (int i = 0; i < n_grid; ++i) {
      pass[i] = spectrum_at(model, ts[i], sopt);
      detail::continue_labels(prev->vectors, prev->comp_index, pass[i]);
      prev = &pass[i];
    }
    int imax = 0;
    for (int i = 1; i < n_grid; ++i)
      if (std::abs(pass[i].zz) > std::abs(pass[imax].zz)) imax = i;
    if (first && (imax == 0 || imax == n_grid - 1))
      throw CalibrationError(
          "|zz| has no interior maximum in bracket (monotonic sweep)");
    first = false;
    imax = std::max(1, std::min(n_grid - 2, imax));
    pk.theta = ts[imax];
    pk.zz = pass[imax].zz;
    if (b - a <= theta_tol * (n_grid - 1) / 2.0) break;
    a = ts[imax - 1];
    b = ts[imax + 1];
    // the refined bracket start was continuation-labeled in this pass;
    // it anchors the next zoom
    anchor = std::move(pass[imax - 1]);
  }
  return pk;
}

}  // namespace dtc
