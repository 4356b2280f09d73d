#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dtc/constants.hpp"
#include "dtc/errors.hpp"

namespace dtc {

using cd = std::complex<double>;

enum class GateKind { parametric, cphase };

inline std::string to_string(GateKind k) {
  return k == GateKind::parametric ? "parametric" : "cphase";
}

// Realized gate matrix and its figures of merit. Index convention 2i+j with
// (i, j) the qubit-1/qubit-2 excitations: |00>=0, |01>=1, |10>=2, |11>=3.
struct GateReport {
  Eigen::Matrix4cd u_prime;   // extracted gate matrix (not unitary in general)
  Eigen::Matrix4cd u_ideal;   // fitted ideal gate
  GateKind kind = GateKind::parametric;
  double angle = 0.0;         // theta_para or phi_cphase, radians
  std::array<double, 3> fitted_phases{};  // {phi11, phi22, phi12} or {phi11, phi22, phi33}
  double avg_fidelity = 0.0;
  std::array<double, 4> leakage{};  // per initial state, indexed 2i'+j'
};

// U'_{2i+j, 2i'+j'} = phase00 * <ij| psi_{i'j'}(T)>, with each row first
// rotated by e^{+i omega_ij(Theta_0) T} (removing idle dynamical phases) and
// the global phase chosen so U'_{0,0} is real non-negative.
inline Eigen::Matrix4cd extract_u_prime(const Eigen::MatrixXcd& finals,
                                        const Eigen::MatrixXcd& idle_basis,
                                        const std::array<double, 4>& idle_freqs,
                                        double duration) {
  if (finals.cols() != 4 || idle_basis.cols() != 4 ||
      finals.rows() != idle_basis.rows())
    throw NumericalError("extract_u_prime expects 4 finals over the idle basis");
  Eigen::Matrix4cd u;
  for (int r = 0; r < 4; ++r) {
    const cd frame = std::exp(cd(0.0, idle_freqs[r] * duration));
    for (int c = 0; c < 4; ++c)
      u(r, c) = frame * idle_basis.col(r).dot(finals.col(c));
  }
  const double a00 = std::abs(u(0, 0));
  if (a00 < 1e-6)
    throw NumericalError("global phase undefined: |<00|~00>| = " +
                         std::to_string(a00));
  u *= std::conj(u(0, 0)) / a00;
  return u;
}

// L_{i'j'} = 1 - sum_ij |U'_{2i+j, 2i'+j'}|^2, one value per initial state.
inline std::array<double, 4> leakage_rates(const Eigen::Matrix4cd& u_prime) {
  std::array<double, 4> l{};
  for (int c = 0; c < 4; ++c) l[c] = 1.0 - u_prime.col(c).squaredNorm();
  return l;
}

// F = (|tr(U_id^dag U')|^2 + tr(U'^dag U')) / 20.
inline double average_fidelity(const Eigen::Matrix4cd& u_prime,
                               const Eigen::Matrix4cd& u_ideal) {
  const cd tr = (u_ideal.adjoint() * u_prime).trace();
  return (std::norm(tr) + u_prime.squaredNorm()) / 20.0;
}

inline Eigen::Matrix4cd ideal_parametric(double theta, double phi11,
                                         double phi22, double phi12) {
  const double phi21 = phi11 + phi22 - phi12;  // unitarity
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  const cd mi(0.0, -1.0);
  u(0, 0) = 1.0;
  u(1, 1) = std::exp(cd(0.0, phi11)) * std::cos(theta);
  u(1, 2) = mi * std::exp(cd(0.0, phi12)) * std::sin(theta);
  u(2, 1) = mi * std::exp(cd(0.0, phi21)) * std::sin(theta);
  u(2, 2) = std::exp(cd(0.0, phi22)) * std::cos(theta);
  u(3, 3) = std::exp(cd(0.0, phi11 + phi22));
  return u;
}

inline Eigen::Matrix4cd ideal_cphase(double phi11, double phi22, double phi33) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = std::exp(cd(0.0, phi11));
  u(2, 2) = std::exp(cd(0.0, phi22));
  u(3, 3) = std::exp(cd(0.0, phi33));
  return u;
}

struct ParametricFit {
  double theta = 0.0;
  double phi11 = 0.0, phi22 = 0.0, phi12 = 0.0;
  Eigen::Matrix4cd u_ideal;
};

// theta_para = arcsin|U'_{1,2}| (so theta in [0, pi/2]; direction lives in
// phi12), e^{i phi_ii} = U'_{ii}/|U'_{ii}|, e^{i phi_12} = i U'_{1,2}/|U'_{1,2}|.
// When |U'_{1,2}| vanishes (no exchange), phi12 is taken as 0; it multiplies
// sin(theta) = 0 in the ideal gate, so nothing depends on it.
inline ParametricFit fit_parametric(const Eigen::Matrix4cd& u_prime) {
  ParametricFit f;
  for (int i : {1, 2})
    if (std::abs(u_prime(i, i)) < 1e-9)
      throw NumericalError("parametric fit: phase of entry (" +
                           std::to_string(i) + "," + std::to_string(i) +
                           ") undefinable (magnitude ~ 0)");
  const double s = std::abs(u_prime(1, 2));
  f.theta = std::asin(std::min(1.0, s));
  f.phi11 = std::arg(u_prime(1, 1));
  f.phi22 = std::arg(u_prime(2, 2));
  f.phi12 = s < 1e-9 ? 0.0 : std::arg(cd(0.0, 1.0) * u_prime(1, 2));
  f.u_ideal = ideal_parametric(f.theta, f.phi11, f.phi22, f.phi12);
  return f;
}

struct CphaseFit {
  double phi_cphase = 0.0;  // phi33 - phi22 - phi11
  double phi11 = 0.0, phi22 = 0.0, phi33 = 0.0;
  Eigen::Matrix4cd u_ideal;
};

inline CphaseFit fit_cphase(const Eigen::Matrix4cd& u_prime) {
  CphaseFit f;
  for (int i : {1, 2, 3})
    if (std::abs(u_prime(i, i)) < 1e-9)
      throw NumericalError("cphase fit: phase of entry (" + std::to_string(i) +
                           "," + std::to_string(i) +
                           ") undefinable (magnitude ~ 0)");
  f.phi11 = std::arg(u_prime(1, 1));
  f.phi22 = std::arg(u_prime(2, 2));
  f.phi33 = std::arg(u_prime(3, 3));
  f.phi_cphase = f.phi33 - f.phi22 - f.phi11;
  f.u_ideal = ideal_cphase(f.phi11, f.phi22, f.phi33);
  return f;
}

inline GateReport make_gate_report(const Eigen::Matrix4cd& u_prime,
                                   GateKind kind) {
  GateReport r;
  r.u_prime = u_prime;
  r.kind = kind;
  if (kind == GateKind::parametric) {
    const ParametricFit f = fit_parametric(u_prime);
    r.angle = f.theta;
    r.fitted_phases = {f.phi11, f.phi22, f.phi12};
    r.u_ideal = f.u_ideal;
  } else {
    const CphaseFit f = fit_cphase(u_prime);
    r.angle = f.phi_cphase;
    r.fitted_phases = {f.phi11, f.phi22, f.phi33};
    r.u_ideal = f.u_ideal;
  }
  r.avg_fidelity = average_fidelity(u_prime, r.u_ideal);
  r.leakage = leakage_rates(u_prime);
  return r;
}

inline nlohmann::json gate_report_to_json(const GateReport& r) {
  auto mat = [](const Eigen::Matrix4cd& m) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
      nlohmann::json rrow = nlohmann::json::array(),
                     irow = nlohmann::json::array();
      for (int j = 0; j < 4; ++j) {
        rrow.push_back(m(i, j).real());
        irow.push_back(m(i, j).imag());
      }
      re.push_back(rrow);
      im.push_back(irow);
    }
    return nlohmann::json{{"real", re}, {"imag", im}};
  };
  nlohmann::json j;
  j["kind"] = to_string(r.kind);
  j[r.kind == GateKind::parametric ? "theta_para_rad" : "phi_cphase_rad"] =
      r.angle;
  j["angle_over_pi"] = r.angle / constants::pi;
  if (r.kind == GateKind::parametric) {
    j["phi11_rad"] = r.fitted_phases[0];
    j["phi22_rad"] = r.fitted_phases[1];
    j["phi12_rad"] = r.fitted_phases[2];
  } else {
    j["phi11_rad"] = r.fitted_phases[0];
    j["phi22_rad"] = r.fitted_phases[1];
    j["phi33_rad"] = r.fitted_phases[2];
  }
  j["avg_fidelity"] = r.avg_fidelity;
  j["leakage"] = {{"L_00", r.leakage[0]},
                  {"L_01", r.leakage[1]},
                  {"L_10", r.leakage[2]},
                  {"L_11", r.leakage[3]}};
  j["u_prime"] = mat(r.u_prime);
  j["u_ideal"] = mat(r.u_ideal);
  return j;
}

}  // namespace dtc
