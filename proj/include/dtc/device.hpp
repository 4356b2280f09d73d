#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dtc/constants.hpp"
#include "dtc/errors.hpp"

namespace dtc {

// Design parameters of the two-qubit + double-transmon-coupler device.
// Transmons 1,2 are the computational qubits; 3,4 form the coupler.
struct DeviceParams {
  Eigen::Matrix4d cap;         // C_ij in fF, symmetric
  Eigen::Vector4d qubit_freq;  // omega_i in rad/ns
  double r_j = 0.3;            // I_c5 / [(I_c3 + I_c4)/2]
  int charge_cutoff = 10;      // N; per-transmon dimension 2N+1

  static DeviceParams paper_defaults();
  void validate() const;
};

inline DeviceParams DeviceParams::paper_defaults() {
  DeviceParams p;
  p.cap << 60.0, 0.025, 6.0, 0.05,
           0.025, 60.0, 0.05, 6.0,
           6.0, 0.05, 60.0, 1.0,
           0.05, 6.0, 1.0, 60.0;
  p.qubit_freq << 7.0, 7.7, 10.2, 10.2;
  p.qubit_freq *= constants::ghz_to_rad_ns;
  p.r_j = 0.3;
  p.charge_cutoff = 10;
  return p;
}

inline void DeviceParams::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(cap(i, i) > 0.0))
      throw ConfigError("capacitance C_" + std::to_string(i + 1) +
                        std::to_string(i + 1) + " must be strictly positive");
    for (int j = 0; j < 4; ++j) {
      if (cap(i, j) != cap(j, i))
        throw ConfigError("capacitance matrix must be symmetric");
      if (i != j && cap(i, j) < 0.0)
        throw ConfigError("coupling capacitance C_" + std::to_string(i + 1) +
                          std::to_string(j + 1) + " must be non-negative");
    }
    if (!(qubit_freq(i) > 0.0))
      throw ConfigError("omega" + std::to_string(i + 1) +
                        " must be strictly positive");
  }
  if (!(r_j > 0.0 && r_j < 1.0)) throw ConfigError("r_j must lie in (0, 1)");
  if (charge_cutoff < 1) throw ConfigError("charge_cutoff must be >= 1");
}

// Quantities derived from the design values.
struct DerivedParams {
  Eigen::Matrix4d w;             // W_ij in rad/ns, symmetric positive definite
  std::array<double, 5> omega_j; // Josephson frequencies, rad/ns
  double omega_c34 = 0.0;        // e^2/(2 hbar C_34), rad/ns
  std::optional<double> theta_idle;  // Theta_0 in radians, cached by spectrum code

  // Informational only: I_c = hbar*omega_J/phi0 = 2e*omega_J. Never used in
  // any computation; omega_J is the quantity the Hamiltonian consumes.
  std::array<double, 5> critical_currents_nA() const {
    std::array<double, 5> ic{};
    for (int i = 0; i < 5; ++i)
      ic[i] = 2.0 * constants::elementary_charge * omega_j[i] * 1e9 * 1e9;
    return ic;
  }
};

// M_ii = sum_j C_ij, M_ij = -C_ij (i != j). Units fF.
inline Eigen::Matrix4d build_capacitor_matrix(const DeviceParams& params) {
  params.validate();
  Eigen::Matrix4d m = -params.cap;
  for (int i = 0; i < 4; ++i) m(i, i) = params.cap.row(i).sum();
  Eigen::LLT<Eigen::Matrix4d> llt(m);
  if (llt.info() != Eigen::Success)
    throw ConfigError("capacitor matrix is not positive definite");
  return m;
}

// W = (e^2 / 2 hbar) M^{-1}, rad/ns.
inline Eigen::Matrix4d compute_w_matrix(const Eigen::Matrix4d& m_fF) {
  Eigen::LLT<Eigen::Matrix4d> llt(m_fF);
  if (llt.info() != Eigen::Success)
    throw ConfigError("capacitor matrix is not positive definite");
  Eigen::Matrix4d w = constants::charging_scale_rad_ns_per_inv_fF *
                      llt.solve(Eigen::Matrix4d::Identity());
  return 0.5 * (w + w.transpose());  // kill round-off asymmetry
}

// omega_Ji = (omega_i + W_ii)^2 / (8 W_ii) for the four transmons;
// omega_J5 = r_J * (omega_J3 + omega_J4) / 2.
inline std::array<double, 5> compute_josephson_freqs(const DeviceParams& params,
                                                     const Eigen::Matrix4d& w) {
  std::array<double, 5> oj{};
  for (int i = 0; i < 4; ++i) {
    const double wii = w(i, i);
    const double s = params.qubit_freq(i) + wii;
    oj[i] = s * s / (8.0 * wii);
  }
  oj[4] = params.r_j * (oj[2] + oj[3]) / 2.0;
  return oj;
}

inline DerivedParams derive(const DeviceParams& params) {
  DerivedParams d;
  const Eigen::Matrix4d m = build_capacitor_matrix(params);
  d.w = compute_w_matrix(m);
  d.omega_j = compute_josephson_freqs(params, d.w);
  d.omega_c34 = constants::charging_scale_rad_ns_per_inv_fF / params.cap(2, 3);
  return d;
}

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key,
                             const std::optional<double>& fallback) {
  if (j.contains(key)) {
    if (!j.at(key).is_number())
      throw ConfigError("config field '" + key + "' must be a number");
    return j.at(key).get<double>();
  }
  if (fallback) return *fallback;
  throw ConfigError("config is missing field '" + key +
                    "' (set \"paper_defaults\": true to fill gaps)");
}

}  // namespace detail

inline DeviceParams device_params_from_json(const nlohmann::json& j) {
  const bool use_defaults =
      j.contains("paper_defaults") && j.at("paper_defaults").get<bool>();
  const DeviceParams def = DeviceParams::paper_defaults();

  auto cap_key = [](int i, int k) {
    return "c" + std::to_string(i + 1) + std::to_string(k + 1) + "_fF";
  };

  DeviceParams p;
  for (int i = 0; i < 4; ++i) {
    for (int k = i; k < 4; ++k) {
      std::optional<double> fb;
      if (use_defaults) fb = def.cap(i, k);
      const double v = detail::require_number(j, cap_key(i, k), fb);
      p.cap(i, k) = v;
      p.cap(k, i) = v;
    }
  }
  for (int i = 0; i < 4; ++i) {
    std::optional<double> fb;
    if (use_defaults) fb = def.qubit_freq(i) * constants::rad_ns_to_ghz;
    const std::string key = "omega" + std::to_string(i + 1) + "_GHz";
    p.qubit_freq(i) =
        detail::require_number(j, key, fb) * constants::ghz_to_rad_ns;
  }
  {
    std::optional<double> fb;
    if (use_defaults) fb = def.r_j;
    p.r_j = detail::require_number(j, "r_j", fb);
  }
  {
    std::optional<double> fb;
    if (use_defaults) fb = static_cast<double>(def.charge_cutoff);
    p.charge_cutoff =
        static_cast<int>(detail::require_number(j, "charge_cutoff", fb));
  }
  p.validate();
  return p;
}

inline DeviceParams load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure in '" + path + "': " + e.what());
  }
  return device_params_from_json(j);
}

inline nlohmann::json device_params_to_json(const DeviceParams& p) {
  nlohmann::json j;
  for (int i = 0; i < 4; ++i)
    for (int k = i; k < 4; ++k)
      j["c" + std::to_string(i + 1) + std::to_string(k + 1) + "_fF"] =
          p.cap(i, k);
  for (int i = 0; i < 4; ++i)
    j["omega" + std::to_string(i + 1) + "_GHz"] =
        p.qubit_freq(i) * constants::rad_ns_to_ghz;
  j["r_j"] = p.r_j;
  j["charge_cutoff"] = p.charge_cutoff;
  return j;
}

inline nlohmann::json derived_params_to_json(const DerivedParams& d) {
  nlohmann::json j;
  nlohmann::json w;
  for (int i = 0; i < 4; ++i)
    for (int k = i; k < 4; ++k)
      w["w" + std::to_string(i + 1) + std::to_string(k + 1) + "_MHz"] =
          d.w(i, k) * constants::rad_ns_to_mhz;
  j["w"] = w;
  for (int i = 0; i < 5; ++i)
    j["omega_j" + std::to_string(i + 1) + "_GHz"] =
        d.omega_j[i] * constants::rad_ns_to_ghz;
  j["omega_c34_GHz"] = d.omega_c34 * constants::rad_ns_to_ghz;
  const auto ic = d.critical_currents_nA();
  for (int i = 0; i < 5; ++i)
    j["i_c" + std::to_string(i + 1) + "_nA_informational"] = ic[i];
  if (d.theta_idle)
    j["theta_idle_over_pi"] = *d.theta_idle / constants::pi;
  return j;
}

// Stable hash of a device configuration, stamped into every output file.
inline std::string config_hash(const DeviceParams& p) {
  const std::string dump = device_params_to_json(p).dump();
  const size_t h = std::hash<std::string>{}(dump);
  char buf[2 + 16 + 1];
  std::snprintf(buf, sizeof(buf), "%016zx", h);
  return std::string(buf);
}

}  // namespace dtc
