#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "dtc/calibration.hpp"
#include "dtc/device.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

// Every output file opens with this provenance line; identical configs
// produce identical hashes (and, the commands being deterministic,
// bit-identical files).
inline void write_provenance(std::ostream& os, const std::string& cfg_hash) {
  os << "# config " << cfg_hash << "\n";
}

// Sweep table: one row per flux point. abs_g is the effective transverse
// coupling |<01|H(theta)|10>| between the idle-point eigenstates.
inline void write_sweep_csv(std::ostream& os, const std::string& cfg_hash,
                            const HamiltonianModel& model,
                            const std::vector<SpectrumResult>& sweep,
                            const Eigen::VectorXcd& idle_01,
                            const Eigen::VectorXcd& idle_10) {
  write_provenance(os, cfg_hash);
  os << "theta_over_pi,omega_01_GHz,omega_10_GHz,omega_11_GHz,"
        "zeta_zz_kHz,abs_g_MHz,delta_MHz\n";
  char line[256];
  for (const SpectrumResult& s : sweep) {
    const double g =
        std::abs(effective_coupling(model, s.theta, idle_01, idle_10));
    std::snprintf(line, sizeof(line),
                  "%.10f,%.10f,%.10f,%.10f,%.6f,%.6f,%.6f\n",
                  s.theta / constants::pi,
                  s.comp_omega(0, 1) * constants::rad_ns_to_ghz,
                  s.comp_omega(1, 0) * constants::rad_ns_to_ghz,
                  s.comp_omega(1, 1) * constants::rad_ns_to_ghz,
                  s.zz * constants::rad_ns_to_khz,
                  g * constants::rad_ns_to_mhz,
                  s.delta * constants::rad_ns_to_mhz);
    os << line;
  }
}

// Waveform table for plotting: (t, Theta, dTheta/dt) at a fixed sample rate.
inline void write_pulse_csv(std::ostream& os, const std::string& cfg_hash,
                            const PulseSampler& pulse, double duration,
                            double sample_rate_per_ns) {
  if (!(sample_rate_per_ns > 0.0))
    throw ConfigError("pulse sample rate must be > 0");
  write_provenance(os, cfg_hash);
  os << "t_ns,theta_over_pi,theta_dot_rad_per_ns\n";
  const long n = static_cast<long>(std::ceil(duration * sample_rate_per_ns));
  char line[128];
  for (long i = 0; i <= n; ++i) {
    const double t = std::min(duration, i / sample_rate_per_ns);
    const PulseSample s = pulse(t);
    std::snprintf(line, sizeof(line), "%.8f,%.10f,%.10f\n", t,
                  s.theta / constants::pi, s.theta_dot);
    os << line;
  }
}

// Calibration curve: angle, fidelity and total leakage vs gate time.
inline void write_calibration_csv(std::ostream& os, const std::string& cfg_hash,
                                  GateKind kind,
                                  const std::vector<CalibrationPoint>& pts) {
  write_provenance(os, cfg_hash);
  os << "T_ns,"
     << (kind == GateKind::parametric ? "theta_para_over_pi"
                                      : "phi_cphase_over_pi")
     << ",avg_fidelity,total_leakage\n";
  char line[160];
  for (const CalibrationPoint& p : pts) {
    std::snprintf(line, sizeof(line), "%.8f,%.10f,%.10f,%.6e\n", p.duration,
                  p.angle / constants::pi, p.avg_fidelity, p.total_leakage);
    os << line;
  }
}

inline void write_gate_report(std::ostream& os, const std::string& cfg_hash,
                              const GateReport& r) {
  nlohmann::json j = gate_report_to_json(r);
  j["config"] = cfg_hash;
  os << j.dump(2) << "\n";
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

}  // namespace dtc
