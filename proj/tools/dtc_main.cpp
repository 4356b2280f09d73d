// Command-line front end: spectrum sweeps, gate simulation, and gate-time
// calibration for the double-transmon-coupler two-qubit device.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtc/calibration.hpp"
#include "dtc/io.hpp"

namespace {

using namespace dtc;

constexpr double pi = constants::pi;

struct GlobalOpts {
  std::string config_path;
  int threads = 1;
  int levels = 10;  // per-transmon levels kept in the eigenbasis; 0 = full
  int k = 20;       // eigenpairs per spectrum solve
  double tol = 1e-10;
  double idle_lo = 0.55, idle_hi = 0.75;  // idle-point bracket, theta/pi
};

// "lo:hi" or "lo:hi:n" -> numbers; rejects reversed or malformed input.
std::vector<double> parse_range(const std::string& s, size_t want) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t colon = s.find(':', pos);
    const std::string tok =
        s.substr(pos, colon == std::string::npos ? colon : colon - pos);
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("malformed range '" + s + "' (expected lo:hi[:n])");
    }
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (out.size() != want)
    throw ConfigError("range '" + s + "' must have " + std::to_string(want) +
                      " fields");
  if (out[1] <= out[0])
    throw ConfigError("range '" + s + "' must be increasing");
  return out;
}

// Angles like "0.25pi", "1pi" or plain radians.
double parse_angle(const std::string& s) {
  std::string num = s;
  double scale = 1.0;
  if (num.size() > 2 && num.substr(num.size() - 2) == "pi") {
    num = num.substr(0, num.size() - 2);
    scale = pi;
  }
  try {
    size_t used = 0;
    const double v = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument(num);
    return v * scale;
  } catch (const std::exception&) {
    throw ConfigError("malformed angle '" + s + "' (expected e.g. 0.25pi)");
  }
}

DeviceParams load_params(const GlobalOpts& g) {
  if (!g.config_path.empty()) return load_config(g.config_path);
  if (const char* env = std::getenv("DTC_CONFIG"))
    if (env[0] != '\0') return load_config(env);
  return DeviceParams::paper_defaults();
}

HamiltonianModel build_model(const DeviceParams& p, const DerivedParams& d,
                             int levels) {
  if (levels == 0) return build_full_model(p, d);
  return truncate_to_eigenbasis(p, d, levels);
}

SpectrumOptions spectrum_opts(const GlobalOpts& g) {
  SpectrumOptions s;
  s.k = g.k;
  s.threads = g.threads;
  return s;
}

IdlePoint locate_idle(const HamiltonianModel& model, const GlobalOpts& g) {
  return find_idle_point(model, g.idle_lo * pi, g.idle_hi * pi,
                         spectrum_opts(g));
}

int cmd_sweep(const GlobalOpts& g, const std::string& what,
              const std::string& grid_spec, const std::string& out_path) {
  if (what != "spectrum" && what != "zz" && what != "g")
    throw ConfigError("--what must be one of spectrum, zz, g");
  const DeviceParams p = load_params(g);
  const DerivedParams d = derive(p);
  const HamiltonianModel model = build_model(p, d, g.levels);
  const std::string hash = config_hash(p);

  const std::vector<double> r = parse_range(grid_spec, 3);
  const int n = static_cast<int>(r[2]);
  if (n < 1) throw ConfigError("grid must have at least one point");
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[i] = (r[0] + (n == 1 ? 0.0 : (r[1] - r[0]) * i / (n - 1))) * pi;

  const IdlePoint idle = locate_idle(model, g);
  const auto sweep = sweep_spectrum(model, grid, spectrum_opts(g));

  const int e01 = idle.spectrum.comp_index[1];
  const int e10 = idle.spectrum.comp_index[2];
  std::ofstream out = open_output(out_path);
  write_sweep_csv(out, hash, model, sweep, idle.spectrum.vectors.col(e01),
                  idle.spectrum.vectors.col(e10));
  std::cout << "idle theta0/pi = " << idle.theta / pi
            << ", |zz|/2pi = " << std::abs(idle.zz) * constants::rad_ns_to_khz
            << " kHz; wrote " << sweep.size() << " rows to " << out_path
            << "\n";
  return 0;
}

struct PulseFlags {
  double alpha_over_pi = 0.1575;
  double beta = 0.3;  // 1/ns
  double theta_peak_over_pi = 0.0;  // 0 = locate from the |zz| maximum
  double ramp_frac = 0.4;
  std::vector<double> ramp_coeffs;
  double peak_lo = 0.70, peak_hi = 0.95;  // zz-peak bracket, theta/pi
};

GateKind parse_kind(const std::string& kind) {
  if (kind == "sqiswap") return GateKind::parametric;
  if (kind == "cz") return GateKind::cphase;
  throw ConfigError("--kind must be sqiswap or cz");
}

PulseFactory make_factory(const GateContext& ctx, const HamiltonianModel& model,
                          GateKind kind, const PulseFlags& f,
                          const SpectrumOptions& sopt) {
  if (kind == GateKind::parametric)
    return ac_pulse_factory(ctx, f.alpha_over_pi * pi, f.beta);
  double peak = f.theta_peak_over_pi * pi;
  if (peak == 0.0) {
    const ZzPeak pk =
        peak_from_zz_max(model, f.peak_lo * pi, f.peak_hi * pi, sopt);
    peak = pk.theta;
    std::cout << "theta_peak/pi = " << peak / pi
              << " (|zz|/2pi = " << std::abs(pk.zz) * constants::rad_ns_to_mhz
              << " MHz)\n";
  }
  return dc_pulse_factory(ctx, peak, f.ramp_frac, f.ramp_coeffs);
}

void print_report(const GateReport& r, double duration) {
  std::cout << to_string(r.kind) << " gate, T = " << duration << " ns\n"
            << "  angle/pi     = " << r.angle / pi << "\n"
            << "  avg fidelity = " << r.avg_fidelity << "\n"
            << "  leakage      = [" << r.leakage[0] << ", " << r.leakage[1]
            << ", " << r.leakage[2] << ", " << r.leakage[3] << "]\n";
}

int cmd_gate(const GlobalOpts& g, const std::string& kind_name, double T,
             const PulseFlags& f, const std::string& report_path,
             const std::string& pulse_path, double sample_rate) {
  const GateKind kind = parse_kind(kind_name);
  const DeviceParams p = load_params(g);
  const DerivedParams d = derive(p);
  const HamiltonianModel model = build_model(p, d, g.levels);
  const std::string hash = config_hash(p);

  const GateContext ctx = make_gate_context(model, locate_idle(model, g));
  const PulseFactory fac = make_factory(ctx, model, kind, f, spectrum_opts(g));
  const PulseSampler pulse = fac(T);

  if (!pulse_path.empty()) {
    std::ofstream out = open_output(pulse_path);
    write_pulse_csv(out, hash, pulse, T, sample_rate);
  }

  PropagateOptions popt;
  popt.tol = g.tol;
  const GateReport r = simulate_gate(ctx, kind, pulse, T, popt);
  print_report(r, T);
  if (!report_path.empty()) {
    std::ofstream out = open_output(report_path);
    write_gate_report(out, hash, r);
  }
  return 0;
}

int cmd_calibrate(const GlobalOpts& g, const std::string& kind_name,
                  const std::string& target_spec, const std::string& bracket,
                  int grid_n, int budget, const PulseFlags& f,
                  const std::string& out_path,
                  const std::string& report_path) {
  const GateKind kind = parse_kind(kind_name);
  const double target =
      parse_angle(target_spec.empty()
                      ? (kind == GateKind::parametric ? "0.25pi" : "1pi")
                      : target_spec);
  const std::vector<double> br = parse_range(bracket, 2);

  const DeviceParams p = load_params(g);
  const DerivedParams d = derive(p);
  const HamiltonianModel model = build_model(p, d, g.levels);
  const std::string hash = config_hash(p);

  const GateContext ctx = make_gate_context(model, locate_idle(model, g));
  PulseFlags flags = f;
  PropagateOptions popt;
  popt.tol = g.tol;

  if (kind == GateKind::cphase) {
    double peak = flags.theta_peak_over_pi * pi;
    if (peak == 0.0) {
      const ZzPeak pk = peak_from_zz_max(model, flags.peak_lo * pi,
                                         flags.peak_hi * pi, spectrum_opts(g));
      peak = pk.theta;
      flags.theta_peak_over_pi = peak / pi;
      std::cout << "theta_peak/pi = " << peak / pi << "\n";
    }
    if (budget > 0) {
      RampTuneOptions topt;
      topt.threads = g.threads;
      const RampTuneResult rt = tune_dc_ramp(
          ctx, peak, 0.5 * (br[0] + br[1]), flags.ramp_frac, flags.ramp_coeffs,
          budget, popt, topt);
      flags.ramp_frac = rt.ramp_frac;
      flags.ramp_coeffs = rt.ramp_coeffs;
      std::cout << "tuned ramp_frac = " << rt.ramp_frac
                << ", total leakage = " << rt.total_leakage << " ("
                << rt.evaluations << " evaluations)\n";
    }
  }
  const PulseFactory fac = make_factory(ctx, model, kind, flags,
                                        spectrum_opts(g));

  if (!out_path.empty()) {
    std::vector<double> t_grid(grid_n);
    for (int i = 0; i < grid_n; ++i)
      t_grid[i] =
          br[0] + (grid_n == 1 ? 0.0 : (br[1] - br[0]) * i / (grid_n - 1));
    const auto curve =
        angle_vs_time(ctx, kind, fac, t_grid, popt, g.threads);
    std::ofstream out = open_output(out_path);
    write_calibration_csv(out, hash, kind, curve);
  }

  const GateTimeSolution sol =
      solve_gate_time(ctx, kind, fac, target, br[0], br[1], popt);
  std::cout << "T* = " << sol.duration << " ns\n";
  print_report(sol.report, sol.duration);
  if (!report_path.empty()) {
    std::ofstream out = open_output(report_path);
    write_gate_report(out, hash, sol.report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit double-transmon-coupler simulator"};
  app.require_subcommand(0, 1);

  GlobalOpts g;
  bool print_derived = false;
  app.add_option("--config", g.config_path,
                 "Device config file (JSON); default: DTC_CONFIG env var or "
                 "built-in design values");
  app.add_option("--threads", g.threads, "Worker thread cap")
      ->check(CLI::PositiveNumber);
  app.add_option("--levels", g.levels,
                 "Per-transmon levels kept in the truncated eigenbasis "
                 "(0 = full charge basis)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--k", g.k, "Eigenpairs per spectrum solve")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "Propagation local error per unit time");
  app.add_option("--idle-lo", g.idle_lo, "Idle-point bracket start, theta/pi");
  app.add_option("--idle-hi", g.idle_hi, "Idle-point bracket end, theta/pi");
  app.add_flag("--print-derived", print_derived,
               "Dump derived device parameters as JSON and exit");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Spectrum/ZZ/coupling flux sweep");
  std::string what = "spectrum", grid_spec = "0.5:0.95:46", out_path;
  sweep->add_option("--what", what, "spectrum | zz | g");
  sweep->add_option("--grid", grid_spec, "Flux grid lo:hi:n in theta/pi");
  sweep->add_option("--out", out_path, "Output CSV path")->required();

  // gate
  auto* gate = app.add_subcommand("gate", "Simulate one gate at fixed T");
  std::string kind = "sqiswap", report_path, pulse_path;
  double T = 24.0, sample_rate = 100.0;
  PulseFlags pf;
  gate->add_option("--kind", kind, "sqiswap | cz");
  gate->add_option("--T", T, "Gate time, ns")->check(CLI::PositiveNumber);
  gate->add_option("--alpha", pf.alpha_over_pi, "Ac amplitude, units of pi");
  gate->add_option("--beta", pf.beta, "Ac envelope rate, 1/ns");
  gate->add_option("--theta-peak", pf.theta_peak_over_pi,
                   "Dc peak flux, theta/pi (0 = from the |zz| maximum)");
  gate->add_option("--ramp-frac", pf.ramp_frac, "Dc ramp fraction of T");
  gate->add_option("--ramp-coeffs", pf.ramp_coeffs,
                   "Dc ramp shape coefficients");
  gate->add_option("--report", report_path, "Write the gate report (JSON)");
  gate->add_option("--dump-pulse", pulse_path, "Write the waveform CSV");
  gate->add_option("--sample-rate", sample_rate,
                   "Waveform samples per ns for --dump-pulse");

  // calibrate
  auto* cal = app.add_subcommand("calibrate",
                                 "Solve the gate time for a target angle");
  std::string ckind = "sqiswap", target_spec, bracket = "20:28";
  std::string curve_path, creport_path;
  int grid_n = 7, budget = 0;
  PulseFlags cpf;
  cal->add_option("--kind", ckind, "sqiswap | cz");
  cal->add_option("--target", target_spec,
                  "Target angle, e.g. 0.25pi (default: 0.25pi / 1pi)");
  cal->add_option("--bracket", bracket, "Gate-time bracket lo:hi, ns");
  cal->add_option("--grid", grid_n, "Points in the angle-vs-time curve")
      ->check(CLI::PositiveNumber);
  cal->add_option("--budget", budget,
                  "Ramp-tuning evaluation budget (cz only, 0 = skip)");
  cal->add_option("--alpha", cpf.alpha_over_pi, "Ac amplitude, units of pi");
  cal->add_option("--beta", cpf.beta, "Ac envelope rate, 1/ns");
  cal->add_option("--theta-peak", cpf.theta_peak_over_pi,
                  "Dc peak flux, theta/pi (0 = from the |zz| maximum)");
  cal->add_option("--ramp-frac", cpf.ramp_frac, "Dc ramp fraction of T");
  cal->add_option("--ramp-coeffs", cpf.ramp_coeffs,
                  "Dc ramp shape coefficients");
  cal->add_option("--out", curve_path, "Write the angle-vs-time curve CSV");
  cal->add_option("--report", creport_path, "Write the T* gate report (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_derived) {
      const DeviceParams p = load_params(g);
      nlohmann::json j = derived_params_to_json(derive(p));
      j["config"] = config_hash(p);
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (sweep->parsed()) return cmd_sweep(g, what, grid_spec, out_path);
    if (gate->parsed())
      return cmd_gate(g, kind, T, pf, report_path, pulse_path, sample_rate);
    if (cal->parsed())
      return cmd_calibrate(g, ckind, target_spec, bracket, grid_n, budget, cpf,
                           curve_path, creport_path);
    std::cerr << app.help();
    return 2;
  } catch (const dtc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dtc::CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return 4;
  } catch (const dtc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
