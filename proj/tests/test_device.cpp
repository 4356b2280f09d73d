#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dtc/device.hpp"

using namespace dtc;
using Catch::Approx;

namespace {

// Table I published values for cross-checking the derivation chain.
// W/2pi in MHz, upper triangle (11,12,13,14,22,23,24,33,34,44).
constexpr double table_w_mhz[10] = {296.0,  0.189, 26.5, 0.632, 296.0,
                                    0.632, 26.5,  291.0, 4.42, 291.0};
constexpr double table_omega_j_ghz[5] = {22.5, 27.0, 47.2, 47.2, 14.2};

std::string write_temp_config(const nlohmann::json& j) {
  const std::string path =
      "test_config_" + std::to_string(std::rand()) + ".json";
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("capacitor matrix from design capacitances") {
  const DeviceParams p = DeviceParams::paper_defaults();
  const Eigen::Matrix4d m = build_capacitor_matrix(p);

  CHECK(m(0, 0) == Approx(66.075).epsilon(1e-12));  // 60 + 0.025 + 6 + 0.05
  CHECK(m(0, 1) == Approx(-0.025));
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);

  SECTION("decoupled limit is diagonal") {
    DeviceParams dec = p;
    dec.cap = Eigen::Matrix4d::Zero();
    dec.cap.diagonal() << 60.0, 60.0, 60.0, 60.0;
    const Eigen::Matrix4d md = build_capacitor_matrix(dec);
    CHECK(md.isApprox(Eigen::Matrix4d(dec.cap.diagonal().asDiagonal())));
  }
}

TEST_CASE("W matrix reproduces Table I to 0.5%") {
  const DeviceParams p = DeviceParams::paper_defaults();
  const Eigen::Matrix4d m = build_capacitor_matrix(p);
  const Eigen::Matrix4d w = compute_w_matrix(m);

  int idx = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double w_mhz = w(i, j) * constants::rad_ns_to_mhz;
      INFO("W_" << i + 1 << j + 1);
      CHECK(w_mhz == Approx(table_w_mhz[idx]).epsilon(5e-3));
      ++idx;
    }

  SECTION("(2 hbar / e^2) W M = identity") {
    const Eigen::Matrix4d prod =
        (w / constants::charging_scale_rad_ns_per_inv_fF) * m;
    CHECK((prod - Eigen::Matrix4d::Identity()).norm() < 1e-10);
  }

  SECTION("positive definite") {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(w);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }

  SECTION("diagonal M gives zero off-diagonal W") {
    Eigen::Matrix4d md = Eigen::Matrix4d::Zero();
    md.diagonal() << 66.0, 66.0, 67.0, 67.0;
    const Eigen::Matrix4d wd = compute_w_matrix(md);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) CHECK(wd(i, j) == 0.0);
  }
}

TEST_CASE("Josephson frequencies") {
  const DeviceParams p = DeviceParams::paper_defaults();
  const DerivedParams d = derive(p);

  for (int i = 0; i < 4; ++i) {
    INFO("omega_J" << i + 1);
    CHECK(d.omega_j[i] * constants::rad_ns_to_ghz ==
          Approx(table_omega_j_ghz[i]).epsilon(5e-3));
  }
  // omega_J5 = r_J (omega_J3 + omega_J4)/2; Table I quotes 14.2 (2 s.f. of
  // 0.3 * 47.2)
  CHECK(d.omega_j[4] == Approx(p.r_j * (d.omega_j[2] + d.omega_j[3]) / 2.0));
  CHECK(d.omega_j[4] * constants::rad_ns_to_ghz ==
        Approx(table_omega_j_ghz[4]).epsilon(5e-3));

  SECTION("equal coupler transmons give equal omega_J") {
    CHECK(d.omega_j[2] == Approx(d.omega_j[3]).epsilon(1e-14));
  }

  SECTION("monotone increasing in omega_i at fixed W_ii") {
    const Eigen::Matrix4d w = d.w;
    DeviceParams hi = p;
    for (double f : {1.01, 1.1, 1.5}) {
      hi.qubit_freq = p.qubit_freq * f;
      const auto oj = compute_josephson_freqs(hi, w);
      const auto base = compute_josephson_freqs(p, w);
      for (int i = 0; i < 4; ++i) CHECK(oj[i] > base[i]);
    }
  }

  SECTION("explicit formula value") {
    // omega1/2pi = 7.0 GHz, W11/2pi ~ 296 MHz -> omega_J1/2pi ~ 22.5 GHz
    const double w11 = d.w(0, 0);
    const double oj1 = std::pow(p.qubit_freq(0) + w11, 2) / (8.0 * w11);
    CHECK(oj1 * constants::rad_ns_to_ghz == Approx(22.5).epsilon(5e-3));
  }
}

TEST_CASE("omega_C34 and informational critical currents") {
  const DeviceParams p = DeviceParams::paper_defaults();
  const DerivedParams d = derive(p);
  // e^2/(2 hbar C34) with C34 = 1 fF
  CHECK(d.omega_c34 ==
        Approx(constants::charging_scale_rad_ns_per_inv_fF).epsilon(1e-12));
  // I_c = 2 e omega_J; ratios against omega_J are a fixed constant
  const auto ic = d.critical_currents_nA();
  for (int i = 0; i < 5; ++i) CHECK(ic[i] > 0.0);
  CHECK(ic[4] / ic[2] == Approx(d.omega_j[4] / d.omega_j[2]).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  DeviceParams p = DeviceParams::paper_defaults();

  SECTION("negative coupling capacitance rejected") {
    p.cap(0, 1) = p.cap(1, 0) = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SECTION("r_j outside (0,1) rejected") {
    p.r_j = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.r_j = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SECTION("cutoff below 1 rejected") {
    p.charge_cutoff = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SECTION("non-positive qubit frequency rejected") {
    p.qubit_freq(2) = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
}

TEST_CASE("config file loading") {
  SECTION("explicit Table I values equal built-in defaults") {
    const DeviceParams def = DeviceParams::paper_defaults();
    nlohmann::json j = device_params_to_json(def);
    const std::string path = write_temp_config(j);
    const DeviceParams p = load_config(path);
    std::remove(path.c_str());
    CHECK(p.cap.isApprox(def.cap));
    CHECK(p.qubit_freq.isApprox(def.qubit_freq));
    CHECK(p.r_j == def.r_j);
    CHECK(p.charge_cutoff == def.charge_cutoff);
  }

  SECTION("negative capacitance rejected with field name") {
    nlohmann::json j = device_params_to_json(DeviceParams::paper_defaults());
    j["c12_fF"] = -1.0;
    const std::string path = write_temp_config(j);
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
  }

  SECTION("empty file without defaults flag names the missing field") {
    const std::string path = write_temp_config(nlohmann::json::object());
    CHECK_THROWS_WITH(load_config(path),
                      Catch::Matchers::ContainsSubstring("c11_fF"));
    std::remove(path.c_str());
  }

  SECTION("paper_defaults flag fills gaps") {
    nlohmann::json j;
    j["paper_defaults"] = true;
    j["r_j"] = 0.25;
    const std::string path = write_temp_config(j);
    const DeviceParams p = load_config(path);
    std::remove(path.c_str());
    CHECK(p.r_j == 0.25);
    CHECK(p.cap(0, 0) == 60.0);
  }

  SECTION("unparsable file") {
    const std::string path = "test_config_garbage.json";
    std::ofstream(path) << "not json {";
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
  }

  SECTION("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/nope.json"), ConfigError);
  }
}

TEST_CASE("config hash is stable and value-sensitive") {
  const DeviceParams a = DeviceParams::paper_defaults();
  DeviceParams b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.r_j = 0.25;
  CHECK(config_hash(a) != config_hash(b));
}
