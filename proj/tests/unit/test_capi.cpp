////////////////////////////////////////////////////////////////////////////////
//                                                                            //
//  This file is part of fermichip                                            //
//                                                                            //
//  Copyright 2026 fermichip developers                                       //
//                                                                            //
//  Licensed under the Apache License, Version 2.0 (the "License");           //
//  you may not use this file except in compliance with the License.          //
//  You may obtain a copy of the License at                                   //
//                                                                            //
//      http://www.apache.org/licenses/LICENSE-2.0                            //
//                                                                            //
//  Unless required by applicable law or agreed to in writing, software       //
//  distributed under the License is distributed on an "AS IS" BASIS,         //
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.  //
//  See the License for the specific language governing permissions and       //
//  limitations under the License.                                            //
//                                                                            //
////////////////////////////////////////////////////////////////////////////////

#include "doctest.h"
#include "fermichip/fermichip.h"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace {

  constexpr double kTwoPi = 6.283185307179586;
  constexpr double kHbar = 1.054571817e-34;

  // Owns a library string and hands back a std::string copy.
  std::string take( char* s )
  {
    REQUIRE(s != nullptr);
    std::string out(s);
    fc_string_free(s);
    return out;
  }

  template <class T, void ( *Free )( T* )>
  struct Handle {
    T* p = nullptr;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
  };

  using Registry = Handle<fc_species_registry, fc_species_free>;
  using State = Handle<fc_spin_state, fc_spin_state_free>;
  using Gas = Handle<fc_gas, fc_gas_free>;
  using Raster = Handle<fc_raster, fc_raster_free>;
  using Field = Handle<fc_field, fc_field_free>;
  using Dressing = Handle<fc_dressing, fc_dressing_free>;
  using Image = Handle<fc_image, fc_image_free>;
  using Fit = Handle<fc_fit, fc_fit_free>;

  fc_trap trap_hz( double fx, double fy, double fz ) { return { kTwoPi * fx, kTwoPi * fy, kTwoPi * fz }; }

  struct K40 {
    Registry reg;
    State s;
    K40()
    {
      REQUIRE(fc_species_builtin(reg.out()) == FC_OK);
      REQUIRE(fc_spin_state_stretched(reg.get(), "K40", s.out()) == FC_OK);
    }
  };

}

TEST_SUITE("capi")
{
  TEST_CASE("null arguments are rejected with a message")
  {
    double x = 0.0;
    CHECK(fc_fermi_fn(1.5, 0.5, nullptr) == FC_ERR_INVALID_ARGUMENT);
    CHECK(std::string(fc_last_error()).size() > 0);
    CHECK(fc_gas_json(nullptr, nullptr) == FC_ERR_INVALID_ARGUMENT);
    CHECK(fc_density_finite_t(nullptr, nullptr, &x) == FC_ERR_INVALID_ARGUMENT);
    CHECK(fc_species_builtin(nullptr) == FC_ERR_INVALID_ARGUMENT);
    // a success leaves nothing behind
    CHECK(fc_fermi_fn(1.5, 0.5, &x) == FC_OK);
    CHECK(std::string(fc_last_error()).empty());
    CHECK(std::string(fc_status_name(FC_ERR_NOT_A_TRAP)).size() > 0);
    CHECK(std::string(fc_version()).size() > 0);
    fc_species_free(nullptr);
    fc_gas_free(nullptr);
  }

  TEST_CASE("library errors map to status codes")
  {
    double x = 0.0;
    CHECK(fc_fermi_energy(1e5, trap_hz(0.0, 100.0, 100.0), &x) == FC_ERR_INVALID_ARGUMENT);
    CHECK(fc_log_fugacity_from_reduced_temperature(-1.0, &x) != FC_OK);
    K40 k;
    State bad;
    CHECK(fc_spin_state_create(k.reg.get(), "K40", 8, bad.out()) != FC_OK);
    CHECK(fc_spin_state_create(k.reg.get(), "Xe131", 1, bad.out()) != FC_OK);
    Field f;
    CHECK(fc_field_from_json("{ \"model\": ", f.out()) == FC_ERR_PARSE);
    CHECK(fc_field_load("/nonexistent/geometry.json", f.out()) == FC_ERR_IO);
  }

  TEST_CASE("spin state info")
  {
    K40 k;
    fc_spin_info info{};
    REQUIRE(fc_spin_state_info(k.s.get(), &info) == FC_OK);
    CHECK(info.twice_F == 9);
    CHECK(info.twice_m_F == 9);
    CHECK(info.trappable == 1);
    CHECK(info.mass == doctest::Approx(39.964 * 1.66054e-27).epsilon(1e-3));
    CHECK(take([&] { char* s = nullptr; fc_spin_state_label(k.s.get(), &s); return s; }()).find("K40") == 0);
  }

  TEST_CASE("gas summary and JSON agree")
  {
    K40 k;
    const auto trap = trap_hz(800.0, 50.0, 800.0);
    Gas g;
    REQUIRE(fc_gas_from_reduced_temperature(k.s.get(), trap, 1e6, 0.25, g.out()) == FC_OK);
    fc_gas_summary sum{};
    REQUIRE(fc_gas_summary_get(g.get(), &sum) == FC_OK);
    const double wbar = std::cbrt(trap.omega_x * trap.omega_y * trap.omega_z);
    CHECK(sum.E_F == doctest::Approx(kHbar * wbar * std::cbrt(6e6)).epsilon(1e-6));
    CHECK(sum.t_over_tf == doctest::Approx(0.25).epsilon(1e-10));

    double ef = 0.0;
    REQUIRE(fc_fermi_energy(1e6, trap, &ef) == FC_OK);
    CHECK(ef == doctest::Approx(sum.E_F).epsilon(1e-14));

    char* raw = nullptr;
    REQUIRE(fc_gas_json(g.get(), &raw) == FC_OK);
    const std::string text = take(raw);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("N").get<double>() == 1e6);
    CHECK(j.at("E_F_J").get<double>() == doctest::Approx(sum.E_F).epsilon(1e-15));
    CHECK(j.at("log_Z").get<double>() == doctest::Approx(sum.log_z).epsilon(1e-15));
    CHECK(j.at("T_over_TF").get<double>() == doctest::Approx(0.25).epsilon(1e-10));

    char* again = nullptr;
    REQUIRE(fc_gas_json(g.get(), &again) == FC_OK);
    CHECK(take(again) == text);
  }

  TEST_CASE("thermodynamic scan CSV")
  {
    const double t[] = { 0.1, 0.5, 2.0 };
    char* one = nullptr;
    char* four = nullptr;
    REQUIRE(fc_thermo_scan_csv(t, 3, 1, &one) == FC_OK);
    REQUIRE(fc_thermo_scan_csv(t, 3, 4, &four) == FC_OK);
    const std::string a = take(one), b = take(four);
    CHECK(a == b);
    CHECK(a.rfind("T_over_TF,Z,mu_over_EF,E_per_N_over_EF,n0_lambda3", 0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 4);
  }

  TEST_CASE("column profile round-trips through the binary raster format")
  {
    K40 k;
    Gas g;
    REQUIRE(fc_gas_from_reduced_temperature(k.s.get(), trap_hz(500.0, 500.0, 50.0), 1e5, 0.3, g.out()) == FC_OK);
    Raster r;
    REQUIRE(fc_column_profile(g.get(), 5e-3, 40, 2.0, 0, 2, r.out()) == FC_OK);
    fc_raster_info info{};
    REQUIRE(fc_raster_get_info(r.get(), &info) == FC_OK);
    CHECK(info.nx == 40);
    CHECK(info.ny == 40);

    const auto path = std::filesystem::temp_directory_path() / "fermichip_capi_raster.bin";
    REQUIRE(fc_raster_write_binary(r.get(), path.string().c_str()) == FC_OK);
    Raster back;
    REQUIRE(fc_raster_read_binary(path.string().c_str(), back.out()) == FC_OK);
    std::filesystem::remove(path);
    fc_raster_info info2{};
    REQUIRE(fc_raster_get_info(back.get(), &info2) == FC_OK);
    CHECK(info2.pitch_x == info.pitch_x);
    const std::vector<double> a(fc_raster_values(r.get()), fc_raster_values(r.get()) + 1600);
    const std::vector<double> b(fc_raster_values(back.get()), fc_raster_values(back.get()) + 1600);
    CHECK(a == b);

    double total = 0.0;
    REQUIRE(fc_raster_integral(r.get(), &total) == FC_OK);
    // +-2 radii in 2D leaves a small Fermi-Dirac tail outside the window
    CHECK(total == doctest::Approx(1e5).epsilon(0.03));
    CHECK(fc_raster_read_binary("/nonexistent/raster.bin", back.out()) == FC_ERR_IO);
  }

  TEST_CASE("Ioffe-Pritchard field analysis matches the model parameters")
  {
    K40 k;
    const double B0 = 1e-4, G = 10.0, C = 100.0;   // 1 G, 1 kG/cm, 100 G/cm^2
    Field f;
    REQUIRE(fc_field_ioffe_pritchard(B0, G, C, f.out()) == FC_OK);
    fc_trap_report rep{};
    const double seed[3] = { 1e-6, 2e-6, -1e-6 };
    REQUIRE(fc_field_analyze(f.get(), k.s.get(), seed, &rep) == FC_OK);
    CHECK(rep.B0 == doctest::Approx(B0).epsilon(1e-9));
    CHECK(rep.zero_field == 0);
    REQUIRE(rep.has_ip == 1);
    CHECK(rep.ip_gradient == doctest::Approx(G).epsilon(1e-4));
    CHECK(rep.ip_curvature == doctest::Approx(C).epsilon(1e-4));

    // transverse frequency inverts back to the gradient
    double g_back = 0.0;
    REQUIRE(fc_ip_gradient_from_frequency(k.s.get(), B0, rep.omega[0], &g_back) == FC_OK);
    CHECK(g_back == doctest::Approx(G).epsilon(1e-3));
    CHECK(rep.omega[0] == doctest::Approx(rep.omega[2]).epsilon(1e-6));
    CHECK(rep.omega[1] < rep.omega[0]);

    char* raw = nullptr;
    REQUIRE(fc_trap_report_json(f.get(), k.s.get(), seed, &raw) == FC_OK);
    CHECK(nlohmann::json::accept(take(raw)));
  }

  TEST_CASE("shipped geometry loads from disk")
  {
    K40 k;
    Field f;
    REQUIRE(fc_field_load(FERMICHIP_DATA_PATH "/geometry/paper-z-trap.json", f.out()) == FC_OK);
    fc_trap_report rep{};
    REQUIRE(fc_field_analyze(f.get(), k.s.get(), nullptr, &rep) == FC_OK);
    CHECK(rep.position[2] == doctest::Approx(190e-6).epsilon(1e-6));
    CHECK(std::isfinite(rep.depth));
  }

  TEST_CASE("dressing scenarios split one species only")
  {
    struct Want {
      const char* name;
      int rb, k;
    };
    for (const Want w : { Want{ "rb-doublewell", 2, 1 }, Want{ "k-doublewell", 1, 2 } }) {
      CAPTURE(w.name);
      Dressing d;
      REQUIRE(fc_dress_scenario(w.name, 2, d.out()) == FC_OK);
      size_t n = 0;
      REQUIRE(fc_dressing_count(d.get(), &n) == FC_OK);
      REQUIRE(n == 2);
      fc_dressing_summary rb{}, kk{};
      REQUIRE(fc_dressing_summary_get(d.get(), 0, &rb) == FC_OK);
      REQUIRE(fc_dressing_summary_get(d.get(), 1, &kk) == FC_OK);
      CHECK(rb.topology == w.rb);
      CHECK(kk.topology == w.k);
      const auto& dbl = w.rb == 2 ? rb : kk;
      CHECK(dbl.separation > 0.0);
      CHECK(dbl.barrier > 0.0);

      char* csv = nullptr;
      REQUIRE(fc_dressing_scan_csv(d.get(), 0, &csv) == FC_OK);
      CHECK(take(csv).rfind("s_m,U_J,delta_J,Omega_J,U_over_h_Hz", 0) == 0);
      char* rep = nullptr;
      REQUIRE(fc_dressing_report_json(d.get(), &rep) == FC_OK);
      CHECK(nlohmann::json::parse(take(rep)).at("species").size() == 2);
    }
    Dressing none;
    CHECK(fc_dress_scenario("no-such-scenario", 1, none.out()) == FC_ERR_INVALID_ARGUMENT);
    fc_dressing_summary s{};
    Dressing d;
    REQUIRE(fc_dress_scenario("rb-doublewell", 1, d.out()) == FC_OK);
    CHECK(fc_dressing_summary_get(d.get(), 5, &s) == FC_ERR_INVALID_ARGUMENT);
  }

  TEST_CASE("evaporation presets")
  {
    char* raw = nullptr;
    REQUIRE(fc_evap_preset_json(nullptr, &raw) == FC_OK);
    const auto list = nlohmann::json::parse(take(raw));
    std::vector<std::string> names;
    for (const auto& e : list)
      names.push_back(e.is_string() ? e.get<std::string>() : e.at("name").get<std::string>());
    CHECK(names.size() == 4);
    CHECK(std::find(names.begin(), names.end(), "reichel-z") != names.end());
    for (const auto& n : names) {
      char* one = nullptr;
      CHECK(fc_evap_preset_json(n.c_str(), &one) == FC_OK);
      CHECK(nlohmann::json::accept(take(one)));
    }
    CHECK(fc_evap_preset_json("nope", &raw) == FC_ERR_INVALID_ARGUMENT);

    double e = 0.0;
    REQUIRE(fc_current_scaling_exponent(1.0, 0.5, &e) == FC_OK);
    CHECK(e == doctest::Approx(2.5));
  }

  TEST_CASE("degenerate images fit better with the Fermi-Dirac profile")
  {
    K40 k;
    const auto trap = trap_hz(800.0, 50.0, 800.0);
    Gas g;
    REQUIRE(fc_gas_from_reduced_temperature(k.s.get(), trap, 1e5, 0.1, g.out()) == FC_OK);
    Image img;
    REQUIRE(fc_image_synthesize(g.get(), 10e-3, 64, 0.02, 7, img.out()) == FC_OK);
    Fit gauss, fd;
    REQUIRE(fc_fit_run(img.get(), FC_FIT_GAUSSIAN, 0, gauss.out()) == FC_OK);
    REQUIRE(fc_fit_run(img.get(), FC_FIT_FERMI_DIRAC, 0, fd.out()) == FC_OK);
    fc_fit_summary sg{}, sf{};
    REQUIRE(fc_fit_summary_get(gauss.get(), &sg) == FC_OK);
    REQUIRE(fc_fit_summary_get(fd.get(), &sf) == FC_OK);
    CHECK(sg.has_log_z == 0);
    CHECK(sf.has_log_z == 1);
    CHECK(sg.chi2 / sf.chi2 > 1.0);
    CHECK(sf.N == doctest::Approx(1e5).epsilon(0.05));

    // the Gaussian width overstates the temperature of a degenerate cloud
    double T_app = 0.0;
    REQUIRE(fc_apparent_temperature(gauss.get(), img.get(), &T_app) == FC_OK);
    fc_gas_summary gs{};
    REQUIRE(fc_gas_summary_get(g.get(), &gs) == FC_OK);
    CHECK(T_app > gs.T);

    Raster res;
    REQUIRE(fc_fit_residual(fd.get(), img.get(), res.out()) == FC_OK);
    char* raw = nullptr;
    REQUIRE(fc_fit_json(fd.get(), &raw) == FC_OK);
    const auto j = nlohmann::json::parse(take(raw));
    CHECK(j.contains("covariance"));
  }

  TEST_CASE("acceptance criteria through the C API")
  {
    int ids[32];
    size_t n = 0;
    REQUIRE(fc_acceptance_criteria(ids, 32, &n) == FC_OK);
    CHECK(n == 11);
    int one = 1;
    char* raw = nullptr;
    int pass = 0;
    REQUIRE(fc_acceptance_run_json(&one, 1, 1, &raw, &pass) == FC_OK);
    CHECK(pass == 1);
    CHECK(nlohmann::json::accept(take(raw)));
    int bogus = 99;
    CHECK(fc_acceptance_run_json(&bogus, 1, 1, &raw, nullptr) == FC_ERR_INVALID_ARGUMENT);
  }
}
