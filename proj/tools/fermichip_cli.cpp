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

// fermichip command-line front end. Everything goes through the C API.
//
// Exit codes: 0 success, 1 acceptance failure (paper-check), 2 configuration
// error, 3 numerical failure.

#include "fermichip/fermichip.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

  constexpr double kTwoPi = 6.283185307179586;
  constexpr double kMicro = 1e-6;
  constexpr double kGauss = 1e-4;

  enum Exit { kOk = 0, kAcceptanceFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

  struct Failure {
    int exit_code;
    std::string message;
  };

  [[noreturn]] void config_error( const std::string& msg ) { throw Failure{ kConfigError, msg }; }

  void check( fc_status s )
  {
    if (s == FC_OK)
      return;
    std::string msg = std::string(fc_status_name(s)) + ": " + fc_last_error();
    switch (s) {
    case FC_ERR_INVALID_ARGUMENT:
    case FC_ERR_PARSE:
    case FC_ERR_IO:
    case FC_ERR_DOMAIN:
      throw Failure{ kConfigError, msg };
    default:
      throw Failure{ kNumericalFailure, msg };
    }
  }

  // Owning wrappers for the opaque handles.
  template <class T, void (*Free)(T*)>
  struct Deleter {
    void operator()( T* p ) const { Free(p); }
  };
  using Registry = std::unique_ptr<fc_species_registry, Deleter<fc_species_registry, fc_species_free>>;
  using Spin = std::unique_ptr<fc_spin_state, Deleter<fc_spin_state, fc_spin_state_free>>;
  using Gas = std::unique_ptr<fc_gas, Deleter<fc_gas, fc_gas_free>>;
  using RasterPtr = std::unique_ptr<fc_raster, Deleter<fc_raster, fc_raster_free>>;
  using Field = std::unique_ptr<fc_field, Deleter<fc_field, fc_field_free>>;
  using Dressing = std::unique_ptr<fc_dressing, Deleter<fc_dressing, fc_dressing_free>>;
  using Image = std::unique_ptr<fc_image, Deleter<fc_image, fc_image_free>>;
  using Fit = std::unique_ptr<fc_fit, Deleter<fc_fit, fc_fit_free>>;

  std::string take( char* s )
  {
    std::string out(s ? s : "");
    fc_string_free(s);
    return out;
  }

  std::string fmt17( double v )
  {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  void emit( const std::string& text, const std::string& path )
  {
    if (path.empty() || path == "-") {
      std::cout << text;
      if (!text.empty() && text.back() != '\n')
        std::cout << '\n';
      return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os)
      config_error("cannot write " + path);
    os << text;
    if (!text.empty() && text.back() != '\n')
      os << '\n';
  }

  fs::path data_dir()
  {
    if (const char* env = std::getenv("FERMICHIP_DATA_DIR"); env && *env)
      return env;
#ifdef FERMICHIP_DEFAULT_DATA_DIR
    return FERMICHIP_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
  }

  // "9/2" -> 9, "-2" -> -4
  int parse_twice( const std::string& s )
  {
    try {
      std::size_t pos = 0;
      const auto slash = s.find('/');
      if (slash == std::string::npos) {
        const long v = std::stol(s, &pos);
        if (pos != s.size())
          throw std::invalid_argument(s);
        return int(2 * v);
      }
      const long num = std::stol(s.substr(0, slash), &pos);
      if (pos != slash || s.substr(slash + 1) != "2")
        throw std::invalid_argument(s);
      return int(num);
    } catch ( const std::exception& ) {
      config_error("not an integer or half-integer: '" + s + "'");
    }
  }

  // --------------------------------------------------------------------------
  // Shared option groups

  struct SpeciesArgs {
    std::string species = "K40";
    std::string m_F;
    std::string file;

    void add( CLI::App* app )
    {
      app->add_option("--species", species, "Species name")->capture_default_str();
      app->add_option("--mf", m_F, "Magnetic sublevel, e.g. 9/2 (default: stretched state)");
      app->add_option("--species-file", file, "Species table (default: built-in)");
    }

    Spin make() const
    {
      fc_species_registry* r = nullptr;
      check(file.empty() ? fc_species_builtin(&r) : fc_species_load(file.c_str(), &r));
      Registry reg(r);
      fc_spin_state* s = nullptr;
      check(m_F.empty() ? fc_spin_state_stretched(reg.get(), species.c_str(), &s)
                        : fc_spin_state_create(reg.get(), species.c_str(), parse_twice(m_F), &s));
      return Spin(s);
    }
  };

  struct GasArgs {
    SpeciesArgs sp;
    double N = 4e4;
    double fbar_hz = 0.0;
    std::vector<double> trap_hz;
    double t_over_tf = -1.0;
    double T_nK = -1.0;

    void add( CLI::App* app )
    {
      sp.add(app);
      app->add_option("--N", N, "Atom number")->capture_default_str();
      app->add_option("--fbar-hz", fbar_hz, "Isotropic trap frequency (Hz)");
      app->add_option("--trap-hz", trap_hz, "Trap frequencies fx fy fz (Hz)")->expected(3);
      app->add_option("--t-over-tf", t_over_tf, "Reduced temperature T/T_F");
      app->add_option("--temperature-nK", T_nK, "Temperature (nK)");
    }

    fc_trap trap() const
    {
      if (!trap_hz.empty() && fbar_hz > 0.0)
        config_error("give either --fbar-hz or --trap-hz, not both");
      if (!trap_hz.empty())
        return fc_trap{ kTwoPi * trap_hz[0], kTwoPi * trap_hz[1], kTwoPi * trap_hz[2] };
      if (fbar_hz > 0.0)
        return fc_trap{ kTwoPi * fbar_hz, kTwoPi * fbar_hz, kTwoPi * fbar_hz };
      config_error("a trap is required: --fbar-hz or --trap-hz");
    }

    bool has_trap() const { return !trap_hz.empty() || fbar_hz > 0.0; }

    Gas make( const fc_spin_state* s ) const
    {
      const bool by_t = t_over_tf >= 0.0, by_T = T_nK >= 0.0;
      if (by_t == by_T)
        config_error("give exactly one of --t-over-tf and --temperature-nK");
      fc_gas* g = nullptr;
      check(by_t ? fc_gas_from_reduced_temperature(s, trap(), N, t_over_tf, &g)
                 : fc_gas_create(s, trap(), N, T_nK * 1e-9, &g));
      return Gas(g);
    }
  };

  // --------------------------------------------------------------------------
  // Config files: a JSON object whose keys are the subcommand's long option
  // names. Command-line flags win over the file.

  void apply_config( CLI::App* sub, const std::string& path )
  {
    std::ifstream in(path);
    if (!in)
      config_error("cannot open config " + path);
    json j;
    try {
      in >> j;
    } catch ( const json::exception& e ) {
      config_error("config " + path + ": " + e.what());
    }
    if (!j.is_object())
      config_error("config " + path + ": top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      CLI::Option* opt = key == "config" || key == "help" ? nullptr : sub->get_option_no_throw("--" + key);
      if (!opt)
        config_error("config " + path + ": unknown key '" + key + "' for '" + sub->get_name() + "'");
      if (opt->count() > 0)
        continue;
      auto scalar = [&]( const json& v ) -> std::string {
        if (v.is_string())
          return v.get<std::string>();
        if (v.is_boolean())
          return v.get<bool>() ? "true" : "false";
        if (v.is_number_integer())
          return std::to_string(v.get<long long>());
        if (v.is_number())
          return fmt17(v.get<double>());
        config_error("config " + path + ": key '" + key + "' has an unsupported value");
      };
      try {
        if (it->is_array()) {
          for (const auto& v : *it)
            opt->add_result(scalar(v));
        } else {
          opt->add_result(scalar(*it));
        }
        opt->run_callback();
      } catch ( const CLI::Error& e ) {
        config_error("config " + path + ": key '" + key + "': " + e.what());
      }
    }
  }

  // --------------------------------------------------------------------------
  // Subcommands

  struct Thermo {
    GasArgs gas;
    std::string out;
    std::string scan_csv;
    unsigned scan_points = 200;

    void add( CLI::App* app )
    {
      gas.add(app);
      app->add_option("--out", out, "JSON output file (default: stdout)");
      app->add_option("--scan-csv", scan_csv, "Also write a thermodynamics scan over T/T_F in [0.01, 10]");
      app->add_option("--scan-points", scan_points, "Points in the scan")->capture_default_str();
    }

    int run( unsigned jobs )
    {
      auto spin = gas.sp.make();
      auto g = gas.make(spin.get());
      char* text = nullptr;
      check(fc_gas_json(g.get(), &text));
      emit(take(text), out);
      if (!scan_csv.empty()) {
        if (scan_points < 2)
          config_error("--scan-points must be >= 2");
        std::vector<double> t(scan_points);
        for (unsigned i = 0; i < scan_points; ++i)
          t[i] = 0.01 * std::pow(1000.0, double(i) / (scan_points - 1));
        check(fc_thermo_scan_csv(t.data(), t.size(), jobs, &text));
        emit(take(text), scan_csv);
      }
      return kOk;
    }
  };

  struct Density {
    GasArgs gas;
    std::string axis = "x";
    unsigned points = 201;
    double extent = 1.5;
    std::string out;

    void add( CLI::App* app )
    {
      gas.add(app);
      app->add_option("--axis", axis, "Cut axis")->check(CLI::IsMember({ "x", "y", "z" }))->capture_default_str();
      app->add_option("--points", points, "Samples along the cut")->capture_default_str();
      app->add_option("--extent", extent, "Half-width in Thomas-Fermi radii")->capture_default_str();
      app->add_option("--out", out, "CSV output file (default: stdout)");
    }

    int run( unsigned )
    {
      if (points < 2 || !(extent > 0.0))
        config_error("--points must be >= 2 and --extent > 0");
      auto spin = gas.sp.make();
      auto g = gas.make(spin.get());
      fc_gas_summary s;
      check(fc_gas_summary_get(g.get(), &s));
      const int a = axis[0] - 'x';
      const double R = extent * s.tf_radius[a];
      std::ostringstream os;
      os << "r_m,n_finite_T_m3,n_zero_T_m3\n";
      for (unsigned i = 0; i < points; ++i) {
        double r[3] = { 0.0, 0.0, 0.0 };
        r[a] = -R + 2.0 * R * i / (points - 1);
        double nT = 0.0, n0 = 0.0;
        check(fc_density_finite_t(g.get(), r, &nT));
        check(fc_density_zero_t(g.get(), r, &n0));
        os << fmt17(r[a]) << ',' << fmt17(nT) << ',' << fmt17(n0) << '\n';
      }
      emit(os.str(), out);
      return kOk;
    }
  };

  struct Tof {
    GasArgs gas;
    double time_ms = 10.0;
    unsigned pixels = 256;
    double span = 4.0;
    std::string model = "fermi";
    std::string raster;
    std::string csv;
    std::string out;

    void add( CLI::App* app )
    {
      gas.add(app);
      app->add_option("--time-ms", time_ms, "Expansion time (ms)")->capture_default_str();
      app->add_option("--pixels", pixels, "Image side in pixels")->capture_default_str();
      app->add_option("--span", span, "Half-width in cloud radii")->capture_default_str();
      app->add_option("--model", model, "Profile model")
        ->check(CLI::IsMember({ "fermi", "boltzmann" }))
        ->capture_default_str();
      app->add_option("--raster", raster, "Binary raster output");
      app->add_option("--csv", csv, "CSV raster output");
      app->add_option("--out", out, "JSON summary output (default: stdout)");
    }

    int run( unsigned jobs )
    {
      auto spin = gas.sp.make();
      auto g = gas.make(spin.get());
      const double t = time_ms * 1e-3;
      fc_raster* r = nullptr;
      check(fc_column_profile(g.get(), t, pixels, span, model == "boltzmann", jobs, &r));
      RasterPtr img(r);
      if (!raster.empty())
        check(fc_raster_write_binary(img.get(), raster.c_str()));
      if (!csv.empty())
        check(fc_raster_write_csv(img.get(), csv.c_str()));

      fc_raster_info info;
      double integral = 0.0, peak = 0.0;
      check(fc_raster_get_info(img.get(), &info));
      check(fc_raster_integral(img.get(), &integral));
      check(fc_column_density(g.get(), t, 0.0, 0.0, model == "boltzmann", &peak));
      fc_trap scaled;
      double norm = 0.0;
      check(fc_tof_rescale(gas.trap(), t, &scaled, &norm));
      fc_gas_summary s;
      check(fc_gas_summary_get(g.get(), &s));

      json j;
      j["model"] = model;
      j["time_s"] = t;
      j["pixels"] = { info.nx, info.ny };
      j["pitch_m"] = { info.pitch_x, info.pitch_y };
      j["peak_column_density_m2"] = peak;
      j["integral"] = integral;
      j["N"] = s.N;
      j["rescaled_trap_hz"] = { scaled.omega_x / kTwoPi, scaled.omega_y / kTwoPi, scaled.omega_z / kTwoPi };
      j["density_normalization"] = norm;
      if (!raster.empty())
        j["raster"] = raster;
      emit(j.dump(2), out);
      return kOk;
    }
  };

  std::string resolve_geometry( const std::string& g )
  {
    if (fs::exists(g))
      return g;
    const fs::path p = data_dir() / "geometry" / (g + ".json");
    if (fs::exists(p))
      return p.string();
    config_error("geometry '" + g + "' not found (looked in " + (data_dir() / "geometry").string() + ")");
  }

  struct Trap {
    SpeciesArgs sp;
    std::string geometry = "paper-z-trap";
    std::vector<double> seed_um;
    std::string out;

    void add( CLI::App* app )
    {
      sp.add(app);
      app->add_option("--geometry", geometry, "Geometry file or preset name")->capture_default_str();
      app->add_option("--seed-um", seed_um, "Start point of the minimum search (um)")->expected(3);
      app->add_option("--out", out, "JSON output file (default: stdout)");
    }

    int run( unsigned )
    {
      auto spin = sp.make();
      fc_field* f = nullptr;
      check(fc_field_load(resolve_geometry(geometry).c_str(), &f));
      Field field(f);
      double seed[3];
      const double* sp_ptr = nullptr;
      if (!seed_um.empty()) {
        for (int i = 0; i < 3; ++i)
          seed[i] = seed_um[i] * kMicro;
        sp_ptr = seed;
      }
      char* text = nullptr;
      check(fc_trap_report_json(field.get(), spin.get(), sp_ptr, &text));
      emit(take(text), out);
      return kOk;
    }
  };

  struct Dress {
    std::string preset;
    std::string geometry;
    std::vector<std::string> states;
    std::optional<double> rf_khz, connect_khz, amplitude_mG, s_min_um, s_max_um;
    std::optional<unsigned> samples;
    std::vector<double> polarization, axis_origin_um, axis_direction;
    std::string out_dir = ".";

    void add( CLI::App* app )
    {
      app->add_option("--preset", preset, "Built-in scenario")->check(CLI::IsMember({ "rb-doublewell", "k-doublewell" }));
      app->add_option("--geometry", geometry, "Geometry file or preset name (instead of --preset)");
      app->add_option("--state", states, "Spin state SPECIES[:m_F] (default: Rb87 and K40 stretched)");
      app->add_option("--rf-khz", rf_khz, "RF frequency (kHz)");
      app->add_option("--connect-khz", connect_khz, "Frequency at which dressed branches are assigned (kHz)");
      app->add_option("--amplitude-mG", amplitude_mG, "RF amplitude (mG)");
      app->add_option("--polarization", polarization, "RF polarization axis")->expected(3);
      app->add_option("--axis-origin-um", axis_origin_um, "Scan origin (um, default: trap minimum)")->expected(3);
      app->add_option("--axis-direction", axis_direction, "Scan direction")->expected(3);
      app->add_option("--s-min-um", s_min_um, "Scan start (um)");
      app->add_option("--s-max-um", s_max_um, "Scan end (um)");
      app->add_option("--samples", samples, "Scan samples");
      app->add_option("--out-dir", out_dir, "Directory for the CSV scans and JSON report")->capture_default_str();
    }

    int run( unsigned jobs )
    {
      if (preset.empty() == geometry.empty())
        config_error("give exactly one of --preset and --geometry");
      Dressing d;
      std::vector<std::string> names;
      std::string prefix;
      if (!preset.empty()) {
        if (!states.empty() || rf_khz || connect_khz || amplitude_mG || s_min_um || s_max_um || samples
            || !polarization.empty() || !axis_origin_um.empty() || !axis_direction.empty())
          config_error("--preset does not take RF or state overrides; use --geometry");
        fc_dressing* p = nullptr;
        check(fc_dress_scenario(preset.c_str(), jobs, &p));
        d.reset(p);
        names = { "Rb87", "K40" };
        prefix = preset;
      } else {
        d = run_geometry(jobs, names);
        prefix = fs::path(geometry).stem().string();
      }

      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec)
        config_error("cannot create " + out_dir + ": " + ec.message());
      size_t n = 0;
      check(fc_dressing_count(d.get(), &n));
      for (size_t i = 0; i < n; ++i) {
        char* text = nullptr;
        check(fc_dressing_scan_csv(d.get(), i, &text));
        emit(take(text), (fs::path(out_dir) / (prefix + "-" + names[i] + ".csv")).string());
      }
      char* text = nullptr;
      check(fc_dressing_report_json(d.get(), &text));
      const std::string report = take(text);
      emit(report, (fs::path(out_dir) / (prefix + "-report.json")).string());
      emit(report, "");
      return kOk;
    }

    Dressing run_geometry( unsigned jobs, std::vector<std::string>& names )
    {
      fc_field* f = nullptr;
      check(fc_field_load(resolve_geometry(geometry).c_str(), &f));
      Field field(f);

      if (states.empty())
        states = { "Rb87", "K40" };
      std::vector<Spin> spins;
      for (const auto& s : states) {
        SpeciesArgs a;
        const auto colon = s.find(':');
        a.species = s.substr(0, colon);
        if (colon != std::string::npos)
          a.m_F = s.substr(colon + 1);
        spins.push_back(a.make());
        names.push_back(colon == std::string::npos ? a.species : a.species + "_" + std::to_string(parse_twice(a.m_F)));
      }

      // Defaults follow the built-in double-well scenario, centred on the
      // trap minimum of the first state.
      fc_rf_setup rf;
      check(fc_dress_scenario_setup("rb-doublewell", &rf, nullptr, nullptr, nullptr));
      fc_trap_report rep;
      check(fc_field_analyze(field.get(), spins.front().get(), nullptr, &rep));
      for (int i = 0; i < 3; ++i)
        rf.axis_origin[i] = rep.position[i];
      if (rf_khz)
        rf.omega = kTwoPi * *rf_khz * 1e3;
      if (connect_khz)
        rf.connect_omega = kTwoPi * *connect_khz * 1e3;
      if (amplitude_mG)
        rf.amplitude = *amplitude_mG * 1e-3 * kGauss;
      if (s_min_um)
        rf.s_min = *s_min_um * kMicro;
      if (s_max_um)
        rf.s_max = *s_max_um * kMicro;
      if (samples)
        rf.samples = *samples;
      for (int i = 0; i < 3; ++i) {
        if (!polarization.empty())
          rf.polarization[i] = polarization[i];
        if (!axis_origin_um.empty())
          rf.axis_origin[i] = axis_origin_um[i] * kMicro;
        if (!axis_direction.empty())
          rf.axis_direction[i] = axis_direction[i];
      }

      std::vector<const fc_spin_state*> ptrs;
      for (const auto& s : spins)
        ptrs.push_back(s.get());
      fc_dressing* p = nullptr;
      check(fc_dress_run(field.get(), &rf, ptrs.data(), ptrs.size(), jobs, &p));
      return Dressing(p);
    }
  };

  struct Evap {
    std::string preset;
    bool list = false;
    std::string out;

    void add( CLI::App* app )
    {
      app->add_option("--preset", preset, "Scenario preset");
      app->add_flag("--list", list, "List the presets");
      app->add_option("--out", out, "JSON output file (default: stdout)");
    }

    int run( unsigned )
    {
      if (list == !preset.empty())
        config_error("give exactly one of --preset and --list");
      char* text = nullptr;
      check(fc_evap_preset_json(list ? nullptr : preset.c_str(), &text));
      emit(take(text), out);
      return kOk;
    }
  };

  struct FitCmd {
    GasArgs gas;
    std::string raster;
    double noise = 0.02;
    std::optional<double> noise_rms;
    double time_ms = 10.0;
    unsigned pixels = 128;
    std::uint64_t seed = 1;
    std::string model = "both";
    bool numeric_jacobian = false;
    std::string residual;
    std::string out;

    void add( CLI::App* app )
    {
      gas.add(app);
      app->add_option("--raster", raster, "Binary raster to fit (default: synthesize one from the gas options)");
      app->add_option("--noise", noise, "Noise rms as a fraction of the image peak")->capture_default_str();
      app->add_option("--noise-rms", noise_rms, "Absolute noise rms (column density, m^-2)");
      app->add_option("--time-ms", time_ms, "Expansion time (ms)")->capture_default_str();
      app->add_option("--pixels", pixels, "Synthetic image side")->capture_default_str();
      app->add_option("--seed", seed, "Noise seed")->capture_default_str();
      app->add_option("--model", model, "Fit model")->check(CLI::IsMember({ "gauss", "fd", "both" }))->capture_default_str();
      app->add_flag("--numeric-jacobian", numeric_jacobian, "Use finite-difference Jacobians");
      app->add_option("--residual", residual, "Binary raster of the data minus the last fit");
      app->add_option("--out", out, "JSON output file (default: stdout)");
    }

    int run( unsigned )
    {
      const double t = time_ms * 1e-3;
      Image img;
      std::optional<double> mass;
      if (raster.empty()) {
        auto spin = gas.sp.make();
        auto g = gas.make(spin.get());
        fc_image* p = nullptr;
        check(fc_image_synthesize(g.get(), t, pixels, noise, seed, &p));
        img.reset(p);
        fc_spin_info info;
        check(fc_spin_state_info(spin.get(), &info));
        mass = info.mass;
      } else {
        fc_raster* r = nullptr;
        check(fc_raster_read_binary(raster.c_str(), &r));
        RasterPtr rast(r);
        double rms = 0.0;
        if (noise_rms) {
          rms = *noise_rms;
        } else {
          fc_raster_info info;
          check(fc_raster_get_info(rast.get(), &info));
          const double* v = fc_raster_values(rast.get());
          double peak = 0.0;
          for (std::size_t i = 0; i < std::size_t(info.nx) * info.ny; ++i)
            peak = std::max(peak, v[i]);
          rms = noise * peak;
        }
        fc_image* p = nullptr;
        check(fc_image_from_raster(rast.get(), rms, &p));
        img.reset(p);
        if (gas.has_trap()) {
          auto spin = gas.sp.make();
          fc_spin_info info;
          check(fc_spin_state_info(spin.get(), &info));
          mass = info.mass;
        }
      }
      if (mass)
        check(fc_image_set_context(img.get(), gas.trap(), *mass, t));

      json j;
      j["time_s"] = t;
      Fit last, gauss;
      auto run_model = [&]( fc_fit_model m, const char* key ) {
        fc_fit* p = nullptr;
        check(fc_fit_run(img.get(), m, numeric_jacobian, &p));
        Fit f(p);
        char* text = nullptr;
        check(fc_fit_json(f.get(), &text));
        j[key] = json::parse(take(text));
        return f;
      };
      if (model != "fd") {
        gauss = run_model(FC_FIT_GAUSSIAN, "gaussian");
        if (mass) {
          double T_app = 0.0;
          check(fc_apparent_temperature(gauss.get(), img.get(), &T_app));
          j["gaussian"]["apparent_temperature_nK"] = T_app * 1e9;
        }
      }
      if (model != "gauss")
        last = run_model(FC_FIT_FERMI_DIRAC, "fermi_dirac");
      if (model == "both")
        j["chi2_ratio_gauss_over_fd"] = j["gaussian"]["chi2"].get<double>() / j["fermi_dirac"]["chi2"].get<double>();
      if (!residual.empty()) {
        fc_raster* r = nullptr;
        check(fc_fit_residual(last ? last.get() : gauss.get(), img.get(), &r));
        RasterPtr res(r);
        check(fc_raster_write_binary(res.get(), residual.c_str()));
      }
      emit(j.dump(2), out);
      return kOk;
    }
  };

  struct PaperCheck {
    std::vector<int> criteria;
    std::string json_out;

    void add( CLI::App* app )
    {
      app->add_option("--criterion", criteria, "Run only these criteria");
      app->add_option("--json", json_out, "Also write the full report as JSON");
    }

    int run( unsigned jobs )
    {
      char* text = nullptr;
      int all_pass = 0;
      check(fc_acceptance_run_json(criteria.empty() ? nullptr : criteria.data(), criteria.size(), jobs, &text,
                                   &all_pass));
      const std::string report = take(text);
      if (!json_out.empty())
        emit(report, json_out);
      const json j = json::parse(report);
      for (const auto& c : j["criteria"]) {
        std::printf("%s  %2d  %s\n", c["pass"].get<bool>() ? "PASS" : "FAIL", c["id"].get<int>(),
                    c["title"].get<std::string>().c_str());
        if (!c["error"].get<std::string>().empty())
          std::printf("          error: %s\n", c["error"].get<std::string>().c_str());
        for (const auto& r : c["rows"]) {
          const double v = r["computed"].is_number() ? r["computed"].get<double>() : std::nan("");
          std::printf("      %-4s %-4s %-52s %-14.8g target %s %s\n", r["label"].get<std::string>().c_str(),
                      r["pass"].get<bool>() ? "ok" : "FAIL", r["quantity"].get<std::string>().c_str(), v,
                      r["target"].get<std::string>().c_str(), r["unit"].get<std::string>().c_str());
        }
      }
      std::printf("%s\n", all_pass ? "all criteria pass" : "some criteria FAIL");
      return all_pass ? kOk : kAcceptanceFailed;
    }
  };

}

int main( int argc, char** argv )
{
  CLI::App app{ "fermichip: degenerate Fermi gases in atom-chip microtraps" };
  app.require_subcommand(1);
  app.set_version_flag("--version", fc_version());
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for scans")->capture_default_str();

  Thermo thermo;
  Density density;
  Tof tof;
  Trap trap;
  Dress dress;
  Evap evap;
  FitCmd fitcmd;
  PaperCheck paper;

  struct Entry {
    CLI::App* app;
    std::function<int( unsigned )> run;
    std::string config;
  };
  std::vector<Entry> entries;
  auto sub = [&]( const char* name, const char* help, auto& cmd ) {
    CLI::App* s = app.add_subcommand(name, help);
    cmd.add(s);
    entries.push_back({ s, [&cmd]( unsigned j ) { return cmd.run(j); }, "" });
    s->add_option("--config", entries.back().config, "JSON file with option values");
    s->add_option("--jobs", jobs, "Worker threads for scans");
  };
  entries.reserve(8);
  sub("thermo", "Trapped-gas thermodynamics", thermo);
  sub("density", "In-trap density cut", density);
  sub("tof", "Time-of-flight column density image", tof);
  sub("trap", "Analyze a wire geometry", trap);
  sub("dress", "RF-dressed potentials for two species", dress);
  sub("evap", "Evaporation design presets", evap);
  sub("fit", "Fit Gaussian / Fermi-Dirac profiles to an image", fitcmd);
  sub("paper-check", "Run the regression suite of worked numbers", paper);

  try {
    app.parse(argc, argv);
  } catch ( const CLI::ParseError& e ) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    for (auto& e : entries) {
      if (!e.app->parsed())
        continue;
      if (!e.config.empty())
        apply_config(e.app, e.config);
      return e.run(jobs);
    }
  } catch ( const Failure& f ) {
    std::cerr << "fermichip: " << f.message << '\n';
    return f.exit_code;
  } catch ( const std::exception& e ) {
    std::cerr << "fermichip: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kConfigError;
}
