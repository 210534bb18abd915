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

#include "fermichip/fermichip.h"

#include "acceptance.hpp"
#include "density.hpp"
#include "dressing.hpp"
#include "error.hpp"
#include "evaporation.hpp"
#include "field.hpp"
#include "fit.hpp"
#include "json_out.hpp"
#include "polylog.hpp"
#include "thermo.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>

using namespace fermichip;
using nlohmann::json;

struct fc_species_registry {
  SpeciesRegistry reg;
};
struct fc_spin_state {
  SpinState s;
};
struct fc_gas {
  TrappedGasState g;
};
struct fc_raster {
  Raster r;
};
struct fc_field {
  FieldConfig cfg;
};
struct fc_dressing {
  std::string name;
  RFField rf;
  double connect_omega = 0.0;
  ScanAxis axis;
  std::vector<SpeciesDressing> runs;
  std::vector<std::optional<ResonanceShell>> shells;
};
struct fc_image {
  TofImage img;
};
struct fc_fit {
  FitResult f;
};

namespace {

  thread_local std::string g_last_error;

  fc_status to_status( ErrorCode c ) { return static_cast<fc_status>(static_cast<int>(c)); }

  template <class F>
  fc_status guarded( F&& f )
  {
    try {
      f();
      g_last_error.clear();
      return FC_OK;
    } catch ( const Error& e ) {
      g_last_error = e.what();
      return to_status(e.code());
    } catch ( const std::bad_alloc& ) {
      g_last_error = "out of memory";
      return FC_ERR_INTERNAL;
    } catch ( const std::exception& e ) {
      g_last_error = e.what();
      return FC_ERR_INTERNAL;
    } catch ( ... ) {
      g_last_error = "unknown exception";
      return FC_ERR_INTERNAL;
    }
  }

  template <class... P>
  void need( const P*... p )
  {
    require(((p != nullptr) && ...), ErrorCode::InvalidArgument, "null pointer argument");
  }

  char* dup( const std::string& s )
  {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
      throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
  }

  HarmonicTrap trap_of( fc_trap t )
  {
    HarmonicTrap h;
    h.omega_x = t.omega_x;
    h.omega_y = t.omega_y;
    h.omega_z = t.omega_z;
    validate(h);
    return h;
  }

  Vec3 vec( const double* p ) { return Vec3(p[0], p[1], p[2]); }
  void put( const Vec3& v, double* p )
  {
    for (int i = 0; i < 3; ++i)
      p[i] = v[i];
  }

  json arr3( const Vec3& v, double scale = 1.0 ) { return json::array({ v[0] / scale, v[1] / scale, v[2] / scale }); }

  double hz( double energy ) { return units::energy_to_hz(energy); }

  int topology_code( const SpeciesDressing& d )
  {
    if (!d.wells)
      return 0;
    return d.wells->topology == WellTopology::Double ? 2 : 1;
  }


}

extern "C" {

FC_API const char* fc_version( void ) { return "1.0.0"; }

FC_API const char* fc_status_name( fc_status s )
{
  switch (s) {
  case FC_OK: return "ok";
  case FC_ERR_DOMAIN: return "domain error";
  case FC_ERR_CONVERGENCE: return "convergence failure";
  case FC_ERR_INVALID_ARGUMENT: return "invalid argument";
  case FC_ERR_IO: return "i/o error";
  case FC_ERR_PARSE: return "parse error";
  case FC_ERR_NOT_A_TRAP: return "not a trap";
  case FC_ERR_RWA_VIOLATION: return "RWA violation";
  case FC_ERR_AMBIGUOUS: return "ambiguous";
  case FC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

FC_API const char* fc_last_error( void ) { return g_last_error.c_str(); }

FC_API void fc_string_free( char* s ) { std::free(s); }

// ---- species ----

FC_API fc_status fc_species_builtin( fc_species_registry** out )
{
  return guarded([&] {
    need(out);
    *out = new fc_species_registry{ builtin_species() };
  });
}

FC_API fc_status fc_species_load( const char* path, fc_species_registry** out )
{
  return guarded([&] {
    need(path, out);
    *out = new fc_species_registry{ SpeciesRegistry::load(path) };
  });
}

FC_API void fc_species_free( fc_species_registry* r ) { delete r; }

FC_API fc_status fc_spin_state_create( const fc_species_registry* r, const char* species, int twice_m_F,
                                       fc_spin_state** out )
{
  return guarded([&] {
    need(r, species, out);
    *out = new fc_spin_state{ r->reg.state(species, HalfInt::from_twice(twice_m_F)) };
  });
}

FC_API fc_status fc_spin_state_stretched( const fc_species_registry* r, const char* species, fc_spin_state** out )
{
  return guarded([&] {
    need(r, species, out);
    *out = new fc_spin_state{ r->reg.stretched(species) };
  });
}

FC_API void fc_spin_state_free( fc_spin_state* s ) { delete s; }

FC_API fc_status fc_spin_state_info( const fc_spin_state* s, fc_spin_info* out )
{
  return guarded([&] {
    need(s, out);
    const auto& st = s->s;
    *out = fc_spin_info{};
    out->mass = st.mass();
    out->twice_F = st.F.twice();
    out->twice_m_F = st.m_F.twice();
    out->g_F_num = st.g_F.num;
    out->g_F_den = st.g_F.den;
    out->magnetic_moment = magnetic_moment(st);
    out->trappable = st.trappable() ? 1 : 0;
    out->has_scattering_length = st.species.s_wave_scattering_length ? 1 : 0;
    out->scattering_length = st.species.s_wave_scattering_length.value_or(0.0);
  });
}

FC_API fc_status fc_spin_state_label( const fc_spin_state* s, char** out )
{
  return guarded([&] {
    need(s, out);
    *out = dup(s->s.label());
  });
}

// ---- special functions ----

FC_API fc_status fc_fermi_fn( double n, double z, double* out )
{
  return guarded([&] {
    need(out);
    *out = polylog::fermi_fn(n, z);
  });
}

FC_API fc_status fc_fermi_fn_log( double n, double log_z, double* out )
{
  return guarded([&] {
    need(out);
    *out = polylog::fermi_fn_log(n, log_z);
  });
}

FC_API fc_status fc_bose_fn( double n, double z, double* out )
{
  return guarded([&] {
    need(out);
    *out = polylog::bose_fn(n, z);
  });
}

// ---- thermodynamics ----

FC_API fc_status fc_log_fugacity_from_reduced_temperature( double t, double* log_z )
{
  return guarded([&] {
    need(log_z);
    *log_z = log_fugacity_from_reduced_temperature(t);
  });
}

FC_API fc_status fc_reduced_temperature_from_log_fugacity( double log_z, double* t )
{
  return guarded([&] {
    need(t);
    *t = reduced_temperature_from_log_fugacity(log_z);
  });
}

FC_API fc_status fc_chemical_potential_approx( double t, fc_mu_regime regime, double* out )
{
  return guarded([&] {
    need(out);
    require(regime == FC_MU_LOW || regime == FC_MU_HIGH, ErrorCode::InvalidArgument, "unknown regime");
    *out = chemical_potential_approx(t, regime == FC_MU_LOW ? MuRegime::Low : MuRegime::High);
  });
}

FC_API fc_status fc_chemical_potential_exact( double t, double* out )
{
  return guarded([&] {
    need(out);
    *out = chemical_potential_exact(t);
  });
}

FC_API fc_status fc_fermi_energy( double N, fc_trap trap, double* out )
{
  return guarded([&] {
    need(out);
    *out = fermi_energy(N, trap_of(trap));
  });
}

FC_API fc_status fc_discrete_sums( fc_trap trap, double mu, double T, long cutoff, int ground_state_origin, double* N,
                                   double* E )
{
  return guarded([&] {
    need(N, E);
    const auto h = trap_of(trap);
    const auto origin = ground_state_origin ? EnergyOrigin::GroundState : EnergyOrigin::PotentialMinimum;
    if (cutoff <= 0)
      cutoff = discrete_sum_cutoff(h, mu, T, origin);
    const auto s = discrete_sum_oracle(h, mu, T, cutoff, origin);
    *N = s.N;
    *E = s.E;
  });
}

FC_API fc_status fc_capacity_1d( fc_trap trap, double* ratio, long* whole )
{
  return guarded([&] {
    need(ratio);
    const auto c = capacity_1d(trap_of(trap));
    *ratio = c.ratio;
    if (whole)
      *whole = c.whole_atoms;
  });
}

FC_API fc_status fc_gas_create( const fc_spin_state* s, fc_trap trap, double N, double T, fc_gas** out )
{
  return guarded([&] {
    need(s, out);
    *out = new fc_gas{ TrappedGasState::make(s->s, trap_of(trap), N, T) };
  });
}

FC_API fc_status fc_gas_from_reduced_temperature( const fc_spin_state* s, fc_trap trap, double N, double t,
                                                  fc_gas** out )
{
  return guarded([&] {
    need(s, out);
    *out = new fc_gas{ TrappedGasState::from_reduced_temperature(s->s, trap_of(trap), N, t) };
  });
}

FC_API void fc_gas_free( fc_gas* g ) { delete g; }

FC_API fc_status fc_gas_summary_get( const fc_gas* gas, fc_gas_summary* out )
{
  return guarded([&] {
    need(gas, out);
    const auto& g = gas->g;
    *out = fc_gas_summary{};
    out->N = g.N();
    out->T = g.T();
    out->log_z = g.log_z();
    out->E_F = g.E_F();
    out->T_F = g.T_F();
    out->t_over_tf = g.reduced_temperature();
    out->mu = g.mu();
    out->energy_per_particle = energy_per_particle(g);
    out->degeneracy = degeneracy_parameter(g);
    out->thermal_wavelength = g.thermal_wavelength();
    out->peak_density = density_finite_T(g, { 0.0, 0.0, 0.0 });
    const auto tf = thomas_fermi_extent(g);
    out->tf_radius[0] = tf.X;
    out->tf_radius[1] = tf.Y;
    out->tf_radius[2] = tf.Z;
  });
}

FC_API fc_status fc_gas_json( const fc_gas* gas, char** out )
{
  return guarded([&] {
    need(gas, out);
    const auto& g = gas->g;
    const auto& tr = g.trap();
    const auto tf = thomas_fermi_extent(g);
    const double epn = energy_per_particle(g);
    json j;
    j["state"] = g.spin().label();
    j["N"] = g.N();
    j["trap_hz"] = json::array({ units::angular_to_hz(tr.omega_x), units::angular_to_hz(tr.omega_y),
                                 units::angular_to_hz(tr.omega_z) });
    j["omega_bar_hz"] = units::angular_to_hz(tr.omega_bar());
    j["T_K"] = g.T();
    j["T_over_TF"] = g.reduced_temperature();
    j["E_F_J"] = g.E_F();
    j["T_F_K"] = g.T_F();
    j["log_Z"] = g.log_z();
    j["Z"] = g.fugacity();
    j["mu_J"] = g.mu();
    j["mu_over_EF"] = g.mu() / g.E_F();
    j["E_per_N_J"] = epn;
    j["E_per_N_over_EF"] = epn / g.E_F();
    j["E_per_N_over_3kT"] = epn / (3.0 * constants.k_B * g.T());
    j["n0_lambda3"] = degeneracy_parameter(g);
    j["peak_density_m3"] = density_finite_T(g, { 0.0, 0.0, 0.0 });
    j["thermal_wavelength_m"] = g.thermal_wavelength();
    j["thomas_fermi_radius_m"] = json::array({ tf.X, tf.Y, tf.Z });
    *out = dup(dump17(j));
  });
}

FC_API fc_status fc_thermo_scan_csv( const double* t, size_t n, unsigned jobs, char** out )
{
  return guarded([&] {
    need(t, out);
    std::ostringstream os;
    write_thermo_scan_csv(os, thermo_scan(std::vector<double>(t, t + n), jobs));
    *out = dup(os.str());
  });
}

// ---- densities ----

FC_API fc_status fc_density_finite_t( const fc_gas* g, const double r[3], double* out )
{
  return guarded([&] {
    need(g, r, out);
    *out = density_finite_T(g->g, { r[0], r[1], r[2] });
  });
}

FC_API fc_status fc_density_zero_t( const fc_gas* g, const double r[3], double* out )
{
  return guarded([&] {
    need(g, r, out);
    *out = density_zero_T(g->g, { r[0], r[1], r[2] });
  });
}

FC_API fc_status fc_uniform_density_zero_t( double E_F, double mass, double* out )
{
  return guarded([&] {
    need(out);
    *out = uniform_density_zero_T(E_F, mass);
  });
}

FC_API fc_status fc_tof_rescale( fc_trap trap, double t, fc_trap* rescaled, double* normalization )
{
  return guarded([&] {
    need(rescaled);
    const auto s = tof_rescale(trap_of(trap), t);
    *rescaled = fc_trap{ s.omega[0], s.omega[1], s.omega[2] };
    if (normalization)
      *normalization = s.normalization;
  });
}

FC_API fc_status fc_column_density( const fc_gas* gas, double t, double x, double y, int boltzmann, double* out )
{
  return guarded([&] {
    need(gas, out);
    const auto& g = gas->g;
    *out = boltzmann ? column_density_boltzmann(g.N(), g.T(), g.trap(), g.mass(), t, x, y)
                     : column_density_fermi(g, t, x, y);
  });
}

FC_API fc_status fc_column_profile( const fc_gas* gas, double t, uint32_t n, double span, int boltzmann,
                                    unsigned jobs, fc_raster** out )
{
  return guarded([&] {
    need(gas, out);
    require(n >= 2 && span > 0.0, ErrorCode::InvalidArgument, "profile needs n >= 2 and span > 0");
    const auto grid = column_grid(gas->g, t, n, span);
    *out = new fc_raster{ column_profile(gas->g, t, grid, boltzmann ? ProfileModel::Boltzmann : ProfileModel::Fermi,
                                         jobs) };
  });
}

FC_API fc_status fc_raster_get_info( const fc_raster* r, fc_raster_info* out )
{
  return guarded([&] {
    need(r, out);
    *out = fc_raster_info{ r->r.grid.nx, r->r.grid.ny, r->r.grid.pitch_x, r->r.grid.pitch_y };
  });
}

FC_API const double* fc_raster_values( const fc_raster* r ) { return r ? r->r.values.data() : nullptr; }

FC_API fc_status fc_raster_integral( const fc_raster* r, double* out )
{
  return guarded([&] {
    need(r, out);
    *out = r->r.integral();
  });
}

FC_API fc_status fc_raster_write_binary( const fc_raster* r, const char* path )
{
  return guarded([&] {
    need(r, path);
    write_raster_binary(std::string(path), r->r);
  });
}

FC_API fc_status fc_raster_read_binary( const char* path, fc_raster** out )
{
  return guarded([&] {
    need(path, out);
    *out = new fc_raster{ read_raster_binary(std::string(path)) };
  });
}

FC_API fc_status fc_raster_write_csv( const fc_raster* r, const char* path )
{
  return guarded([&] {
    need(r, path);
    std::ofstream os(path);
    require(bool(os), ErrorCode::Io, std::string("cannot write ") + path);
    write_raster_csv(os, r->r);
    require(bool(os), ErrorCode::Io, std::string("write failed: ") + path);
  });
}

FC_API void fc_raster_free( fc_raster* r ) { delete r; }

// ---- magnetic traps ----

FC_API fc_status fc_field_load( const char* path, fc_field** out )
{
  return guarded([&] {
    need(path, out);
    *out = new fc_field{ load_field_config(path) };
  });
}

FC_API fc_status fc_field_from_json( const char* text, fc_field** out )
{
  return guarded([&] {
    need(text, out);
    *out = new fc_field{ field_config_from_json_text(text) };
  });
}

FC_API fc_status fc_field_ioffe_pritchard( double B0, double gradient, double curvature, fc_field** out )
{
  return guarded([&] {
    need(out);
    require(B0 > 0.0 && gradient >= 0.0 && curvature >= 0.0, ErrorCode::Domain,
            "IP model needs B0 > 0, B' >= 0, B'' >= 0");
    IPTrapParams p;
    p.B0 = B0;
    p.gradient = gradient;
    p.curvature = curvature;
    FieldConfig cfg;
    cfg.name = "ioffe-pritchard";
    cfg.field = std::make_shared<IoffePritchardField>(p);
    cfg.seed = Vec3::Zero();
    *out = new fc_field{ std::move(cfg) };
  });
}

FC_API void fc_field_free( fc_field* f ) { delete f; }

FC_API fc_status fc_field_at( const fc_field* f, const double r[3], double B[3] )
{
  return guarded([&] {
    need(f, r, B);
    put(f->cfg.field->field(vec(r)), B);
  });
}

FC_API fc_status fc_ip_gradient_from_frequency( const fc_spin_state* s, double B0, double omega, double* out )
{
  return guarded([&] {
    need(s, out);
    *out = ip_gradient_from_frequency(s->s, B0, omega);
  });
}

namespace {

  struct TrapAnalysis {
    MinimumResult min;
    TrapFrequencies freq;
    DepthResult depth;
    std::optional<IPFitResult> ip;
    std::string ip_error;
  };

  TrapAnalysis analyze( const fc_field* f, const fc_spin_state* s, const double* seed )
  {
    const auto& cfg = f->cfg;
    const Vec3 start = seed ? vec(seed) : cfg.seed.value_or(Vec3::Zero());
    TrapAnalysis a;
    a.min = find_potential_minimum(*cfg.field, s->s, cfg.options, start);
    a.freq = trap_frequencies(*cfg.field, s->s, cfg.options, a.min.position);
    a.depth = trap_depth(*cfg.field, s->s, cfg.options, a.min.position);
    try {
      a.ip = ip_fit(*cfg.field, a.min.position);
    } catch ( const Error& e ) {
      a.ip_error = e.what();
    }
    return a;
  }

}

FC_API fc_status fc_field_analyze( const fc_field* f, const fc_spin_state* s, const double* seed, fc_trap_report* out )
{
  return guarded([&] {
    need(f, s, out);
    const auto a = analyze(f, s, seed);
    *out = fc_trap_report{};
    put(a.min.position, out->position);
    out->B0 = f->cfg.field->field(a.min.position).norm();
    out->zero_field = a.min.zero_field ? 1 : 0;
    for (int i = 0; i < 3; ++i)
      out->omega[i] = a.freq.omega_lab[i];
    out->depth = a.depth.depth;
    put(a.depth.direction, out->depth_direction);
    if (a.ip) {
      out->has_ip = 1;
      out->ip_B0 = a.ip->params.B0;
      out->ip_gradient = a.ip->params.gradient;
      out->ip_curvature = a.ip->params.curvature;
      out->ip_residual = a.ip->residual_rms;
    }
  });
}

FC_API fc_status fc_trap_report_json( const fc_field* f, const fc_spin_state* s, const double* seed, char** out )
{
  return guarded([&] {
    need(f, s, out);
    const auto a = analyze(f, s, seed);
    const double um = units::micrometre;
    json j;
    j["geometry"] = f->cfg.name;
    j["calibrated"] = f->cfg.calibrated;
    if (!f->cfg.note.empty())
      j["note"] = f->cfg.note;
    j["state"] = s->s.label();
    j["minimum_um"] = arr3(a.min.position, um);
    j["B0_G"] = f->cfg.field->field(a.min.position).norm() / units::gauss;
    j["zero_field"] = a.min.zero_field;
    j["gradient_norm_T_per_m"] = a.min.gradient_norm;
    j["frequencies_hz"] = arr3(a.freq.omega_lab, kTwoPi);
    j["depth_J"] = a.depth.depth;
    j["depth_mK"] = a.depth.temperature_equivalent / units::millikelvin;
    j["depth_direction"] = arr3(a.depth.direction);
    j["barrier_distance_um"] = a.depth.barrier_distance / um;
    j["rays"] = a.depth.rays;
    json excl = json::array();
    for (const auto& e : a.depth.excluded)
      excl.push_back({ { "direction", arr3(e.direction) }, { "reason", e.reason } });
    j["excluded_rays"] = excl;
    if (a.ip) {
      j["ioffe_pritchard"] = { { "B0_G", a.ip->params.B0 / units::gauss },
                               { "gradient_G_per_cm", a.ip->params.gradient / units::gauss_per_cm },
                               { "curvature_G_per_cm2", a.ip->params.curvature / units::gauss_per_cm2 },
                               { "residual_rms_over_B0", a.ip->residual_rms },
                               { "poor_fit", a.ip->poor_fit },
                               { "transverse_trapping", a.ip->transverse_trapping } };
    } else {
      j["ioffe_pritchard"] = nullptr;
      j["ioffe_pritchard_error"] = a.ip_error;
    }
    *out = dup(dump17(j));
  });
}

// ---- RF dressing ----

namespace {

  RFField rf_of( const fc_rf_setup& s )
  {
    RFField rf;
    rf.amplitude = s.amplitude;
    rf.omega = s.omega;
    rf.polarization = vec(s.polarization);
    validate(rf);
    return rf;
  }

  ScanAxis axis_of( const fc_rf_setup& s )
  {
    ScanAxis a;
    a.origin = vec(s.axis_origin);
    a.direction = vec(s.axis_direction);
    require(a.direction.norm() > 0.0, ErrorCode::InvalidArgument, "scan direction must be non-zero");
    a.direction.normalize();
    a.s_min = s.s_min;
    a.s_max = s.s_max;
    a.samples = std::size_t(s.samples);
    require(a.s_max > a.s_min && a.samples >= 3, ErrorCode::InvalidArgument, "scan needs s_max > s_min, >= 3 samples");
    return a;
  }

  fc_dressing* dress( const MagneticField& field, const std::string& name, const RFField& rf, double connect,
                      const ScanAxis& axis, const std::vector<SpinState>& states, unsigned jobs )
  {
    auto d = std::make_unique<fc_dressing>();
    d->name = name;
    d->rf = rf;
    d->connect_omega = connect;
    d->axis = axis;
    d->runs = run_dressing(field, rf, connect, states, axis, jobs);
    // The resonance shell can sit outside the scan window; look further out.
    ScanAxis wide = axis;
    wide.s_min = 0.0;
    wide.s_max = 10.0 * std::max(std::abs(axis.s_min), std::abs(axis.s_max));
    for (const auto& st : states) {
      try {
        d->shells.push_back(resonance_shell(field, rf, st, wide));
      } catch ( const Error& e ) {
        if (e.code() != ErrorCode::Domain)
          throw;
        d->shells.push_back(std::nullopt);
      }
    }
    return d.release();
  }

}

FC_API fc_status fc_dress_scenario_setup( const char* name, fc_rf_setup* rf, double* B0, double* gradient,
                                          double* curvature )
{
  return guarded([&] {
    need(name, rf);
    const auto sc = dressing_scenario(name);
    *rf = fc_rf_setup{};
    rf->amplitude = sc.rf.amplitude;
    rf->omega = sc.rf.omega;
    rf->connect_omega = sc.connect_omega;
    put(sc.rf.polarization, rf->polarization);
    put(sc.axis.origin, rf->axis_origin);
    put(sc.axis.direction, rf->axis_direction);
    rf->s_min = sc.axis.s_min;
    rf->s_max = sc.axis.s_max;
    rf->samples = sc.axis.samples;
    if (B0)
      *B0 = sc.trap.B0;
    if (gradient)
      *gradient = sc.trap.gradient;
    if (curvature)
      *curvature = sc.trap.curvature;
  });
}

FC_API fc_status fc_dress_scenario( const char* name, unsigned jobs, fc_dressing** out )
{
  return guarded([&] {
    need(name, out);
    const auto sc = dressing_scenario(name);
    const IoffePritchardField field(sc.trap);
    const auto& reg = builtin_species();
    *out = dress(field, sc.name, sc.rf, sc.connect_omega, sc.axis, { reg.stretched("Rb87"), reg.stretched("K40") },
                 jobs);
  });
}

FC_API fc_status fc_dress_run( const fc_field* f, const fc_rf_setup* setup, const fc_spin_state* const* states,
                               size_t n, unsigned jobs, fc_dressing** out )
{
  return guarded([&] {
    need(f, setup, states, out);
    require(n >= 1, ErrorCode::InvalidArgument, "need at least one spin state");
    std::vector<SpinState> st;
    for (size_t i = 0; i < n; ++i) {
      need(states[i]);
      st.push_back(states[i]->s);
    }
    require(setup->connect_omega > 0.0, ErrorCode::Domain, "connect frequency must be > 0");
    *out = dress(*f->cfg.field, f->cfg.name, rf_of(*setup), setup->connect_omega, axis_of(*setup), st, jobs);
  });
}

FC_API void fc_dressing_free( fc_dressing* d ) { delete d; }

FC_API fc_status fc_dressing_count( const fc_dressing* d, size_t* n )
{
  return guarded([&] {
    need(d, n);
    *n = d->runs.size();
  });
}

FC_API fc_status fc_dressing_summary_get( const fc_dressing* d, size_t i, fc_dressing_summary* out )
{
  return guarded([&] {
    need(d, out);
    require(i < d->runs.size(), ErrorCode::InvalidArgument, "dressing index out of range");
    const auto& r = d->runs[i];
    *out = fc_dressing_summary{};
    out->twice_m_F_prime = r.m_F_prime.twice();
    out->delta_connect = r.at_connect.delta;
    out->delta_origin = r.at_origin.delta;
    out->omega_origin = r.at_origin.Omega;
    out->topology = topology_code(r);
    if (r.wells) {
      out->separation = r.wells->separation;
      out->barrier = r.wells->barrier;
    }
    out->rwa_warning = r.scan.rwa_warning ? 1 : 0;
  });
}

FC_API fc_status fc_dressing_scan_csv( const fc_dressing* d, size_t i, char** out )
{
  return guarded([&] {
    need(d, out);
    require(i < d->runs.size(), ErrorCode::InvalidArgument, "dressing index out of range");
    std::ostringstream os;
    write_scan_csv(os, d->runs[i].scan);
    *out = dup(os.str());
  });
}

FC_API fc_status fc_dressing_report_json( const fc_dressing* d, char** out )
{
  return guarded([&] {
    need(d, out);
    const double um = units::micrometre;
    json j;
    j["scenario"] = d->name;
    j["rf"] = { { "amplitude_mG", d->rf.amplitude / units::milligauss },
                { "frequency_hz", units::angular_to_hz(d->rf.omega) },
                { "connect_frequency_hz", units::angular_to_hz(d->connect_omega) },
                { "polarization", arr3(d->rf.polarization) } };
    j["axis"] = { { "origin_um", arr3(d->axis.origin, um) }, { "direction", arr3(d->axis.direction) },
                  { "s_min_um", d->axis.s_min / um }, { "s_max_um", d->axis.s_max / um },
                  { "samples", d->axis.samples } };
    json species = json::array();
    for (std::size_t i = 0; i < d->runs.size(); ++i) {
      const auto& r = d->runs[i];
      json s;
      s["state"] = r.state.label();
      s["m_F_prime"] = r.m_F_prime.str();
      s["delta_connect_hz"] = hz(r.at_connect.delta);
      s["delta_origin_hz"] = hz(r.at_origin.delta);
      s["omega_origin_hz"] = hz(r.at_origin.Omega);
      s["min_B_dc_G"] = r.scan.min_B_dc / units::gauss;
      s["rwa_warning"] = r.scan.rwa_warning;
      if (r.wells) {
        const auto& w = *r.wells;
        json wells = json::array();
        for (double x : w.wells)
          wells.push_back(x / um);
        json rep = json::array();
        for (double o : w.level_repulsion)
          rep.push_back(hz(o));
        s["topology"] = to_string(w.topology);
        s["wells_um"] = wells;
        s["separation_um"] = w.separation / um;
        s["barrier_hz"] = hz(w.barrier);
        s["saddle_um"] = w.saddle ? json(*w.saddle / um) : json(nullptr);
        s["level_repulsion_hz"] = rep;
      } else {
        s["topology"] = "ambiguous";
        s["wells_error"] = r.wells_error;
      }
      if (d->shells[i]) {
        s["resonance_shell"] = { { "s_um", d->shells[i]->s / um },
                                 { "energy_uK", d->shells[i]->energy / constants.k_B / units::microkelvin },
                                 { "energy_hz", hz(d->shells[i]->energy) } };
      } else {
        s["resonance_shell"] = nullptr;
      }
      species.push_back(s);
    }
    j["species"] = species;
    *out = dup(dump17(j));
  });
}

FC_API fc_status fc_rf_knife_depth( const fc_spin_state* s, double B0, double omega_rf, double* depth, int* engaged )
{
  return guarded([&] {
    need(s, depth);
    const auto k = rf_knife_depth(s->s, B0, omega_rf);
    *depth = k.depth;
    if (engaged)
      *engaged = k.engaged ? 1 : 0;
  });
}

FC_API fc_status fc_eta_relation( const fc_spin_state* K, const fc_spin_state* Rb, double eta_Rb, double B0, double T,
                                  double* out )
{
  return guarded([&] {
    need(K, Rb, out);
    *out = eta_relation(K->s, Rb->s, eta_Rb, B0, T);
  });
}

FC_API fc_status fc_eta_min_over_sublevels( const fc_spin_state* K, const fc_spin_state* Rb, double eta_Rb, double B0,
                                            double T, double* eta, int* twice_m_F )
{
  return guarded([&] {
    need(K, Rb, eta);
    const auto m = eta_min_over_sublevels(K->s, Rb->s, eta_Rb, B0, T);
    *eta = m.eta;
    if (twice_m_F)
      *twice_m_F = m.m_F.twice();
  });
}

FC_API fc_status fc_k_only_evaporation_depth( const fc_spin_state* K, const fc_spin_state* Rb, double B0, double* out )
{
  return guarded([&] {
    need(K, Rb, out);
    *out = k_only_evaporation_depth(K->s, Rb->s, B0);
  });
}

// ---- evaporation ----

namespace {

  EffectiveVolumeModel model_of( const fc_volume_model& m )
  {
    EffectiveVolumeModel e;
    switch (m.kind) {
    case FC_VOLUME_SHO: e.kind = EffectiveVolumeModel::Kind::SHO; break;
    case FC_VOLUME_QUADRUPOLE: e.kind = EffectiveVolumeModel::Kind::Quadrupole3D; break;
    case FC_VOLUME_BOX: e.kind = EffectiveVolumeModel::Kind::Box; break;
    case FC_VOLUME_QUAD2D_BOX: e.kind = EffectiveVolumeModel::Kind::Quad2DBox; break;
    default: fail(ErrorCode::InvalidArgument, "unknown volume model kind");
    }
    e.omega_bar = m.omega_bar;
    e.mean_gradient = m.mean_gradient;
    e.side = m.side;
    e.mass = m.mass;
    return e;
  }

}

FC_API fc_status fc_effective_volume( const fc_volume_model* m, double T, double* out )
{
  return guarded([&] {
    need(m, out);
    *out = effective_volume(model_of(*m), T);
  });
}

FC_API fc_status fc_max_loadable_atoms( const fc_volume_model* m, double rho0, double depth, double eta, double mass,
                                        double* out )
{
  return guarded([&] {
    need(m, out);
    *out = max_loadable_atoms(LoadingBudget{ rho0, depth, eta, mass }, model_of(*m));
  });
}

FC_API fc_status fc_collision_rate( double mass, double rho0, double T, double sigma, double* out )
{
  return guarded([&] {
    need(out);
    *out = collision_rate(mass, rho0, T, sigma);
  });
}

FC_API fc_status fc_min_start_temperature( double mass, double rho0, double gamma_min, double a_s, double* out )
{
  return guarded([&] {
    need(out);
    *out = min_start_temperature(mass, rho0, gamma_min, a_s);
  });
}

FC_API fc_status fc_sigma_swave( double a, double k, double* out )
{
  return guarded([&] {
    need(out);
    *out = sigma_swave(a, k);
  });
}

FC_API fc_status fc_current_scaling_exponent( double bias_exponent, double axial_exponent, double* out )
{
  return guarded([&] {
    need(out);
    auto f = paper_current_family();
    f.bias_exponent = bias_exponent;
    f.axial_exponent = axial_exponent;
    *out = current_scaling_exponent(f, builtin_species().stretched("Rb87"));
  });
}

FC_API fc_status fc_evap_preset_json( const char* name, char** out )
{
  return guarded([&] {
    need(out);
    if (!name) {
      *out = dup(dump17(json(evaporation_preset_names())));
      return;
    }
    const auto p = evaporation_preset(name);
    const auto r = evaluate(p);
    json j;
    j["preset"] = p.name;
    j["description"] = p.description;
    j["state"] = p.state.label();
    j["volume_model"] = to_string(p.model.kind);
    j["volume_exponent"] = volume_exponent(p.model.kind);
    j["rho0"] = p.budget.rho0;
    j["eta"] = p.budget.eta;
    j["depth_mK"] = p.budget.depth / constants.k_B / units::millikelvin;
    j["T_load_uK"] = r.T / units::microkelvin;
    j["V_eff_um3"] = r.V_eff / units::cubic_micrometre;
    j["N_max"] = r.N_max;
    if (r.has_scattering_length) {
      j["gamma_min_per_s"] = p.gamma_min;
      j["T_min_uK"] = r.T_min / units::microkelvin;
      j["gamma_coll_per_s"] = r.gamma_coll;
    } else {
      j["T_min_uK"] = nullptr;
      j["gamma_coll_per_s"] = nullptr;
    }
    *out = dup(dump17(j));
  });
}

// ---- fits ----

FC_API fc_status fc_image_synthesize( const fc_gas* gas, double t, uint32_t n, double noise_fraction, uint64_t seed,
                                      fc_image** out )
{
  return guarded([&] {
    need(gas, out);
    require(noise_fraction >= 0.0, ErrorCode::Domain, "noise fraction must be >= 0");
    const auto grid = fit_window(gas->g, t, n ? n : 128);
    const double peak = column_density_fermi(gas->g, t, 0.0, 0.0);
    *out = new fc_image{ synthesize_tof_image(gas->g, t, grid, noise_fraction * peak, seed) };
  });
}

FC_API fc_status fc_image_from_raster( const fc_raster* r, double noise_rms, fc_image** out )
{
  return guarded([&] {
    need(r, out);
    TofImage img;
    img.raster = r->r;
    img.noise_rms = noise_rms;
    validate(img);
    *out = new fc_image{ std::move(img) };
  });
}

FC_API fc_status fc_image_set_context( fc_image* img, fc_trap trap, double mass, double t )
{
  return guarded([&] {
    need(img);
    require(mass > 0.0 && t >= 0.0, ErrorCode::Domain, "context needs M > 0 and t >= 0");
    img->img.context = ImageContext{ trap_of(trap), mass, t };
  });
}

FC_API fc_status fc_image_raster( const fc_image* img, fc_raster** out )
{
  return guarded([&] {
    need(img, out);
    *out = new fc_raster{ img->img.raster };
  });
}

FC_API void fc_image_free( fc_image* img ) { delete img; }

FC_API fc_status fc_fit_run( const fc_image* img, fc_fit_model model, int numeric_jacobian, fc_fit** out )
{
  return guarded([&] {
    need(img, out);
    require(model == FC_FIT_GAUSSIAN || model == FC_FIT_FERMI_DIRAC, ErrorCode::InvalidArgument, "unknown fit model");
    FitOptions opt;
    opt.numeric_jacobian = numeric_jacobian != 0;
    *out = new fc_fit{ fit(img->img, model == FC_FIT_FERMI_DIRAC ? FitModel::FermiDirac : FitModel::Gaussian, opt) };
  });
}

FC_API fc_status fc_fit_summary_get( const fc_fit* f, fc_fit_summary* out )
{
  return guarded([&] {
    need(f, out);
    const auto& r = f->f;
    *out = fc_fit_summary{};
    out->model = r.model == FitModel::FermiDirac ? FC_FIT_FERMI_DIRAC : FC_FIT_GAUSSIAN;
    out->N = r.N;
    out->r_x = r.r_x;
    out->r_y = r.r_y;
    out->x0 = r.x0;
    out->y0 = r.y0;
    out->has_log_z = r.log_z ? 1 : 0;
    out->log_z = r.log_z.value_or(0.0);
    out->log_z_sigma = r.log_z_sigma.value_or(0.0);
    out->t_over_tf = r.t_over_tf.value_or(0.0);
    out->chi2 = r.chi2;
    out->reduced_chi2 = r.reduced_chi2;
    out->dof = r.dof;
    out->z_poorly_constrained = r.z_poorly_constrained ? 1 : 0;
    out->z_at_bound = (r.z_at_lower_bound || r.z_at_upper_bound) ? 1 : 0;
  });
}

FC_API fc_status fc_fit_json( const fc_fit* f, char** out )
{
  return guarded([&] {
    need(f, out);
    const auto& r = f->f;
    json j;
    j["model"] = to_string(r.model);
    j["N"] = r.N;
    j["r_x_m"] = r.r_x;
    j["r_y_m"] = r.r_y;
    j["x0_m"] = r.x0;
    j["y0_m"] = r.y0;
    if (r.log_z) {
      j["log_Z"] = *r.log_z;
      j["log_Z_sigma"] = r.log_z_sigma.value_or(0.0);
      j["T_over_TF"] = r.t_over_tf.value_or(0.0);
      j["z_poorly_constrained"] = r.z_poorly_constrained;
      j["z_at_lower_bound"] = r.z_at_lower_bound;
      j["z_at_upper_bound"] = r.z_at_upper_bound;
    }
    j["chi2"] = r.chi2;
    j["reduced_chi2"] = r.reduced_chi2;
    j["dof"] = r.dof;
    j["converged"] = r.converged;
    j["gradient_cosine"] = r.gradient_cosine;
    j["evaluations"] = r.evaluations;
    j["best_start"] = r.best_start;
    json cov = json::array();
    for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < r.covariance.cols(); ++k)
        row.push_back(r.covariance(i, k));
      cov.push_back(row);
    }
    j["parameters"] = r.model == FitModel::FermiDirac
                        ? json::array({ "ln N", "ln r_x", "ln r_y", "x0", "y0", "ln Z" })
                        : json::array({ "ln N", "ln r_x", "ln r_y", "x0", "y0" });
    j["covariance"] = cov;
    *out = dup(dump17(j));
  });
}

FC_API fc_status fc_fit_residual( const fc_fit* f, const fc_image* img, fc_raster** out )
{
  return guarded([&] {
    need(f, img, out);
    *out = new fc_raster{ residual_image(img->img, f->f) };
  });
}

FC_API void fc_fit_free( fc_fit* f ) { delete f; }

FC_API fc_status fc_apparent_temperature( const fc_fit* gauss, const fc_image* img, double* out )
{
  return guarded([&] {
    need(gauss, img, out);
    require(img->img.context.has_value(), ErrorCode::InvalidArgument, "image has no trap / expansion-time context");
    *out = apparent_temperature(gauss->f, *img->img.context);
  });
}

FC_API fc_status fc_apparent_temperature_ratio( double t, double* out )
{
  return guarded([&] {
    need(out);
    *out = apparent_temperature_ratio(t);
  });
}

// ---- regression suite ----

FC_API fc_status fc_acceptance_criteria( int* ids, size_t capacity, size_t* count )
{
  return guarded([&] {
    need(count);
    const auto all = acceptance_criteria();
    *count = all.size();
    if (ids)
      for (size_t i = 0; i < std::min(capacity, all.size()); ++i)
        ids[i] = all[i];
  });
}

FC_API fc_status fc_acceptance_run_json( const int* ids, size_t n, unsigned jobs, char** out, int* all_pass )
{
  return guarded([&] {
    need(out);
    std::vector<int> sel = ids ? std::vector<int>(ids, ids + n) : acceptance_criteria();
    const auto known = acceptance_criteria();
    for (int id : sel)
      require(std::find(known.begin(), known.end(), id) != known.end(), ErrorCode::InvalidArgument,
              "unknown acceptance criterion " + std::to_string(id));
    const auto res = run_acceptance(sel, jobs);
    if (all_pass)
      *all_pass = std::all_of(res.begin(), res.end(), []( const CriterionResult& c ) { return c.pass(); }) ? 1 : 0;
    *out = dup(acceptance_to_json_text(res));
  });
}

}
