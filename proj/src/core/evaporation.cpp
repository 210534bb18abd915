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

#include "evaporation.hpp"
#include "error.hpp"

#include <cmath>

namespace fermichip {

  std::string to_string( EffectiveVolumeModel::Kind k )
  {
    switch (k) {
    case EffectiveVolumeModel::Kind::SHO: return "sho";
    case EffectiveVolumeModel::Kind::Quadrupole3D: return "quadrupole3d";
    case EffectiveVolumeModel::Kind::Box: return "box";
    case EffectiveVolumeModel::Kind::Quad2DBox: return "quad2d-box";
    }
    return "?";
  }

  double volume_exponent( EffectiveVolumeModel::Kind k )
  {
    switch (k) {
    case EffectiveVolumeModel::Kind::SHO: return 1.5;
    case EffectiveVolumeModel::Kind::Quadrupole3D: return 3.0;
    case EffectiveVolumeModel::Kind::Box: return 0.0;
    case EffectiveVolumeModel::Kind::Quad2DBox: return 2.0;
    }
    return 0.0;
  }

  void validate( const EffectiveVolumeModel& m )
  {
    using K = EffectiveVolumeModel::Kind;
    switch (m.kind) {
    case K::SHO:
      require(m.omega_bar > 0.0 && m.mass > 0.0, ErrorCode::Domain, "SHO volume needs wbar > 0 and M > 0");
      break;
    case K::Quadrupole3D:
      require(m.mean_gradient > 0.0, ErrorCode::Domain, "quadrupole volume needs a mean gradient > 0");
      break;
    case K::Box:
      require(m.side > 0.0, ErrorCode::Domain, "box volume needs L > 0");
      break;
    case K::Quad2DBox:
      require(m.mean_gradient > 0.0 && m.side > 0.0, ErrorCode::Domain,
              "hybrid volume needs a mean gradient > 0 and L > 0");
      break;
    }
  }

  double effective_volume( const EffectiveVolumeModel& m, double T )
  {
    validate(m);
    require(T > 0.0, ErrorCode::Domain, "effective volume needs T > 0");
    const double kT = constants.k_B * T;
    using K = EffectiveVolumeModel::Kind;
    switch (m.kind) {
    case K::SHO: return std::pow(kTwoPi * kT / (m.mass * m.omega_bar * m.omega_bar), 1.5);
    case K::Quadrupole3D: return 8.0 * kPi * std::pow(kT / m.mean_gradient, 3);
    case K::Box: return m.side * m.side * m.side;
    case K::Quad2DBox: return kTwoPi * m.side * std::pow(kT / m.mean_gradient, 2);
    }
    return 0.0;
  }

  double quadrupole_mean_gradient( const SpinState& s, double strong_gradient )
  {
    require(strong_gradient > 0.0, ErrorCode::Domain, "gradient must be > 0");
    return magnetic_moment(s) * strong_gradient / std::cbrt(4.0);
  }

  void validate( const LoadingBudget& b )
  {
    require(b.rho0 > 0.0, ErrorCode::Domain, "phase-space density must be > 0");
    require(b.depth > 0.0, ErrorCode::Domain, "trap depth must be > 0");
    require(b.eta >= 1.0, ErrorCode::Domain, "eta must be >= 1");
    require(b.mass > 0.0, ErrorCode::Domain, "mass must be > 0");
  }

  double loading_temperature( const LoadingBudget& b )
  {
    validate(b);
    return b.depth / (b.eta * constants.k_B);
  }

  double thermal_wavelength( double mass, double T )
  {
    require(mass > 0.0 && T > 0.0, ErrorCode::Domain, "thermal wavelength needs M > 0 and T > 0");
    return std::sqrt(kTwoPi * constants.hbar * constants.hbar / (mass * constants.k_B * T));
  }

  double max_loadable_atoms( const LoadingBudget& b, const EffectiveVolumeModel& m )
  {
    const double T = loading_temperature(b);
    const double lam = thermal_wavelength(b.mass, T);
    return b.rho0 * effective_volume(m, T) / (lam * lam * lam);
  }

  double family_max_atoms( const CurrentFamily& f, const SpinState& s, double I )
  {
    require(I > 0.0 && f.current_ref > 0.0, ErrorCode::Domain, "currents must be > 0");
    require(f.bias_ref > 0.0 && f.omega_z_ref > 0.0 && f.omega_perp_ref > 0.0, ErrorCode::Domain,
            "family reference values must be > 0");
    const double x = I / f.current_ref;
    const double r = f.radial_exponent.value_or(f.bias_exponent - 1.0);
    const double bias = f.bias_ref * std::pow(x, f.bias_exponent);
    const double wz = f.omega_z_ref * std::pow(x, f.axial_exponent);
    const double wp = f.omega_perp_ref * std::pow(x, r);
    EffectiveVolumeModel m;
    m.kind = EffectiveVolumeModel::Kind::SHO;
    m.mass = s.mass();
    m.omega_bar = std::cbrt(wp * wp * wz);
    LoadingBudget b{ f.rho0, magnetic_moment(s) * bias, f.eta, s.mass() };
    return max_loadable_atoms(b, m);
  }

  double current_scaling_exponent( const CurrentFamily& f, const SpinState& s, int points )
  {
    require(points >= 2, ErrorCode::InvalidArgument, "need at least two currents");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < points; ++i) {
      const double u = -0.5 + double(i) / (points - 1);   // log10 offset
      const double I = f.current_ref * std::pow(10.0, u);
      const double x = std::log(I);
      const double y = std::log(family_max_atoms(f, s, I));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = points;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  CurrentFamily paper_current_family()
  {
    CurrentFamily f;
    f.current_ref = 2.0;
    f.bias_ref = 20.0 * units::gauss;
    f.omega_z_ref = units::hz_to_angular(46.0);
    f.omega_perp_ref = units::hz_to_angular(823.0);
    f.bias_exponent = 1.0;
    f.axial_exponent = 0.5;
    return f;
  }

  double collision_rate( double mass, double rho0, double T, double sigma )
  {
    require(mass > 0.0 && rho0 > 0.0 && T > 0.0 && sigma > 0.0, ErrorCode::Domain,
            "collision rate needs positive inputs");
    const double kT = constants.k_B * T;
    const double hb = constants.hbar;
    return sigma * rho0 * mass * kT * kT / (kPi * kPi * hb * hb * hb);
  }

  double collision_rate_kinetic( double mass, double rho0, double T, double sigma )
  {
    require(mass > 0.0 && rho0 > 0.0 && T > 0.0 && sigma > 0.0, ErrorCode::Domain,
            "collision rate needs positive inputs");
    const double lam = thermal_wavelength(mass, T);
    const double v = std::sqrt(8.0 * constants.k_B * T / (kPi * mass));
    return rho0 / (lam * lam * lam) * sigma * v;
  }

  double min_start_temperature( double mass, double rho0, double gamma_min, double a_s )
  {
    require(mass > 0.0 && rho0 > 0.0 && gamma_min > 0.0 && a_s > 0.0, ErrorCode::Domain,
            "minimum start temperature needs positive inputs");
    const double hb = constants.hbar;
    const double kT2 = gamma_min * kPi * kPi * hb * hb * hb / (mass * sigma_identical_bosons(a_s) * rho0);
    return std::sqrt(kT2) / constants.k_B;
  }

  double min_start_temperature_scaled( double rho0, double gamma_min, double a_s )
  {
    require(rho0 > 0.0 && gamma_min > 0.0 && a_s > 0.0, ErrorCode::Domain,
            "minimum start temperature needs positive inputs");
    return 300.0 * units::microkelvin * std::sqrt(1e-6 / rho0) * std::sqrt(gamma_min / 150.0)
           * (5.3 * units::nanometre / a_s);
  }

  double sigma_swave( double a, double k )
  {
    require(a != 0.0 && k >= 0.0, ErrorCode::Domain, "s-wave cross-section needs a != 0 and k >= 0");
    return 4.0 * kPi * a * a / (1.0 + a * a * k * k);
  }

  double sigma_identical_bosons( double a )
  {
    require(a != 0.0, ErrorCode::Domain, "scattering length must be non-zero");
    return 8.0 * kPi * a * a;
  }

  std::vector<std::string> evaporation_preset_names()
  {
    return { "libbrecht-loop", "ioffe-c", "reichel-z", "toronto-z" };
  }

  EvaporationPreset evaporation_preset( const std::string& name )
  {
    EvaporationPreset p;
    p.name = name;
    p.state = builtin_species().stretched("Rb87");
    p.model.mass = p.state.mass();
    p.budget.mass = p.state.mass();
    p.budget.rho0 = 1e-6;
    p.budget.eta = 4.0;
    using K = EffectiveVolumeModel::Kind;
    const double mK = units::millikelvin * constants.k_B;
    if (name == "reichel-z") {
      p.description = "Z-wire microtrap, wbar = 2pi 300 Hz, depth 1.3 mK";
      p.model.kind = K::SHO;
      p.model.omega_bar = units::hz_to_angular(300.0);
      p.budget.depth = 1.3 * mK;
    } else if (name == "libbrecht-loop") {
      p.description = "single-loop quadrupole, 5.4e5 G/cm strong-axis gradient, depth 21 mK";
      p.model.kind = K::Quadrupole3D;
      p.model.mean_gradient = quadrupole_mean_gradient(p.state, 5.4e5 * units::gauss_per_cm);
      p.budget.depth = 21.0 * mK;
    } else if (name == "ioffe-c") {
      p.description = "tight Ioffe microtrap, wbar = 2pi 94 kHz, depth 1.3 mK";
      p.model.kind = K::SHO;
      p.model.omega_bar = units::hz_to_angular(94e3);
      p.budget.depth = 1.3 * mK;
    } else if (name == "toronto-z") {
      p.description = "curvature 3e4 G/cm^2 (isotropic wbar from it), loaded at 300 uK with eta = 4";
      p.model.kind = K::SHO;
      p.model.omega_bar = std::sqrt(magnetic_moment(p.state) * 3e4 * units::gauss_per_cm2 / p.state.mass());
      p.budget.depth = 4.0 * 0.3 * mK;
    } else {
      fail(ErrorCode::InvalidArgument, "unknown evaporation preset '" + name + "'");
    }
    return p;
  }

  EvaporationReport evaluate( const EvaporationPreset& p )
  {
    EvaporationReport r;
    r.T = loading_temperature(p.budget);
    r.V_eff = effective_volume(p.model, r.T);
    r.N_max = max_loadable_atoms(p.budget, p.model);
    if (p.state.species.s_wave_scattering_length) {
      const double a = *p.state.species.s_wave_scattering_length;
      r.has_scattering_length = true;
      r.T_min = min_start_temperature(p.state.mass(), p.budget.rho0, p.gamma_min, a);
      r.gamma_coll = collision_rate(p.state.mass(), p.budget.rho0, r.T, sigma_identical_bosons(a));
    }
    return r;
  }

}
