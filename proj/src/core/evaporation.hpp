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

#pragma once

// Loading and evaporation design rules in the eta >> 1 limit: effective
// trap volumes, the largest loadable atom number, scaling with wire current,
// the central collision rate and the s-wave cross-section.

#include "constants.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fermichip {

  // V_eff(T) = C_delta T^delta
  struct EffectiveVolumeModel {
    enum class Kind { SHO, Quadrupole3D, Box, Quad2DBox };

    Kind kind = Kind::SHO;
    double omega_bar = 0.0;       // rad/s (SHO)
    double mean_gradient = 0.0;   // J/m, geometric mean of |grad U| (quadrupoles)
    double side = 0.0;            // m (box, hybrid)
    double mass = 0.0;            // kg (SHO)
  };

  void validate( const EffectiveVolumeModel& );
  std::string to_string( EffectiveVolumeModel::Kind );

  // 3/2, 3, 0, 2
  double volume_exponent( EffectiveVolumeModel::Kind );

  // V_SHO = (2 pi k T / M wbar^2)^{3/2}, V_QT = 8 pi (k T / F)^3, V_box = L^3,
  // V_2QB = 2 pi L (k T / F)^2
  double effective_volume( const EffectiveVolumeModel&, double T );

  // Mean gradient of a 2:1:1 quadrupole from its strong-axis field gradient:
  // F = m_F g_F mu_B B'_max / 2^{2/3}.
  double quadrupole_mean_gradient( const SpinState&, double strong_gradient );

  struct LoadingBudget {
    double rho0 = 0.0;       // phase-space density
    double depth = 0.0;      // J
    double eta = 4.0;        // depth / k T
    double mass = 0.0;       // kg
  };

  void validate( const LoadingBudget& );

  // T = U_td / (eta k)
  double loading_temperature( const LoadingBudget& );

  // N = rho0 Lambda^-3 V_eff at the loading temperature.
  double max_loadable_atoms( const LoadingBudget&, const EffectiveVolumeModel& );

  // Thermal de Broglie wavelength sqrt(2 pi hbar^2 / M k T).
  double thermal_wavelength( double mass, double T );

  // A wire trap family parameterized by the current I: B0_perp ~ I^a,
  // w_z ~ I^c and w_perp ~ I^r with r = a - 1 unless given. Depth is
  // m_F g_F mu_B B0_perp. N_max follows from the SHO volume.
  struct CurrentFamily {
    double current_ref = 1.0;        // A
    double bias_ref = 0.0;           // T, B0_perp at current_ref
    double omega_z_ref = 0.0;        // rad/s
    double omega_perp_ref = 0.0;     // rad/s
    double bias_exponent = 1.0;
    double axial_exponent = 0.5;
    std::optional<double> radial_exponent;
    double rho0 = 1e-6;
    double eta = 4.0;
  };

  double family_max_atoms( const CurrentFamily&, const SpinState&, double I );

  // Least-squares slope of ln N_max against ln I over a decade centred on
  // current_ref (`points` log-spaced samples).
  double current_scaling_exponent( const CurrentFamily&, const SpinState&, int points = 11 );

  // Family of the paper's argument: B0_perp ~ I, w_z ~ sqrt(I).
  CurrentFamily paper_current_family();

  // gamma = sigma rho0 M (k T)^2 / (pi^2 hbar^3)
  double collision_rate( double mass, double rho0, double T, double sigma );
  // n0 sigma v with n0 = rho0 / Lambda^3 and v = sqrt(8 k T / pi M)
  double collision_rate_kinetic( double mass, double rho0, double T, double sigma );

  // From (k T)^2 >= gamma pi^2 hbar^3 / (M sigma rho0), sigma = 8 pi a^2.
  double min_start_temperature( double mass, double rho0, double gamma_min, double a_s );
  // 300 uK (1e-6/rho0)^{1/2} (gamma/150 s^-1)^{1/2} (5.3 nm / a_s)
  double min_start_temperature_scaled( double rho0, double gamma_min, double a_s );

  // 4 pi a^2 / (1 + a^2 k^2), distinguishable pair.
  double sigma_swave( double a, double k );
  // 8 pi a^2, identical bosons at low energy.
  double sigma_identical_bosons( double a );

  struct EvaporationPreset {
    std::string name;
    std::string description;
    SpinState state;
    EffectiveVolumeModel model;
    LoadingBudget budget;
    double gamma_min = 150.0;   // s^-1, for T_min
  };

  // libbrecht-loop, ioffe-c, reichel-z, toronto-z
  EvaporationPreset evaporation_preset( const std::string& name );
  std::vector<std::string> evaporation_preset_names();

  struct EvaporationReport {
    double T = 0.0;               // K, loading temperature
    double V_eff = 0.0;           // m^3
    double N_max = 0.0;
    double T_min = 0.0;           // K, needs a scattering length
    double gamma_coll = 0.0;      // s^-1 at T with sigma = 8 pi a^2
    bool has_scattering_length = false;
  };
  EvaporationReport evaluate( const EvaporationPreset& );

}
