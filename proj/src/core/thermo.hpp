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

// Ideal Fermi gas in a three-dimensional harmonic trap, continuum
// (semi-classical) description plus a brute-force discrete-level oracle.

#include "constants.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

namespace fermichip {

  struct HarmonicTrap {
    double omega_x = 0.0;               // rad/s
    double omega_y = 0.0;
    double omega_z = 0.0;
    std::optional<double> trap_depth;   // J

    double omega_bar() const;
    static HarmonicTrap from_hz( double fx, double fy, double fz );
  };

  void validate( const HarmonicTrap& );

  // 1 / (e^{beta (eps - mu)} + 1)
  double occupation( double epsilon, double mu, double T );

  // E_F = hbar wbar (6N)^{1/3} and its inverse.
  double fermi_energy( double N, const HarmonicTrap& );
  double atom_number_for_fermi_energy( double E_F, const HarmonicTrap& );

  // ln Z solving 6 f_3(Z) = t^-3, t = T/T_F. Fugacities of strongly
  // degenerate gases overflow, hence the log form is the primary one.
  double log_fugacity_from_reduced_temperature( double t );
  double fugacity_from_reduced_temperature( double t );

  // Inverse map: the t at which the gas has fugacity Z = e^{log_z}.
  double reduced_temperature_from_log_fugacity( double log_z );

  enum class MuRegime { Low, High };
  // mu/E_F; Low: 1 - pi^2 t^2/3, High: -t ln(6 t^3).
  double chemical_potential_approx( double t, MuRegime );
  // mu/E_F from the exact inversion.
  double chemical_potential_exact( double t );

  // N and E from (T, Z, wbar):  N = (kT/hbar wbar)^3 f_3,  E = 3 kT (kT/hbar wbar)^3 f_4
  double atom_number( const HarmonicTrap&, double T, double log_z );
  double total_energy( const HarmonicTrap&, double T, double log_z );

  class TrappedGasState {
  public:
    static TrappedGasState make( const SpinState&, const HarmonicTrap&, double N, double T );
    static TrappedGasState from_reduced_temperature( const SpinState&, const HarmonicTrap&,
                                                     double N, double t );

    const SpinState& spin() const { return m_spin; }
    const HarmonicTrap& trap() const { return m_trap; }
    double mass() const { return m_spin.mass(); }
    double N() const { return m_N; }
    double T() const { return m_T; }
    double beta() const { return 1.0 / (constants.k_B * m_T); }
    double log_z() const { return m_log_z; }
    double fugacity() const;            // may overflow to inf for t < ~1/700
    double E_F() const { return m_E_F; }
    double T_F() const { return m_E_F / constants.k_B; }
    double reduced_temperature() const { return m_T / T_F(); }
    double mu() const { return m_log_z * constants.k_B * m_T; }
    // Thermal de Broglie wavelength sqrt(2 pi hbar^2 / M k T).
    double thermal_wavelength() const;

  private:
    SpinState m_spin;
    HarmonicTrap m_trap;
    double m_N = 0.0;
    double m_T = 0.0;
    double m_log_z = 0.0;
    double m_E_F = 0.0;
  };

  double total_energy( const TrappedGasState& );
  double energy_per_particle( const TrappedGasState& );

  // n0 Lambda^3 = f_{3/2}(Z); the Bose version is g_{3/2}(Z), Z <= 1.
  double degeneracy_parameter( const TrappedGasState& );
  double degeneracy_parameter_fermi( double log_z );
  double degeneracy_parameter_bose( double z );

  struct Capacity1D {
    double ratio = 0.0;       // w_perp / w_par
    long whole_atoms = 0;     // floor(ratio)
    int axial_axis = 1;       // 0,1,2 = x,y,z
  };
  Capacity1D capacity_1d( const HarmonicTrap&, double symmetry_tolerance = 0.01 );

  // Energy origin of the discrete oscillator ladder. PotentialMinimum keeps
  // the zero-point energy hbar(wx+wy+wz)/2 in every level, which makes the
  // leading finite-size correction against the continuum cancel.
  enum class EnergyOrigin { PotentialMinimum, GroundState };

  struct DiscreteSums {
    double N = 0.0;
    double E = 0.0;             // J, measured from the chosen origin
    double tail_occupancy = 0.0;
  };

  // Brute-force sums over n_x, n_y, n_z in [0, cutoff). Fails when the
  // occupancy of the highest included level exceeds 1e-12.
  DiscreteSums discrete_sum_oracle( const HarmonicTrap&, double mu, double T, long cutoff,
                                    EnergyOrigin = EnergyOrigin::PotentialMinimum );
  // Smallest cutoff whose edge occupancy is below 1e-12.
  long discrete_sum_cutoff( const HarmonicTrap&, double mu, double T,
                            EnergyOrigin = EnergyOrigin::PotentialMinimum );

  struct ThermoScanRow {
    double t = 0.0;
    double log_z = 0.0;
    double mu_over_EF = 0.0;
    double E_per_N_over_EF = 0.0;
    double n0_lambda3 = 0.0;
  };

  // Rows are independent; jobs > 1 spreads them over threads with the
  // output order fixed by the input order.
  std::vector<ThermoScanRow> thermo_scan( const std::vector<double>& t_values, unsigned jobs = 1 );
  void write_thermo_scan_csv( std::ostream&, const std::vector<ThermoScanRow>& );

}
