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

// RF-dressed adiabatic potentials in the rotating-wave approximation,
//
//   U_eff = m_F' sqrt(delta^2 + Omega^2),
//
// and the K/Rb species-selective evaporation relations.
//
// Sign convention: delta = hbar w_RF - |g_F| mu_B |B_DC|, so delta < 0 below
// resonance at the trap bottom. Omega = |g_F| mu_B B_RF_perp / 2.

#include "field.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fermichip {

  struct RFField {
    enum class Law { Uniform, WireNearField };

    double amplitude = 0.0;             // T; for WireNearField, the value at reference_distance
    double omega = 0.0;                 // rad/s
    Vec3 polarization = Vec3::UnitX();
    Law law = Law::Uniform;
    Vec3 wire_point = Vec3::Zero();     // RF wire: a point on the line
    Vec3 wire_direction = Vec3::UnitY();
    double reference_distance = 0.0;    // m

    // Amplitude of the full RF vector at r (T).
    double amplitude_at( const Vec3& r ) const;
  };

  void validate( const RFField& );

  // The RWA needs B_RF << B0; below 0.3 B0 counts as valid.
  bool rwa_valid( const RFField&, double B0 );

  struct DetuningRabi {
    double delta = 0.0;   // J, signed
    double Omega = 0.0;   // J, >= 0
  };
  // Throws Domain where |B_DC| vanishes.
  DetuningRabi detuning_and_rabi( const MagneticField&, const RFField&, const SpinState&, const Vec3& r );

  // All 2F+1 dressed energies m' sqrt(delta^2 + Omega^2), ascending in m'.
  std::vector<double> dressed_levels( HalfInt F, double delta, double Omega );

  // Dressed quantum number reached by |F, m_F> when the coupling ramps
  // from 0 to Omega at fixed delta. Tracks the eigenvector of
  // H(l) = -delta F_z + l Omega F_x by maximal overlap for l in [0, 1].
  // Throws Ambiguous at delta = 0 (degenerate start).
  HalfInt connected_branch( const SpinState&, double delta, double Omega, int steps = 200 );

  struct ScanAxis {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitX();   // normalized on use
    double s_min = 0.0;               // m
    double s_max = 0.0;
    std::size_t samples = 4096;
    Vec3 at( double s ) const;
    double pitch() const;
  };

  struct DressedPotentialScan {
    SpinState state;
    HalfInt m_F_prime;
    ScanAxis axis;
    std::vector<double> s;        // m
    std::vector<double> U;        // J
    std::vector<double> delta;    // J
    std::vector<double> Omega;    // J
    double min_B_dc = 0.0;        // T, smallest static field on the scan
    bool rwa_warning = false;     // B_RF >= 0.3 min |B_DC|
  };

  // Throws RwaViolation when B_RF >= min |B_DC| along the scan.
  DressedPotentialScan dressed_potential( const MagneticField&, const RFField&, const SpinState&,
                                          HalfInt m_F_prime, const ScanAxis&, unsigned jobs = 1 );

  // Checks U = m' sqrt(delta^2 + Omega^2) on every sample (relative 1e-12).
  void verify_scan( const DressedPotentialScan& );

  enum class WellTopology { Single, Double };
  std::string to_string( WellTopology );

  struct Extremum {
    double s = 0.0;
    double U = 0.0;
    bool minimum = true;
  };

  struct DoubleWellReport {
    WellTopology topology = WellTopology::Single;
    std::vector<double> wells;            // m, ascending
    double separation = 0.0;              // m
    double barrier = 0.0;                 // J, saddle minus the higher well
    std::optional<double> saddle;         // m
    std::vector<double> level_repulsion;  // J, Omega at each well
    std::vector<Extremum> extrema;        // everything found, ascending in s
  };

  // Extrema from sign changes of the discrete derivative, refined by a
  // parabola through the three nearest samples. Requires pitch <= 0.05 um.
  // Double: two minima with exactly one maximum between. Single: one minimum.
  // Anything else throws Ambiguous.
  DoubleWellReport characterize_wells( const DressedPotentialScan& );

  // Scan over the axis window, then rescan 10x finer around each extremum
  // and characterize on the refined points.
  DoubleWellReport analyze_wells( const MagneticField&, const RFField&, const SpinState&, HalfInt m_F_prime,
                                  const ScanAxis&, unsigned jobs = 1 );

  // Point on the axis (s >= 0 side) where delta = 0, and the undressed
  // potential there relative to the axis origin.
  struct ResonanceShell {
    double s = 0.0;         // m
    double energy = 0.0;    // J
  };
  ResonanceShell resonance_shell( const MagneticField&, const RFField&, const SpinState&, const ScanAxis& );

  // RF knife: U_td = m_F (hbar w_RF - |g_F| mu_B B0) when the knife sits
  // above the trap bottom; otherwise it removes nothing.
  struct KnifeDepth {
    double depth = std::numeric_limits<double>::infinity();   // J
    bool engaged = false;
  };
  KnifeDepth rf_knife_depth( const SpinState&, double B0, double omega_rf );
  // Inverse: the w_RF that sets the knife at `depth`.
  double rf_knife_frequency( const SpinState&, double B0, double depth );

  // eta_K = (m_K/m_Rb) eta_Rb + m_K (g_Rb - g_K) mu_B B0 / k T
  double eta_relation( const SpinState& K, const SpinState& Rb, double eta_Rb, double B0, double T );

  struct EtaCoefficients {
    Rational ratio;    // m_K / m_Rb
    Rational field;    // m_K (g_Rb - g_K)
  };
  EtaCoefficients eta_coefficients( const SpinState& K, const SpinState& Rb );

  struct EtaMinimum {
    double eta = 0.0;
    HalfInt m_F;
  };
  // Minimum of eta_relation over the trappable sublevels of K's manifold.
  EtaMinimum eta_min_over_sublevels( const SpinState& K, const SpinState& Rb, double eta_Rb, double B0, double T );

  // Largest K depth reachable with the knife still below the Rb trap bottom.
  double k_only_evaporation_depth( const SpinState& K, const SpinState& Rb, double B0 );

  // Species-selective scenarios in an IP trap with B0 = 1.214 G and
  // (w_x, w_y, w_z) = 2pi (1230, 13.7, 1230) Hz for Rb: RF switched on at
  // `connect_omega`, swept to `omega`. Scans run along x through the centre.
  struct DressingScenario {
    std::string name;
    IPTrapParams trap;
    RFField rf;                  // final frequency
    double connect_omega = 0.0;  // rad/s, where the branches are assigned
    ScanAxis axis;
  };
  DressingScenario dressing_scenario( const std::string& name );   // "rb-doublewell" | "k-doublewell"
  std::vector<std::string> dressing_scenario_names();

  // One species in a dressing run: branch assigned at connect_omega, then
  // the scan and well report at the final frequency.
  struct SpeciesDressing {
    SpinState state;
    HalfInt m_F_prime;
    DetuningRabi at_connect;   // at the axis origin
    DetuningRabi at_origin;    // final frequency
    DressedPotentialScan scan;
    std::optional<DoubleWellReport> wells;
    std::string wells_error;   // set when the topology was ambiguous
  };
  std::vector<SpeciesDressing> run_dressing( const MagneticField&, const RFField&, double connect_omega,
                                             const std::vector<SpinState>&, const ScanAxis&, unsigned jobs = 1 );

  // CSV: s_m,U_J,delta_J,Omega_J,U_over_h_Hz
  void write_scan_csv( std::ostream&, const DressedPotentialScan& );

}
