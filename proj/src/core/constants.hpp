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

// Physical constants (CODATA 2018, SI), unit conversions used at the I/O
// boundary, and the atomic species / spin-state registry.

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fermichip {

  struct PhysicalConstants {
    double hbar;             // J s
    double h;                // J s
    double k_B;              // J/K
    double mu_B;             // J/T
    double mu_0;             // T m/A
    double atomic_mass_unit; // kg
  };

  inline constexpr PhysicalConstants constants {
    1.054571817e-34,
    6.62607015e-34,
    1.380649e-23,
    9.2740100783e-24,
    1.25663706212e-6,
    1.66053906660e-27,
  };

  inline constexpr double kPi = std::numbers::pi;
  inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

  namespace units {
    inline constexpr double gauss = 1e-4;               // T
    inline constexpr double milligauss = 1e-7;          // T
    inline constexpr double micrometre = 1e-6;          // m
    inline constexpr double nanometre = 1e-9;           // m
    inline constexpr double microkelvin = 1e-6;         // K
    inline constexpr double nanokelvin = 1e-9;          // K
    inline constexpr double millikelvin = 1e-3;         // K
    inline constexpr double cubic_micrometre = 1e-18;   // m^3
    inline constexpr double gauss_per_cm = 1e-2;        // T/m
    inline constexpr double gauss_per_cm2 = 1.0;        // T/m^2

    constexpr double hz_to_angular( double f ) { return kTwoPi * f; }
    constexpr double angular_to_hz( double w ) { return w / kTwoPi; }
    // Energy <-> frequency (E = h f) and energy <-> temperature (E = k_B T).
    constexpr double energy_from_hz( double f ) { return constants.h * f; }
    constexpr double energy_to_hz( double e ) { return e / constants.h; }
    constexpr double energy_from_kelvin( double t ) { return constants.k_B * t; }
    constexpr double energy_to_kelvin( double e ) { return e / constants.k_B; }
  }

  // Spin quantum numbers (F, m_F) are integers or half-integers; store twice
  // the value so they stay exact.
  class HalfInt {
  public:
    constexpr HalfInt() = default;
    static constexpr HalfInt from_twice( int twice ) { HalfInt h; h.m_twice = twice; return h; }
    constexpr int twice() const { return m_twice; }
    constexpr double value() const { return 0.5 * m_twice; }
    constexpr HalfInt operator-() const { return from_twice(-m_twice); }
    constexpr auto operator<=>( const HalfInt& ) const = default;
    std::string str() const;
  private:
    int m_twice = 0;
  };

  // Exact rational number, used for the Lande g-factors.
  struct Rational {
    long num = 0;
    long den = 1;
    constexpr double value() const { return double(num) / double(den); }
    Rational normalized() const;
    friend Rational operator+( Rational a, Rational b );
    friend Rational operator-( Rational a, Rational b );
    friend Rational operator*( Rational a, Rational b );
    friend Rational operator/( Rational a, Rational b );
    friend bool operator==( Rational a, Rational b );
    std::string str() const;
  };

  Rational to_rational( HalfInt h );

  struct AtomSpecies {
    std::string name;
    double mass = 0.0;                                // kg
    std::optional<double> s_wave_scattering_length;   // m
  };

  struct SpinState {
    AtomSpecies species;
    HalfInt F;
    HalfInt m_F;
    Rational g_F;

    double mass() const { return species.mass; }
    // m_F g_F as an exact rational.
    Rational moment_factor() const { return to_rational(m_F) * g_F; }
    bool trappable() const { return moment_factor().value() > 0.0; }
    std::string label() const;
  };

  // Checks |m_F| <= F, F >= 0 and mass > 0.
  void validate( const SpinState& );

  // m_F g_F mu_B, in J/T.
  double magnetic_moment( const SpinState& );

  struct SpeciesEntry {
    AtomSpecies species;
    HalfInt F;
    Rational g_F;
  };

  class SpeciesRegistry {
  public:
    void add( SpeciesEntry );
    const SpeciesEntry& entry( const std::string& name ) const;
    bool contains( const std::string& name ) const;
    std::vector<std::string> names() const;

    // Spin state of the named species' ground manifold with the given m_F.
    SpinState state( const std::string& name, HalfInt m_F ) const;
    // Stretched state m_F = +F.
    SpinState stretched( const std::string& name ) const;

    // JSON document: {"species":[{"name","mass_u","F","g_F":"2/9","a_s_nm"}]}
    static SpeciesRegistry from_json_text( const std::string& text );
    static SpeciesRegistry load( const std::string& path );
    std::string to_json_text() const;
  private:
    std::vector<SpeciesEntry> m_entries;
  };

  // K40 (F = 9/2, g_F = 2/9) and Rb87 (F = 2, g_F = 1/2, a_s = 5.3 nm).
  const SpeciesRegistry& builtin_species();

}
