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

// In-trap and time-of-flight density distributions of the harmonically
// trapped ideal Fermi gas, with the Boltzmann gas for comparison.
// Imaging is along z: column densities live in the (x, y) plane.

#include "thermo.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fermichip {

  using Point3 = std::array<double, 3>;

  // U(r) = M/2 sum_i w_i^2 x_i^2, zero at the centre.
  double harmonic_potential( const HarmonicTrap&, double mass, const Point3& r );

  // n(r) = Lambda^-3 f_{3/2}(Z e^{-beta U(r)})
  double density_finite_T( const TrappedGasState&, const Point3& r );

  struct ThomasFermiExtent {
    double X = 0.0;
    double Y = 0.0;
    double Z = 0.0;
    double mean() const;
  };
  ThomasFermiExtent thomas_fermi_extent( const TrappedGasState& );
  ThomasFermiExtent thomas_fermi_extent( double E_F, const HarmonicTrap&, double mass );

  // 8N/(pi^2 Rbar^3) [1 - sum x_i^2/X_i^2]^{3/2}, zero outside the ellipsoid.
  double density_zero_T( const TrappedGasState&, const Point3& r );

  // (1/6pi^2)(2 M E_F / hbar^2)^{3/2}
  double uniform_density_zero_T( double E_F, double mass );

  // Ballistic expansion: every length scales by b_i = sqrt(1 + w_i^2 t^2),
  // equivalently w_i -> w_i / b_i, and densities by 1/(b_x b_y b_z).
  struct TofScaling {
    std::array<double, 3> scale{ 1.0, 1.0, 1.0 };
    std::array<double, 3> omega{};
    double normalization = 1.0;
  };
  TofScaling tof_rescale( const HarmonicTrap&, double t );

  // r_i(t)^2 = (w_i^-2 + t^2) k T / M
  double cloud_radius( double omega, double T, double mass, double t );

  double column_density_fermi( const TrappedGasState&, double t, double x, double y );
  double column_density_boltzmann( double N, double T, const HarmonicTrap&, double mass, double t,
                                   double x, double y );

  // Pixel (i, j) is centred at ((i - (nx-1)/2) pitch_x, (j - (ny-1)/2) pitch_y).
  struct Grid2D {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    double pitch_x = 0.0;   // m
    double pitch_y = 0.0;
    double x( std::uint32_t i ) const { return (double(i) - 0.5 * double(nx - 1)) * pitch_x; }
    double y( std::uint32_t j ) const { return (double(j) - 0.5 * double(ny - 1)) * pitch_y; }
    double pixel_area() const { return pitch_x * pitch_y; }
  };

  // Row-major values, index j * nx + i.
  struct Raster {
    Grid2D grid;
    std::vector<double> values;
    double at( std::uint32_t i, std::uint32_t j ) const { return values[std::size_t(j) * grid.nx + i]; }
    double integral() const;
  };

  enum class ProfileModel { Fermi, Boltzmann };

  // n x n grid covering +-span cloud radii r_x(t), r_y(t).
  Grid2D column_grid( const TrappedGasState&, double t, std::uint32_t n = 512, double span = 4.0 );
  Raster column_profile( const TrappedGasState&, double t, const Grid2D&, ProfileModel = ProfileModel::Fermi,
                         unsigned jobs = 1 );

  // In-trap density on an n^3 grid spanning +-span radii (thermal or
  // Thomas-Fermi, whichever is larger) along each axis.
  struct Profile3D {
    std::uint32_t n = 0;
    std::array<double, 3> pitch{};
    std::vector<double> values;   // index (k n + j) n + i
    double integral() const;
  };
  Profile3D density_profile_3d( const TrappedGasState&, std::uint32_t n = 128, double span = 4.0,
                                unsigned jobs = 1 );

  // Binary raster: 8-byte magic "FCHIP1\0\0", uint32 nx, uint32 ny, float64
  // pitch_x, float64 pitch_y (32 bytes, little endian), then nx*ny float64.
  void write_raster_binary( const std::string& path, const Raster& );
  Raster read_raster_binary( const std::string& path );
  void write_raster_binary( std::ostream&, const Raster& );
  Raster read_raster_binary( std::istream& );
  // CSV with header x_m,y_m,value.
  void write_raster_csv( std::ostream&, const Raster& );

}
