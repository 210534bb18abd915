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

#include "density.hpp"
#include "error.hpp"
#include "format.hpp"
#include "parallel.hpp"
#include "polylog.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace fermichip {

  double harmonic_potential( const HarmonicTrap& trap, double mass, const Point3& r )
  {
    const double w[3] = { trap.omega_x, trap.omega_y, trap.omega_z };
    double u = 0.0;
    for (int i = 0; i < 3; ++i)
      u += w[i] * w[i] * r[i] * r[i];
    return 0.5 * mass * u;
  }

  double density_finite_T( const TrappedGasState& s, const Point3& r )
  {
    const double lam = s.thermal_wavelength();
    const double bu = s.beta() * harmonic_potential(s.trap(), s.mass(), r);
    return polylog::fermi_fn_log(1.5, s.log_z() - bu) / (lam * lam * lam);
  }

  double ThomasFermiExtent::mean() const { return std::cbrt(X * Y * Z); }

  ThomasFermiExtent thomas_fermi_extent( double E_F, const HarmonicTrap& trap, double mass )
  {
    require(E_F > 0.0 && mass > 0.0, ErrorCode::Domain, "Thomas-Fermi extent needs E_F > 0 and M > 0");
    validate(trap);
    auto r = [&]( double w ) { return std::sqrt(2.0 * E_F / (mass * w * w)); };
    return { r(trap.omega_x), r(trap.omega_y), r(trap.omega_z) };
  }

  ThomasFermiExtent thomas_fermi_extent( const TrappedGasState& s )
  {
    return thomas_fermi_extent(s.E_F(), s.trap(), s.mass());
  }

  double density_zero_T( const TrappedGasState& s, const Point3& r )
  {
    const auto ext = thomas_fermi_extent(s);
    const double u = r[0] * r[0] / (ext.X * ext.X) + r[1] * r[1] / (ext.Y * ext.Y)
                     + r[2] * r[2] / (ext.Z * ext.Z);
    if (u >= 1.0)
      return 0.0;
    const double rbar = ext.mean();
    return 8.0 * s.N() / (kPi * kPi * rbar * rbar * rbar) * std::pow(1.0 - u, 1.5);
  }

  double uniform_density_zero_T( double E_F, double mass )
  {
    require(E_F > 0.0 && mass > 0.0, ErrorCode::Domain, "uniform density needs E_F > 0 and M > 0");
    const double k2 = 2.0 * mass * E_F / (constants.hbar * constants.hbar);
    return std::pow(k2, 1.5) / (6.0 * kPi * kPi);
  }

  TofScaling tof_rescale( const HarmonicTrap& trap, double t )
  {
    validate(trap);
    require(t >= 0.0, ErrorCode::Domain, "expansion time must be non-negative");
    TofScaling s;
    const double w[3] = { trap.omega_x, trap.omega_y, trap.omega_z };
    s.normalization = 1.0;
    for (int i = 0; i < 3; ++i) {
      s.scale[i] = std::sqrt(1.0 + w[i] * w[i] * t * t);
      s.omega[i] = w[i] / s.scale[i];
      s.normalization /= s.scale[i];
    }
    return s;
  }

  double cloud_radius( double omega, double T, double mass, double t )
  {
    require(omega > 0.0 && T > 0.0 && mass > 0.0 && t >= 0.0, ErrorCode::Domain,
            "cloud radius needs w, T, M > 0 and t >= 0");
    return std::sqrt((1.0 / (omega * omega) + t * t) * constants.k_B * T / mass);
  }

  double column_density_fermi( const TrappedGasState& s, double t, double x, double y )
  {
    const double rx = cloud_radius(s.trap().omega_x, s.T(), s.mass(), t);
    const double ry = cloud_radius(s.trap().omega_y, s.T(), s.mass(), t);
    const double q = 0.5 * (x * x / (rx * rx) + y * y / (ry * ry));
    return s.N() / (kTwoPi * rx * ry * polylog::fermi_fn_log(3.0, s.log_z()))
           * polylog::fermi_fn_log(2.0, s.log_z() - q);
  }

  double column_density_boltzmann( double N, double T, const HarmonicTrap& trap, double mass, double t,
                                   double x, double y )
  {
    const double rx = cloud_radius(trap.omega_x, T, mass, t);
    const double ry = cloud_radius(trap.omega_y, T, mass, t);
    const double q = 0.5 * (x * x / (rx * rx) + y * y / (ry * ry));
    return N / (kTwoPi * rx * ry) * std::exp(-q);
  }

  double Raster::integral() const
  {
    long double sum = 0.0L;
    for (double v : values)
      sum += v;
    return double(sum) * grid.pixel_area();
  }

  Grid2D column_grid( const TrappedGasState& s, double t, std::uint32_t n, double span )
  {
    require(n >= 2 && span > 0.0, ErrorCode::InvalidArgument, "grid needs n >= 2 and span > 0");
    const double rx = cloud_radius(s.trap().omega_x, s.T(), s.mass(), t);
    const double ry = cloud_radius(s.trap().omega_y, s.T(), s.mass(), t);
    // Degenerate clouds are wider than the thermal radius suggests.
    const double widen = std::sqrt(std::max(1.0, s.log_z()));
    Grid2D g;
    g.nx = g.ny = n;
    g.pitch_x = 2.0 * span * rx * widen / double(n - 1);
    g.pitch_y = 2.0 * span * ry * widen / double(n - 1);
    return g;
  }

  Raster column_profile( const TrappedGasState& s, double t, const Grid2D& grid, ProfileModel model, unsigned jobs )
  {
    require(grid.nx > 0 && grid.ny > 0 && grid.pitch_x > 0.0 && grid.pitch_y > 0.0,
            ErrorCode::InvalidArgument, "grid needs positive dimensions and pitch");
    Raster r;
    r.grid = grid;
    r.values.assign(std::size_t(grid.nx) * grid.ny, 0.0);
    parallel_for(grid.ny, jobs, [&]( std::size_t j ) {
      const double y = grid.y(std::uint32_t(j));
      for (std::uint32_t i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        r.values[j * grid.nx + i] = model == ProfileModel::Fermi
          ? column_density_fermi(s, t, x, y)
          : column_density_boltzmann(s.N(), s.T(), s.trap(), s.mass(), t, x, y);
      }
    });
    return r;
  }

  double Profile3D::integral() const
  {
    long double sum = 0.0L;
    for (double v : values)
      sum += v;
    return double(sum) * pitch[0] * pitch[1] * pitch[2];
  }

  Profile3D density_profile_3d( const TrappedGasState& s, std::uint32_t n, double span, unsigned jobs )
  {
    require(n >= 2 && span > 0.0, ErrorCode::InvalidArgument, "grid needs n >= 2 and span > 0");
    const double w[3] = { s.trap().omega_x, s.trap().omega_y, s.trap().omega_z };
    const auto tf = thomas_fermi_extent(s);
    const double tfr[3] = { tf.X, tf.Y, tf.Z };
    Profile3D p;
    p.n = n;
    for (int a = 0; a < 3; ++a) {
      const double thermal = std::sqrt(constants.k_B * s.T() / (s.mass() * w[a] * w[a]));
      p.pitch[a] = 2.0 * span * std::max(thermal, tfr[a]) / double(n - 1);
    }
    p.values.assign(std::size_t(n) * n * n, 0.0);
    const double c = 0.5 * double(n - 1);
    parallel_for(n, jobs, [&]( std::size_t k ) {
      for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t i = 0; i < n; ++i) {
          Point3 r{ (i - c) * p.pitch[0], (j - c) * p.pitch[1], (double(k) - c) * p.pitch[2] };
          p.values[(k * n + j) * n + i] = density_finite_T(s, r);
        }
    });
    return p;
  }

  namespace {

    constexpr char kMagic[8] = { 'F', 'C', 'H', 'I', 'P', '1', '\0', '\0' };

    template <class T>
    void put( std::ostream& os, T v )
    {
      char buf[sizeof(T)];
      std::memcpy(buf, &v, sizeof(T));
      os.write(buf, sizeof(T));
    }

    template <class T>
    T get( std::istream& is )
    {
      char buf[sizeof(T)];
      is.read(buf, sizeof(T));
      require(bool(is), ErrorCode::Parse, "raster truncated");
      T v;
      std::memcpy(&v, buf, sizeof(T));
      return v;
    }

  }

  void write_raster_binary( std::ostream& os, const Raster& r )
  {
    require(r.values.size() == std::size_t(r.grid.nx) * r.grid.ny, ErrorCode::InvalidArgument,
            "raster value count does not match its grid");
    os.write(kMagic, 8);
    put(os, r.grid.nx);
    put(os, r.grid.ny);
    put(os, r.grid.pitch_x);
    put(os, r.grid.pitch_y);
    for (double v : r.values)
      put(os, v);
    require(bool(os), ErrorCode::Io, "raster write failed");
  }

  Raster read_raster_binary( std::istream& is )
  {
    char magic[8];
    is.read(magic, 8);
    require(bool(is) && std::memcmp(magic, kMagic, 8) == 0, ErrorCode::Parse, "not an FCHIP1 raster");
    Raster r;
    r.grid.nx = get<std::uint32_t>(is);
    r.grid.ny = get<std::uint32_t>(is);
    r.grid.pitch_x = get<double>(is);
    r.grid.pitch_y = get<double>(is);
    require(r.grid.nx > 0 && r.grid.ny > 0 && r.grid.pitch_x > 0.0 && r.grid.pitch_y > 0.0,
            ErrorCode::Parse, "raster header has non-positive dimensions or pitch");
    const std::size_t count = std::size_t(r.grid.nx) * r.grid.ny;
    require(count <= (std::size_t(1) << 30), ErrorCode::Parse, "raster too large");
    r.values.resize(count);
    for (auto& v : r.values)
      v = get<double>(is);
    return r;
  }

  void write_raster_binary( const std::string& path, const Raster& r )
  {
    std::ofstream os(path, std::ios::binary);
    require(bool(os), ErrorCode::Io, "cannot open " + path + " for writing");
    write_raster_binary(os, r);
  }

  Raster read_raster_binary( const std::string& path )
  {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), ErrorCode::Io, "cannot open " + path);
    return read_raster_binary(is);
  }

  void write_raster_csv( std::ostream& os, const Raster& r )
  {
    os << "x_m,y_m,value\n";
    for (std::uint32_t j = 0; j < r.grid.ny; ++j)
      for (std::uint32_t i = 0; i < r.grid.nx; ++i)
        os << fmt17(r.grid.x(i)) << ',' << fmt17(r.grid.y(j)) << ',' << fmt17(r.at(i, j)) << '\n';
  }

}
