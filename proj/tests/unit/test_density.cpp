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

#include "checks.hpp"
#include "density.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace fermichip;

namespace {
  const SpinState& K40() { static const SpinState s = builtin_species().stretched("K40"); return s; }

  double radial_integral( const TrappedGasState& g, double R, bool zero_T )
  {
    auto f = [&]( double r ) {
      const Point3 p{ r, 0.0, 0.0 };
      return 4.0 * std::numbers::pi * r * r * (zero_T ? density_zero_T(g, p) : density_finite_T(g, p));
    };
    return oracle::simpson(f, 0.0, R, 20000);
  }
}

TEST_SUITE("density") {

  TEST_CASE("in-trap density integrates to the atom number")
  {
    const auto trap = HarmonicTrap::from_hz(300.0, 300.0, 300.0);
    for (double t : { 0.05, 0.3, 1.0, 4.0 }) {
      const auto g = TrappedGasState::from_reduced_temperature(K40(), trap, 2e4, t);
      const double rth = std::sqrt(constants.k_B * g.T() / g.mass()) / trap.omega_x;
      const double R = std::max(thomas_fermi_extent(g).X, rth) * 8.0;
      CAPTURE(t);
      CHECK(radial_integral(g, R, false) == doctest::Approx(2e4).epsilon(1e-6));
    }
    const auto g = TrappedGasState::from_reduced_temperature(K40(), trap, 2e4, 0.1);
    CHECK(radial_integral(g, thomas_fermi_extent(g).X, true) == doctest::Approx(2e4).epsilon(1e-6));
  }

  TEST_CASE("centre of the zero-temperature cloud is a uniform gas at E_F")
  {
    const auto g = TrappedGasState::from_reduced_temperature(K40(), HarmonicTrap::from_hz(50, 400, 900), 1e6, 0.1);
    CHECK(density_zero_T(g, { 0, 0, 0 }) == doctest::Approx(uniform_density_zero_T(g.E_F(), g.mass())).epsilon(1e-12));
    const auto tf = thomas_fermi_extent(g);
    CHECK(density_zero_T(g, { 1.0001 * tf.X, 0, 0 }) == 0.0);
    CHECK(tf.X * 50.0 == doctest::Approx(tf.Y * 400.0).epsilon(1e-12));
    CHECK(tf.X == doctest::Approx(std::sqrt(2.0 * g.E_F() / g.mass()) / (kTwoPi * 50.0)).epsilon(1e-12));
  }

  TEST_CASE("finite-temperature density tends to the right limits")
  {
    const auto trap = HarmonicTrap::from_hz(300.0, 300.0, 300.0);
    const auto cold = TrappedGasState::from_reduced_temperature(K40(), trap, 1e5, 0.02);
    CHECK(density_finite_T(cold, { 0, 0, 0 }) == doctest::Approx(density_zero_T(cold, { 0, 0, 0 })).epsilon(3e-3));
    const auto hot = TrappedGasState::from_reduced_temperature(K40(), trap, 1e5, 5.0);
    const double boltz = 1e5 * std::pow(hot.mass() * trap.omega_x * trap.omega_x
                                        / (kTwoPi * constants.k_B * hot.T()), 1.5);
    CHECK(density_finite_T(hot, { 0, 0, 0 }) == doctest::Approx(boltz).epsilon(2e-3));
  }

  TEST_CASE("ballistic rescaling")
  {
    const auto trap = HarmonicTrap::from_hz(100.0, 800.0, 20.0);
    const auto s0 = tof_rescale(trap, 0.0);
    CHECK(s0.normalization == 1.0);
    CHECK(s0.omega[1] == doctest::Approx(trap.omega_y));
    oracle::Gen gen(8);
    for (int i = 0; i < 20; ++i) {
      const double t = gen.uniform(0.0, 0.05);
      const auto s = tof_rescale(trap, t);
      const double w[3] = { trap.omega_x, trap.omega_y, trap.omega_z };
      double norm = 1.0;
      for (int k = 0; k < 3; ++k) {
        const double b = std::sqrt(1.0 + w[k] * w[k] * t * t);
        CHECK(s.scale[k] == doctest::Approx(b).epsilon(1e-14));
        CHECK(s.omega[k] == doctest::Approx(w[k] / b).epsilon(1e-14));
        norm /= b;
      }
      CHECK(s.normalization == doctest::Approx(norm).epsilon(1e-14));
    }
  }

  TEST_CASE("column density is the line integral of the density")
  {
    const auto trap = HarmonicTrap::from_hz(200.0, 300.0, 400.0);
    for (double t : { 0.1, 0.7 }) {
      const auto g = TrappedGasState::from_reduced_temperature(K40(), trap, 3e4, t);
      const double x = 0.3 * thomas_fermi_extent(g).X, y = -0.2 * thomas_fermi_extent(g).Y;
      const double Z = 6.0 * std::max(thomas_fermi_extent(g).Z,
                                      std::sqrt(constants.k_B * g.T() / g.mass()) / trap.omega_z);
      const double line = oracle::simpson([&]( double z ) { return density_finite_T(g, { x, y, z }); }, -Z, Z, 4000);
      CHECK(column_density_fermi(g, 0.0, x, y) == doctest::Approx(line).epsilon(1e-8));
    }
  }

  TEST_CASE("expanded images keep every atom")
  {
    const auto g = TrappedGasState::from_reduced_temperature(K40(), HarmonicTrap::from_hz(823, 46, 823), 4e4, 0.2);
    for (double t : { 0.0, 0.003, 0.02 }) {
      const auto grid = column_grid(g, t, 256, 5.0);
      CHECK(column_profile(g, t, grid).integral() == doctest::Approx(4e4).epsilon(1e-6));
      CHECK(column_profile(g, t, grid, ProfileModel::Boltzmann, 2).integral() == doctest::Approx(4e4).epsilon(1e-6));
    }
    const auto p = density_profile_3d(g, 64, 4.0);
    CHECK(p.integral() == doctest::Approx(4e4).epsilon(1e-4));
  }

  TEST_CASE("hot clouds follow the Boltzmann column density")
  {
    const auto trap = HarmonicTrap::from_hz(823, 46, 823);
    const auto g = TrappedGasState::from_reduced_temperature(K40(), trap, 4e4, 8.0);
    oracle::Gen gen(9);
    for (int i = 0; i < 10; ++i) {
      const double t = gen.uniform(0.0, 0.02);
      const double rx = cloud_radius(trap.omega_x, g.T(), g.mass(), t);
      const double ry = cloud_radius(trap.omega_y, g.T(), g.mass(), t);
      const double x = gen.uniform(-1.5, 1.5) * rx, y = gen.uniform(-1.5, 1.5) * ry;
      const double b = column_density_boltzmann(4e4, g.T(), trap, g.mass(), t, x, y);
      const double gauss = 4e4 / (kTwoPi * rx * ry) * std::exp(-0.5 * (x * x / (rx * rx) + y * y / (ry * ry)));
      CHECK(b == doctest::Approx(gauss).epsilon(1e-12));
      CHECK(column_density_fermi(g, t, x, y) == doctest::Approx(b).epsilon(2e-3));
    }
  }

  TEST_CASE("profile does not depend on the thread count")
  {
    const auto g = TrappedGasState::from_reduced_temperature(K40(), HarmonicTrap::from_hz(823, 46, 823), 4e4, 0.2);
    const auto grid = column_grid(g, 0.01, 64);
    CHECK(column_profile(g, 0.01, grid, ProfileModel::Fermi, 1).values
          == column_profile(g, 0.01, grid, ProfileModel::Fermi, 3).values);
  }

  TEST_CASE("raster round trip")
  {
    Raster r;
    r.grid = Grid2D{ 3, 2, 1.5e-6, 2.5e-6 };
    r.values = { 1.0, -2.0, 1e-300, 3.141592653589793, 0.0, 7e22 };
    std::stringstream ss;
    write_raster_binary(ss, r);
    CHECK(ss.str().size() == 32 + 6 * 8);
    const auto back = read_raster_binary(ss);
    CHECK(back.grid.nx == 3);
    CHECK(back.grid.pitch_y == r.grid.pitch_y);
    CHECK(back.values == r.values);
    CHECK(r.grid.x(0) == doctest::Approx(-1.5e-6));
    CHECK(r.grid.x(2) == doctest::Approx(1.5e-6));

    std::stringstream bad("NOTARASTER000000000000000000000000000000");
    CHECK(error_code_of([&] { read_raster_binary(bad); }) == ErrorCode::Parse);
    std::stringstream shortfile;
    write_raster_binary(shortfile, r);
    std::stringstream cut(shortfile.str().substr(0, 40));
    CHECK(error_code_of([&] { read_raster_binary(cut); }) == ErrorCode::Parse);
    CHECK(error_code_of([] { read_raster_binary(std::string("/nonexistent/x.bin")); }) == ErrorCode::Io);
  }

  TEST_CASE("bad arguments")
  {
    const auto g = TrappedGasState::from_reduced_temperature(K40(), HarmonicTrap::from_hz(100, 100, 100), 1e3, 0.5);
    CHECK(error_code_of([] { tof_rescale(HarmonicTrap::from_hz(1, 1, 1), -1.0); }) == ErrorCode::Domain);
    CHECK(error_code_of([&] { column_grid(g, 0.0, 1); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { uniform_density_zero_T(-1.0, 1.0); }) == ErrorCode::Domain);
  }
}
