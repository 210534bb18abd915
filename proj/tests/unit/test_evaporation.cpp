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
#include "evaporation.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace fermichip;

namespace {
  const SpinState& Rb87() { static const SpinState s = builtin_species().stretched("Rb87"); return s; }
  using K = EffectiveVolumeModel::Kind;

  EffectiveVolumeModel model( K kind )
  {
    EffectiveVolumeModel m;
    m.kind = kind;
    m.omega_bar = kTwoPi * 300.0;
    m.mass = Rb87().mass();
    m.mean_gradient = constants.mu_B * 1.0;   // 1 T/m for mu_B
    m.side = 100e-6;
    return m;
  }
}

TEST_SUITE("evaporation") {

  TEST_CASE("volumes scale as T to the model exponent")
  {
    oracle::Gen gen(81);
    for (K k : { K::SHO, K::Quadrupole3D, K::Box, K::Quad2DBox }) {
      const auto m = model(k);
      for (int i = 0; i < 25; ++i) {
        const double T = gen.log_uniform(1e-7, 1e-2), f = gen.uniform(1.1, 10.0);
        CHECK(effective_volume(m, f * T) / effective_volume(m, T)
              == doctest::Approx(std::pow(f, volume_exponent(k))).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("volumes agree with direct integration of the Boltzmann factor")
  {
    const double T = 50e-6, kT = constants.k_B * T;
    // isotropic harmonic trap
    const auto sho = model(K::SHO);
    const double a = 0.5 * sho.mass * sho.omega_bar * sho.omega_bar;
    const double Rs = 12.0 * std::sqrt(kT / a);
    const double v_sho = oracle::simpson([&]( double r ) { return 4 * kPi * r * r * std::exp(-a * r * r / kT); }, 0, Rs);
    CHECK(effective_volume(sho, T) == doctest::Approx(v_sho).epsilon(1e-9));
    // linear potential F |r|
    const auto q = model(K::Quadrupole3D);
    const double Rq = 60.0 * kT / q.mean_gradient;
    const double v_q = oracle::simpson([&]( double r ) { return 4 * kPi * r * r * std::exp(-q.mean_gradient * r / kT); }, 0, Rq);
    CHECK(effective_volume(q, T) == doctest::Approx(v_q).epsilon(1e-9));
    // two-dimensional quadrupole times a box
    const auto h = model(K::Quad2DBox);
    const double v_h = h.side * oracle::simpson([&]( double r ) { return kTwoPi * r * std::exp(-h.mean_gradient * r / kT); }, 0, Rq);
    CHECK(effective_volume(h, T) == doctest::Approx(v_h).epsilon(1e-9));
    CHECK(effective_volume(model(K::Box), T) == doctest::Approx(1e-12));
  }

  TEST_CASE("loadable atom number")
  {
    const auto m = model(K::SHO);
    LoadingBudget b{ 1e-6, constants.k_B * 1e-3, 4.0, Rb87().mass() };
    const double T = loading_temperature(b);
    CHECK(T == doctest::Approx(250e-6));
    const double N = max_loadable_atoms(b, m);
    CHECK(N == doctest::Approx(1e-6 * effective_volume(m, T) / std::pow(thermal_wavelength(b.mass, T), 3)).epsilon(1e-12));
    // N_max grows as depth^{delta + 3/2}
    LoadingBudget b2 = b;
    b2.depth *= 2.0;
    CHECK(max_loadable_atoms(b2, m) / N == doctest::Approx(std::pow(2.0, 3.0)).epsilon(1e-12));
    b.eta = 0.5;
    CHECK(error_code_of([&] { max_loadable_atoms(b, m); }) == ErrorCode::Domain);
  }

  TEST_CASE("collision rate equals n sigma v with the mean thermal speed")
  {
    oracle::Gen gen(82);
    for (int i = 0; i < 50; ++i) {
      const double T = gen.log_uniform(1e-7, 1e-2), rho = gen.log_uniform(1e-8, 1e-2);
      const double sigma = gen.log_uniform(1e-17, 1e-14);
      CHECK(collision_rate(Rb87().mass(), rho, T, sigma)
            == doctest::Approx(collision_rate_kinetic(Rb87().mass(), rho, T, sigma)).epsilon(1e-12));
    }
  }

  TEST_CASE("minimum start temperature inverts the collision rate")
  {
    oracle::Gen gen(83);
    for (int i = 0; i < 30; ++i) {
      const double rho = gen.log_uniform(1e-8, 1e-4), gamma = gen.uniform(10.0, 1000.0);
      const double a = gen.uniform(1e-9, 1e-8);
      const double T = min_start_temperature(Rb87().mass(), rho, gamma, a);
      CHECK(collision_rate(Rb87().mass(), rho, T, sigma_identical_bosons(a)) == doctest::Approx(gamma).epsilon(1e-12));
      CHECK(min_start_temperature_scaled(rho, gamma, a) == doctest::Approx(T).epsilon(0.03));
    }
  }

  TEST_CASE("s-wave cross-section limits")
  {
    const double a = 5.3e-9;
    CHECK(sigma_swave(a, 0.0) == doctest::Approx(4 * kPi * a * a));
    CHECK(sigma_swave(a, 1e12) == doctest::Approx(4 * kPi / 1e24).epsilon(1e-4));
    CHECK(sigma_identical_bosons(a) == doctest::Approx(8 * kPi * a * a));
  }

  TEST_CASE("current scaling of the loadable atom number")
  {
    const auto f = paper_current_family();
    CHECK(current_scaling_exponent(f, Rb87()) == doctest::Approx(2.5).epsilon(1e-6));
    // doubling the current multiplies N_max by 2^{5/2}
    CHECK(family_max_atoms(f, Rb87(), 2.0 * f.current_ref) / family_max_atoms(f, Rb87(), f.current_ref)
          == doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-9));
  }

  TEST_CASE("presets evaluate")
  {
    for (const auto& name : evaporation_preset_names()) {
      const auto r = evaluate(evaporation_preset(name));
      CAPTURE(name);
      CHECK(r.V_eff > 0.0);
      CHECK(r.N_max > 0.0);
      CHECK(std::isfinite(r.T));
    }
    CHECK(evaluate(evaporation_preset("ioffe-c")).N_max < 1.0);
    CHECK(error_code_of([] { evaporation_preset("nope"); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("invalid models")
  {
    auto m = model(K::SHO);
    m.omega_bar = 0.0;
    CHECK(error_code_of([&] { effective_volume(m, 1e-6); }) == ErrorCode::Domain);
    CHECK(error_code_of([] { effective_volume(model(K::Box), 0.0); }) == ErrorCode::Domain);
  }
}
