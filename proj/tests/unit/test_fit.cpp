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
#include "fit.hpp"
#include "oracles.hpp"
#include "polylog.hpp"

#include <algorithm>
#include <cmath>

using namespace fermichip;

namespace {

  const SpinState& K40() { static const SpinState s = builtin_species().stretched("K40"); return s; }
  const HarmonicTrap& trap() { static const HarmonicTrap t = HarmonicTrap::from_hz(823.0, 46.0, 823.0); return t; }
  constexpr double kTof = 10e-3;

  TofImage image( double t, double noise_fraction, std::uint64_t seed, std::uint32_t n = 96,
                  ProfileModel pm = ProfileModel::Fermi )
  {
    const auto g = TrappedGasState::from_reduced_temperature(K40(), trap(), 4e4, t);
    const double peak = pm == ProfileModel::Fermi
                          ? column_density_fermi(g, kTof, 0, 0)
                          : column_density_boltzmann(4e4, g.T(), trap(), g.mass(), kTof, 0, 0);
    auto img = synthesize_tof_image(g, kTof, fit_window(g, kTof, n), noise_fraction * peak, seed, pm);
    img.context = ImageContext{ trap(), g.mass(), kTof };
    return img;
  }

}

TEST_SUITE("fit") {

  TEST_CASE("Gaussian fit recovers a noiseless Boltzmann cloud")
  {
    const auto img = image(3.0, 0.0, 1, 64, ProfileModel::Boltzmann);
    const auto r = fit_gaussian(img);
    const auto g = TrappedGasState::from_reduced_temperature(K40(), trap(), 4e4, 3.0);
    CHECK(r.converged);
    CHECK(r.N == doctest::Approx(4e4).epsilon(1e-6));
    CHECK(r.r_x == doctest::Approx(cloud_radius(trap().omega_x, g.T(), g.mass(), kTof)).epsilon(1e-6));
    CHECK(r.r_y == doctest::Approx(cloud_radius(trap().omega_y, g.T(), g.mass(), kTof)).epsilon(1e-6));
    CHECK(std::abs(r.x0) < 1e-12);
    CHECK(apparent_temperature(r, *img.context) == doctest::Approx(g.T()).epsilon(1e-6));
  }

  TEST_CASE("Fermi-Dirac fit recovers the fugacity of a noiseless degenerate cloud")
  {
    for (double t : { 0.1, 0.3, 1.0 }) {
      const auto img = image(t, 0.0, 1, 64);
      const auto r = fit_fermi_dirac(img);
      CAPTURE(t);
      REQUIRE(r.log_z.has_value());
      CHECK(*r.log_z == doctest::Approx(log_fugacity_from_reduced_temperature(t)).epsilon(1e-5));
      CHECK(r.N == doctest::Approx(4e4).epsilon(1e-5));
      CHECK(*r.t_over_tf == doctest::Approx(t).epsilon(1e-5));
    }
  }

  TEST_CASE("Fermi-Dirac model fits at least as well as the Gaussian")
  {
    double prev_ratio = 1e300;
    for (double t : { 0.1, 0.25, 0.5, 1.0, 2.0 }) {
      const auto img = image(t, 0.02, 17, 64);
      const double cg = fit_gaussian(img).chi2, cf = fit_fermi_dirac(img).chi2;
      CAPTURE(t);
      CHECK(cf <= cg * (1.0 + 1e-9));
      if (t <= 0.5) {
        CHECK(cg / cf < prev_ratio);
        prev_ratio = cg / cf;
      }
    }
  }

  TEST_CASE("analytic and numerical Jacobians agree")
  {
    const auto img = image(0.2, 0.02, 3, 64);
    FitOptions num;
    num.numeric_jacobian = true;
    const auto a = fit_fermi_dirac(img), b = fit_fermi_dirac(img, num);
    CHECK(a.chi2 == doctest::Approx(b.chi2).epsilon(1e-6));
    CHECK(*a.log_z == doctest::Approx(*b.log_z).epsilon(1e-4));
  }

  TEST_CASE("fugacity estimator is unbiased over noise realizations")
  {
    const double t = 0.2;
    const double z_true = std::exp(log_fugacity_from_reduced_temperature(t));
    std::vector<double> z;
    int above = 0;
    const int runs = 50;
    for (int seed = 1; seed <= runs; ++seed) {
      const auto r = fit_fermi_dirac(image(t, 0.02, 1000 + seed, 48));
      z.push_back(std::exp(*r.log_z));
      above += r.N > 4e4;
    }
    std::nth_element(z.begin(), z.begin() + runs / 2, z.end());
    CHECK(z[runs / 2] == doctest::Approx(z_true).epsilon(0.10));
    CHECK(above >= 15);
    CHECK(above <= 35);
  }

  TEST_CASE("synthetic images are reproducible")
  {
    CHECK(image(0.3, 0.02, 5, 32).raster.values == image(0.3, 0.02, 5, 32).raster.values);
    CHECK(image(0.3, 0.02, 5, 32).raster.values != image(0.3, 0.02, 6, 32).raster.values);
  }

  TEST_CASE("residual image is data minus model")
  {
    const auto img = image(0.5, 0.02, 9, 32);
    const auto r = fit_gaussian(img);
    const auto res = residual_image(img, r);
    const auto mod = model_image(img.raster.grid, r);
    for (std::size_t i = 0; i < res.values.size(); i += 37)
      CHECK(res.values[i] == doctest::Approx(img.raster.values[i] - mod.values[i]).scale(1e-6 * img.noise_rms));
  }

  TEST_CASE("apparent temperature curve")
  {
    // ratio is f_4/f_3 and T_app/T_F = t * ratio is increasing in t
    oracle::Gen gen(91);
    for (int i = 0; i < 200; ++i) {
      const double a = gen.log_uniform(0.01, 20.0), b = gen.log_uniform(0.01, 20.0);
      const double lo = std::min(a, b), hi = std::max(a, b);
      CHECK(lo * apparent_temperature_ratio(lo) <= hi * apparent_temperature_ratio(hi));
    }
    const double lz = log_fugacity_from_reduced_temperature(0.7);
    CHECK(apparent_temperature_ratio(0.7)
          == doctest::Approx(polylog::fermi_fn_log(4.0, lz) / polylog::fermi_fn_log(3.0, lz)).epsilon(1e-12));
    CHECK(0.01 * apparent_temperature_ratio(0.01) == doctest::Approx(0.25).epsilon(2e-3));
    CHECK(apparent_temperature_ratio(50.0) == doctest::Approx(1.0).epsilon(1e-3));
    // fitted Gaussian temperature rises with the true temperature
    double prev = 0.0;
    for (double t : { 0.1, 0.3, 0.9 }) {
      const double T = apparent_temperature(image(t, 0.0, 1, 48));
      CHECK(T > prev);
      prev = T;
    }
  }

  TEST_CASE("fit preconditions")
  {
    TofImage empty;
    empty.raster.grid = Grid2D{ 8, 8, 1e-6, 1e-6 };
    empty.raster.values.assign(64, 0.0);
    empty.noise_rms = 1.0;
    CHECK(error_code_of([&] { fit_gaussian(empty); }).has_value());
    TofImage no_ctx = image(0.5, 0.0, 1, 32);
    no_ctx.context.reset();
    CHECK(error_code_of([&] { apparent_temperature(no_ctx); }) == ErrorCode::InvalidArgument);
  }
}
