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
#include "oracles.hpp"
#include "polylog.hpp"

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fermichip;

TEST_SUITE("polylog") {

  TEST_CASE("small fugacity agrees with the alternating series")
  {
    for (double n : { 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0 })
      for (double z : { 1e-6, 0.01, 0.3, 0.5, 0.8, 0.95 }) {
        CAPTURE(n);
        CAPTURE(z);
        CHECK(polylog::fermi_fn(n, z) == doctest::Approx(oracle::fermi_series(n, z)).epsilon(1e-12));
      }
  }

  TEST_CASE("agrees with direct quadrature across the degenerate range")
  {
    for (double n : { 0.5, 1.5, 2.5, 3.0, 4.0 })
      for (double lz : { -3.0, 0.0, 2.0, 8.0, 19.0, 21.0, 45.0 }) {
        CAPTURE(n);
        CAPTURE(lz);
        CHECK(polylog::fermi_fn_log(n, lz) == doctest::Approx(oracle::fermi_integral(n, lz)).epsilon(1e-9));
      }
  }

  TEST_CASE("closed forms of orders one and two")
  {
    for (double lz : { -20.0, -1.0, 0.0, 0.7, 5.0, 30.0, 300.0 }) {
      CAPTURE(lz);
      const double f1 = lz > 30 ? lz + std::log1p(std::exp(-lz)) : std::log1p(std::exp(lz));
      CHECK(polylog::fermi_fn_log(1.0, lz) == doctest::Approx(f1).epsilon(1e-14));
    }
    // -Li_2(-z) - Li_2(-1/z) = pi^2/6 + ln^2(z)/2
    oracle::Gen gen(11);
    for (int i = 0; i < 50; ++i) {
      const double lz = gen.uniform(-30.0, 30.0);
      const double lhs = polylog::fermi_fn_log(2.0, lz) + polylog::fermi_fn_log(2.0, -lz);
      CHECK(lhs == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0 + 0.5 * lz * lz).epsilon(1e-13));
    }
  }

  TEST_CASE("value at Z = 1 is the Dirichlet eta function")
  {
    for (double n : { 1.5, 2.0, 2.5, 3.0, 4.0 }) {
      const double eta = (1.0 - std::pow(2.0, 1.0 - n)) * boost::math::zeta(n);
      CHECK(polylog::fermi_fn(n, 1.0) == doctest::Approx(eta).epsilon(1e-12));
    }
    CHECK(polylog::fermi_fn(1.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("Bose functions")
  {
    for (double z : { 0.1, 0.5, 0.9 })
      CHECK(polylog::bose_fn(1.5, z) == doctest::Approx(oracle::bose_series(1.5, z)).epsilon(1e-12));
    CHECK(polylog::bose_fn(1.5, 1.0) == doctest::Approx(boost::math::zeta(1.5)).epsilon(1e-10));
    CHECK(polylog::bose_fn(3.0, 1.0) == doctest::Approx(boost::math::zeta(3.0)).epsilon(1e-12));
    CHECK(error_code_of([] { polylog::bose_fn(1.5, 1.01); }) == ErrorCode::Domain);
  }

  TEST_CASE("derivative in ln Z lowers the order by one")
  {
    oracle::Gen gen(2024);
    const std::vector<double> orders{ 1.5, 2.0, 2.5, 3.0, 3.5, 4.0 };
    for (int i = 0; i < 200; ++i) {
      const double n = orders[gen.integer(0, int(orders.size()) - 1)];
      const double lz = gen.uniform(-8.0, 60.0);
      const double h = 1e-4 * std::max(1.0, std::abs(lz));
      const double d = (polylog::fermi_fn_log(n, lz + h) - polylog::fermi_fn_log(n, lz - h)) / (2 * h);
      CAPTURE(n);
      CAPTURE(lz);
      CHECK(d == doctest::Approx(polylog::fermi_fn_log(n - 1.0, lz)).epsilon(1e-6));
    }
  }

  TEST_CASE("monotone and positive in the fugacity")
  {
    oracle::Gen gen(5);
    for (int i = 0; i < 300; ++i) {
      const double n = gen.uniform(0.5, 5.0);
      const double a = gen.uniform(-30.0, 80.0), b = gen.uniform(-30.0, 80.0);
      const double fa = polylog::fermi_fn_log(n, std::min(a, b));
      const double fb = polylog::fermi_fn_log(n, std::max(a, b));
      CHECK(fa > 0.0);
      CHECK(fa <= fb);
    }
  }

  TEST_CASE("evaluation routes agree on their seams")
  {
    for (double n : { 0.5, 1.5, 2.5, 3.0, 4.0 }) {
      const double z = polylog::regime::series_max_z;
      const double q = polylog::regime::quadrature(n, std::log(z));
      CHECK(polylog::regime::alternating_series(n, z) == doctest::Approx(q).epsilon(1e-10));
      const double lz = polylog::regime::sommerfeld_min_log_z;
      CHECK(polylog::regime::sommerfeld(n, lz) == doctest::Approx(polylog::regime::quadrature(n, lz)).epsilon(1e-9));
    }
  }

  TEST_CASE("degenerate limit is the leading Sommerfeld term")
  {
    for (double n : { 1.5, 3.0 }) {
      const double x = 200.0;
      const double lead = std::pow(x, n) / std::tgamma(n + 1.0);
      CHECK(polylog::fermi_fn_degenerate_limit(n, x) == doctest::Approx(lead).epsilon(1e-14));
      // first correction n(n-1) pi^2 / (6 x^2)
      const double corr = 1.0 + n * (n - 1.0) * std::numbers::pi * std::numbers::pi / (6.0 * x * x);
      CHECK(polylog::fermi_fn_log(n, x) == doctest::Approx(lead * corr).epsilon(1e-8));
    }
  }

  TEST_CASE("integrating over a Gaussian raises the order by one half")
  {
    oracle::Gen gen(77);
    for (int i = 0; i < 10; ++i) {
      const double n = gen.uniform(0.5, 3.0);
      const double lc = gen.uniform(-4.0, 12.0);
      const double L = std::sqrt(std::max(lc, 0.0) + 40.0);
      const double lhs = oracle::simpson([&]( double x ) { return polylog::fermi_fn_log(n, lc - x * x); }, -L, L, 4000);
      CHECK(lhs == doctest::Approx(std::sqrt(std::numbers::pi) * polylog::fermi_fn_log(n + 0.5, lc)).epsilon(1e-8));
      const auto r = polylog::gaussian_reduction_check(n, std::exp(lc));
      CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-6));
    }
  }

  TEST_CASE("orders below one half are rejected")
  {
    CHECK(error_code_of([] { polylog::fermi_fn(0.2, 1.0); }) == ErrorCode::Domain);
    CHECK(error_code_of([] { polylog::fermi_fn(1.5, -0.5); }) == ErrorCode::Domain);
  }
}
