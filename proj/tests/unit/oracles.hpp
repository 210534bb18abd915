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

// Reference evaluations written independently of the library code paths:
// brute-force quadrature, plain series and hand-rolled random generators.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace oracle {

  // Composite Simpson rule with n (even) intervals.
  inline double simpson( const std::function<double( double )>& f, double a, double b, int n = 20000 )
  {
    if (n % 2)
      ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
      s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  }

  // f_n(Z) = 1/Gamma(n) int_0^inf x^{n-1} / (e^{x - ln Z} + 1) dx, with x = u^2
  // so the integrand stays smooth for n >= 1/2.
  inline double fermi_integral( double n, double log_z )
  {
    const double umax = std::sqrt(std::max(log_z, 0.0) + 60.0);
    auto g = [&]( double u ) {
      if (u == 0.0)
        return n == 0.5 ? 2.0 / (std::exp(-log_z) + 1.0) : 0.0;
      const double x = u * u;
      const double e = x - log_z;
      const double occ = e > 0 ? std::exp(-e) / (1.0 + std::exp(-e)) : 1.0 / (std::exp(e) + 1.0);
      return 2.0 * std::pow(u, 2.0 * n - 1.0) * occ;
    };
    // resolve the Fermi step near u = sqrt(ln Z)
    const int n_int = 200000;
    return simpson(g, 0.0, umax, n_int) / std::tgamma(n);
  }

  // sum_{k>=1} (-1)^{k+1} z^k / k^n, z < 1
  inline double fermi_series( double n, double z )
  {
    double s = 0.0, p = 1.0;
    for (int k = 1; k < 5000; ++k) {
      p *= z;
      const double term = p / std::pow(double(k), n);
      s += (k % 2 ? term : -term);
      if (term < 1e-18)
        break;
    }
    return s;
  }

  // sum_{k>=1} z^k / k^n, z <= 1 (slow but fine for z < 1 and n > 1 at z = 1
  // with a tail correction).
  inline double bose_series( double n, double z )
  {
    double s = 0.0, p = 1.0;
    const int K = 200000;
    for (int k = 1; k <= K; ++k) {
      p *= z;
      s += p / std::pow(double(k), n);
    }
    if (z == 1.0)   // Euler-Maclaurin tail of k^-n beyond K
      s += std::pow(double(K), 1.0 - n) / (n - 1.0) - 0.5 * std::pow(double(K), -n);
    return s;
  }

  // Small deterministic generator for property tests.
  struct Gen {
    std::mt19937_64 rng;
    explicit Gen( std::uint64_t seed ) : rng(seed) {}
    double uniform( double a, double b ) { return std::uniform_real_distribution<double>(a, b)(rng); }
    double log_uniform( double a, double b ) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer( int a, int b ) { return std::uniform_int_distribution<int>(a, b)(rng); }
  };

}
