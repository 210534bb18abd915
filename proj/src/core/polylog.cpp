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

#include "polylog.hpp"
#include "constants.hpp"
#include "error.hpp"
#include "numerics.hpp"

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <array>
#include <cmath>
#include <sstream>

namespace fermichip::polylog {

  namespace {

    void check_order( double n )
    {
      if (!(n >= 0.5)) {
        std::ostringstream ss;
        ss << "polylog order " << n << " below 1/2";
        fail(ErrorCode::Domain, ss.str());
      }
    }

    // 1/Gamma(x), zero at the poles.
    double rgamma( double x )
    {
      if (x <= 0.0 && x == std::floor(x))
        return 0.0;
      return 1.0 / std::tgamma(x);
    }

    // eta(2k) = (1 - 2^{1-2k}) zeta(2k), eta(0) = 1/2.
    const std::array<double, 28>& eta_even()
    {
      static const std::array<double, 28> table = [] {
        std::array<double, 28> t{};
        t[0] = 0.5;
        for (int k = 1; k < 28; ++k)
          t[k] = (1.0 - std::ldexp(1.0, 1 - 2 * k)) * boost::math::zeta(double(2 * k));
        return t;
      }();
      return table;
    }

    // Li_2(1 - e^{-u}) = sum_k B_k u^{k+1}/(k+1)!, |u| < 2 pi (B_1 = -1/2).
    double dilog_bernoulli( double u )
    {
      double sum = u - 0.25 * u * u;
      double upow = u;       // u^{k+1} / (k+1)! built incrementally
      double fact = 1.0;
      for (int k = 1; k <= 15; ++k) {
        // term for B_{2k}: u^{2k+1}/(2k+1)!
        upow *= u * u;
        fact *= double(2 * k) * double(2 * k + 1);
        double term = boost::math::bernoulli_b2n<double>(k) * upow / fact;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum))
          break;
      }
      return sum;
    }

    double fermi_fn2_log( double x )
    {
      if (x <= std::log(regime::series_max_z))
        return regime::alternating_series(2.0, std::exp(x));
      if (x <= std::log(2.0)) {
        // Landen: f_2(Z) = Li_2(Z/(1+Z)) + ln^2(1+Z)/2
        const double u = std::log1p(std::exp(x));
        return dilog_bernoulli(u) + 0.5 * u * u;
      }
      // Inversion: f_2(Z) = pi^2/6 + ln^2(Z)/2 - f_2(1/Z)
      return kPi * kPi / 6.0 + 0.5 * x * x - regime::alternating_series(2.0, std::exp(-x));
    }

  }

  namespace regime {

    double alternating_series( double n, double z )
    {
      if (z == 0.0)
        return 0.0;
      double sum = 0.0;
      double zpow = 1.0;
      for (int j = 1; j < 10000; ++j) {
        zpow *= z;
        double term = zpow * std::pow(double(j), -n);
        sum += (j % 2 ? term : -term);
        // term == 0 covers subnormal z, where 1e-17 * sum underflows too
        if (term == 0.0 || term < 1e-17 * std::abs(sum))
          return sum;
      }
      fail(ErrorCode::Convergence, "alternating polylog series did not converge (z too large)");
    }

    double quadrature( double n, double log_z )
    {
      // a = u^2 removes the a^{n-1} endpoint singularity for n >= 1/2.
      const double p = 2.0 * n - 1.0;
      auto integrand = [p, log_z]( double u ) {
        const double e = u * u - log_z;
        const double occ = e > 0.0 ? std::exp(-e) / (1.0 + std::exp(-e)) : 1.0 / (1.0 + std::exp(e));
        return (p == 0.0 ? 1.0 : std::pow(u, p)) * occ;
      };
      const double knee = std::sqrt(std::max(log_z, 0.0));
      const double umax = std::sqrt(std::max(log_z, 0.0) + 60.0);
      numerics::Tolerance tol{ 1e-14, 1e-12 };
      double total = 0.0;
      if (knee > 0.0) {
        // Resolve the Fermi step separately from the flat interior.
        const double inner = log_z > 8.0 ? std::sqrt(log_z - 6.0) : 0.0;
        if (inner > 0.0)
          total += numerics::integrate_singular(integrand, 0.0, inner, tol);
        const double outer = std::sqrt(log_z + 6.0);
        total += inner > 0.0 ? numerics::integrate(integrand, inner, outer, tol)
                             : numerics::integrate_singular(integrand, 0.0, outer, tol);
        total += numerics::integrate(integrand, outer, umax, tol);
      } else {
        total += numerics::integrate_singular(integrand, 0.0, 2.0, tol);
        total += numerics::integrate(integrand, 2.0, umax, tol);
      }
      return 2.0 * total * rgamma(n);
    }

    double sommerfeld( double n, double log_z )
    {
      require(log_z > 0.0, ErrorCode::Domain, "Sommerfeld expansion needs log Z > 0");
      const double x = log_z;
      const auto& eta = eta_even();
      double sum = 0.0;
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k < int(eta.size()); ++k) {
        const double term = 2.0 * eta[k] * std::pow(x, n - 2.0 * k) * rgamma(n + 1.0 - 2.0 * k);
        if (k > 1 && std::abs(term) > std::abs(prev) && prev != 0.0)
          break;   // asymptotic series started to grow
        sum += term;
        if (term != 0.0)
          prev = term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && term != 0.0)
          break;
      }
      // Exponentially small reflection term; exact for integer n, zero for
      // half-integer n.
      const double c = std::cos(kPi * n);
      if (std::abs(c) > 1e-15)
        sum -= c * alternating_series(n, std::exp(-x));
      return sum;
    }

    double evaluate( double n, double log_z )
    {
      check_order(n);
      if (log_z <= std::log(series_max_z))
        return alternating_series(n, std::exp(log_z));
      if (log_z < sommerfeld_min_log_z)
        return quadrature(n, log_z);
      return sommerfeld(n, log_z);
    }

  }

  double fermi_fn_log( double n, double log_z )
  {
    check_order(n);
    require(!std::isnan(log_z), ErrorCode::Domain, "log fugacity is NaN");
    if (log_z == -std::numeric_limits<double>::infinity())
      return 0.0;
    if (n == 1.0)
      return log_z > 0.0 ? log_z + std::log1p(std::exp(-log_z)) : std::log1p(std::exp(log_z));
    if (n == 2.0)
      return fermi_fn2_log(log_z);
    return regime::evaluate(n, log_z);
  }

  double fermi_fn( double n, double z )
  {
    check_order(n);
    if (!(z > 0.0)) {
      std::ostringstream ss;
      ss << "Fermi function needs Z > 0 (got " << z << ")";
      fail(ErrorCode::Domain, ss.str());
    }
    return fermi_fn_log(n, std::log(z));
  }

  double bose_fn( double n, double z )
  {
    check_order(n);
    require(z > 0.0 && z <= 1.0, ErrorCode::Domain, "Bose function needs 0 < Z <= 1");
    require(z < 1.0 || n > 1.0, ErrorCode::Domain, "g_n(1) diverges for n <= 1");
    if (z <= regime::series_max_z) {
      double sum = 0.0;
      double zpow = 1.0;
      for (int j = 1; j < 200; ++j) {
        zpow *= z;
        double term = zpow * std::pow(double(j), -n);
        sum += term;
        if (term < 1e-17 * sum)
          break;
      }
      return sum;
    }
    // Direct sum of the first J terms, Euler-Maclaurin for the tail
    // sum_{j>=J} e^{-a j} j^{-n}, a = -ln Z.
    constexpr int J = 32;
    const double a = -std::log(z);
    double sum = 0.0;
    for (int j = 1; j < J; ++j)
      sum += std::exp(-a * j) * std::pow(double(j), -n);

    double tail_integral;
    if (a == 0.0) {
      tail_integral = std::pow(double(J), 1.0 - n) / (n - 1.0);
    } else {
      // x = J e^s
      auto g = [a, n]( double s ) {
        const double x = J * std::exp(s);
        return std::exp((1.0 - n) * s - a * x + a * J);
      };
      tail_integral = std::pow(double(J), 1.0 - n) * std::exp(-a * J)
                      * numerics::integrate(g, 0.0, std::numeric_limits<double>::infinity(),
                                            { 1e-16, 1e-13 });
    }

    // m-th derivative of e^{-a x} x^{-n} at x = J.
    auto deriv = [a, n]( int m ) {
      double total = 0.0;
      double binom = 1.0;
      for (int i = 0; i <= m; ++i) {
        if (i > 0)
          binom *= double(m - i + 1) / double(i);
        double rising = 1.0;   // n (n+1) ... (n+i-1)
        for (int q = 0; q < i; ++q)
          rising *= n + q;
        const double xpart = (i % 2 ? -rising : rising) * std::pow(double(J), -n - i);
        const double apart = std::pow(-a, m - i);
        total += binom * apart * xpart;
      }
      return total * std::exp(-a * J);
    };

    double tail = tail_integral + 0.5 * std::exp(-a * J) * std::pow(double(J), -n);
    double fact = 1.0;
    for (int k = 1; k <= 5; ++k) {
      fact *= double(2 * k - 1) * double(2 * k);
      tail -= boost::math::bernoulli_b2n<double>(k) / fact * deriv(2 * k - 1);
    }
    return sum + tail;
  }

  double fermi_fn_degenerate_limit( double n, double beta_mu )
  {
    check_order(n);
    require(beta_mu > 0.0, ErrorCode::Domain, "degenerate limit needs beta mu > 0");
    return std::pow(beta_mu, n) / std::tgamma(n + 1.0);
  }

  GaussianReduction gaussian_reduction_check( double n, double c )
  {
    check_order(n);
    require(c > 0.0, ErrorCode::Domain, "Gaussian reduction needs C > 0");
    const double log_c = std::log(c);
    auto integrand = [n, log_c]( double x ) { return fermi_fn_log(n, log_c - x * x); };
    const double knee = std::sqrt(std::max(log_c, 0.0));
    const double xmax = std::sqrt(std::max(log_c, 0.0) + 60.0);
    numerics::Tolerance tol{ 1e-13, 1e-11 };
    double half = 0.0;
    if (knee > 0.0) {
      half += numerics::integrate(integrand, 0.0, knee, tol);
      half += numerics::integrate(integrand, knee, xmax, tol);
    } else {
      half += numerics::integrate(integrand, 0.0, xmax, tol);
    }
    return { 2.0 * half, std::sqrt(kPi) * fermi_fn_log(n + 0.5, log_c) };
  }

}
