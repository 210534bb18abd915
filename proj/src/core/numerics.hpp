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

#include "error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <utility>

namespace fermichip::numerics {

  struct Tolerance {
    double abs = 1e-12;
    double rel = 1e-10;
  };

  // Adaptive 31-point Gauss-Kronrod on [a,b] (b may be +inf). Throws
  // ErrorCode::Convergence when the error estimate misses the tolerance.
  template <class F>
  double integrate( F&& f, double a, double b, Tolerance tol = {}, unsigned max_depth = 18 )
  {
    double err = 0.0;
    double l1 = 0.0;
    const double target = std::min(tol.rel, 1e-13);
    double result = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), a, b, max_depth, target, &err, &l1);
    if (!(err <= std::max(tol.abs, tol.rel * std::abs(result)))) {
      std::ostringstream ss;
      ss.precision(3);
      ss << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << result
         << ", error " << err;
      fail(ErrorCode::Convergence, ss.str());
    }
    return result;
  }

  // Double-exponential rule for finite [a,b] with an integrable endpoint
  // singularity (or a singular derivative) at either end.
  template <class F>
  double integrate_singular( F&& f, double a, double b, Tolerance tol = {} )
  {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    double result = rule.integrate(std::forward<F>(f), a, b, std::min(tol.rel, 1e-13), &err, &l1, &levels);
    if (!(err <= std::max(tol.abs, tol.rel * std::abs(result)))) {
      std::ostringstream ss;
      ss.precision(3);
      ss << "tanh-sinh quadrature on [" << a << ", " << b << "] did not converge: estimate "
         << result << ", error " << err;
      fail(ErrorCode::Convergence, ss.str());
    }
    return result;
  }

  // Bracketed root of f on [lo, hi] (TOMS 748). Stops once the bracket is
  // narrower than rel_tol |x| + abs_tol.
  template <class F>
  double find_root( F&& f, double lo, double hi, double rel_tol = 1e-12, double abs_tol = 0.0,
                    std::uintmax_t max_iter = 200 )
  {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
      return lo;
    if (fhi == 0.0)
      return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
      std::ostringstream ss;
      ss << "root not bracketed: f(" << lo << ")=" << flo << ", f(" << hi << ")=" << fhi;
      fail(ErrorCode::Convergence, ss.str());
    }
    std::uintmax_t iters = max_iter;
    auto term = [rel_tol, abs_tol]( double x0, double x1 ) {
      return std::abs(x1 - x0) <= rel_tol * std::max(std::abs(x0), std::abs(x1)) + abs_tol + 1e-300;
    };
    std::pair<double, double> r;
    try {
      r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, term, iters);
    } catch ( const std::exception& e ) {
      fail(ErrorCode::Convergence, std::string("root finder failed: ") + e.what());
    }
    if (iters >= max_iter) {
      std::ostringstream ss;
      ss << "root finder exhausted " << max_iter << " iterations; bracket [" << r.first << ", "
         << r.second << "]";
      fail(ErrorCode::Convergence, ss.str());
    }
    return 0.5 * (r.first + r.second);
  }

}
