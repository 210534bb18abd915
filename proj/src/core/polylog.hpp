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

// Complete Fermi-Dirac and Bose-Einstein integrals of real order n >= 1/2:
//
//   f_n(Z) = -Li_n(-Z) = 1/Gamma(n) \int_0^inf a^{n-1} / (e^a/Z + 1) da
//   g_n(Z) =  Li_n(Z)
//
// Fugacities of a degenerate Fermi gas overflow a double quickly (Z ~ e^{T_F/T}),
// so every Fermi function also has a variant taking log Z.

namespace fermichip::polylog {

  double fermi_fn( double n, double z );
  double fermi_fn_log( double n, double log_z );

  double bose_fn( double n, double z );

  // (beta mu)^n / Gamma(n+1); the T -> 0 limit of f_n(e^{beta mu}).
  double fermi_fn_degenerate_limit( double n, double beta_mu );

  // \int f_n(C e^{-x^2}) dx over the real line, next to sqrt(pi) f_{n+1/2}(C).
  struct GaussianReduction {
    double lhs = 0.0;
    double rhs = 0.0;
  };
  GaussianReduction gaussian_reduction_check( double n, double c );

  // The individual evaluation routes. fermi_fn_log() dispatches to exact
  // closed forms for n = 1, 2 and to regime::evaluate() otherwise.
  namespace regime {
    inline constexpr double series_max_z = 0.5;
    inline constexpr double sommerfeld_min_log_z = 20.0;

    double alternating_series( double n, double z );
    double quadrature( double n, double log_z );
    double sommerfeld( double n, double log_z );
    double evaluate( double n, double log_z );
  }

}
