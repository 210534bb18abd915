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

// Synthetic time-of-flight column-density images and least-squares fits of
// the Gaussian (Boltzmann) and Fermi-Dirac envelopes.

#include "density.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fermichip {

  // What the apparent-temperature conversion needs to know about the image.
  struct ImageContext {
    HarmonicTrap trap;
    double mass = 0.0;   // kg
    double t = 0.0;      // s, expansion time
  };

  struct TofImage {
    Raster raster;                        // atoms/m^2
    double noise_rms = 0.0;               // same units; 0 = noiseless
    std::optional<ImageContext> context;
    // Generating state, when synthetic.
    std::optional<double> true_N;
    std::optional<double> true_T;
    std::optional<double> true_log_z;
  };

  void validate( const TofImage& );

  // column_density_fermi (or the Boltzmann profile) on the grid plus white
  // Gaussian noise of the given RMS. Deterministic for a fixed seed.
  TofImage synthesize_tof_image( const TrappedGasState&, double t, const Grid2D&, double noise_rms,
                                 std::uint64_t seed, ProfileModel = ProfileModel::Fermi, unsigned jobs = 1 );

  // Region of interest used for fits: column_grid with span 2, i.e. +-2
  // thermal radii (times sqrt(ln Z) when degenerate), which holds the whole
  // cloud without a wide empty border diluting chi^2.
  Grid2D fit_window( const TrappedGasState&, double t, std::uint32_t n = 128 );

  enum class FitModel { Gaussian, FermiDirac };
  std::string to_string( FitModel );

  struct FitOptions {
    bool numeric_jacobian = false;   // central differences instead of the analytic Jacobian
    int starts = 3;
    int max_evaluations = 4000;      // per start
    double log_z_min = -40.0;        // bounds on ln Z (Fermi-Dirac)
    double log_z_max = 80.0;
  };

  // Parameter vector order: ln N, ln r_x, ln r_y, x0, y0 [, ln Z].
  struct FitResult {
    FitModel model = FitModel::Gaussian;
    double N = 0.0;
    double r_x = 0.0;   // m
    double r_y = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    std::optional<double> log_z;
    std::optional<double> t_over_tf;   // from 6 f_3(Z) = (T_F/T)^3

    double chi2 = 0.0;
    double reduced_chi2 = 0.0;
    long dof = 0;
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;        // of params, scaled by the reduced chi^2
    double gradient_cosine = 0.0;      // max_j |J_j . r| / (|J_j| |r|)
    bool converged = false;
    int evaluations = 0;
    int best_start = 0;

    bool z_at_lower_bound = false;
    bool z_at_upper_bound = false;
    // 95% interval on Z wider than a decade
    bool z_poorly_constrained = false;
    std::optional<double> log_z_sigma;
  };

  // Throws Convergence when no start converges. Needs >= 100 pixels above
  // 5 noise RMS (or above zero for noiseless images).
  FitResult fit_gaussian( const TofImage&, const FitOptions& = {} );
  FitResult fit_fermi_dirac( const TofImage&, const FitOptions& = {} );
  FitResult fit( const TofImage&, FitModel, const FitOptions& = {} );

  double model_value( const FitResult&, double x, double y );
  Raster model_image( const Grid2D&, const FitResult& );
  // data - model
  Raster residual_image( const TofImage&, const FitResult& );

  // T_app from the Gaussian radius: r_x^2 = (w_x^-2 + t^2) k T_app / M.
  double apparent_temperature( const FitResult& gauss, const ImageContext& );
  // Runs the Gaussian fit; the image needs a context.
  double apparent_temperature( const TofImage&, const FitOptions& = {} );

  // Ideal-gas curve from second moments: T_app / T = f_4(Z) / f_3(Z),
  // which tends to 1 at high T and to T_F/(4T) as T -> 0.
  double apparent_temperature_ratio( double t_over_tf );

}
