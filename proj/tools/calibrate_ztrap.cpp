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

// Calibrates the shipped Z-trap geometry: a Z-shaped wire on the chip
// surface (z = 0) plus an in-plane bias. The wire current stays at the
// 2 A ceiling; the bias components and the central-wire length are solved so
// that a stretched K40 atom sees sqrt(w_x w_z) = 2pi 823 Hz, w_y = 2pi 46 Hz
// with the minimum 190 um above the chip. The depth follows and is reported.
//
// Usage: fermichip-calibrate-ztrap [output.json]

#include "field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

using namespace fermichip;

namespace {

  constexpr double kCurrent = 2.0;        // A
  constexpr double kLead = 3e-3;          // m, length of each lead
  constexpr double kHeight = 190e-6;      // m
  const double kOmegaPerp = units::hz_to_angular(823.0);
  const double kOmegaAxial = units::hz_to_angular(46.0);

  // p = (Bx [G], By [G], central length [um])
  WireFieldModel z_trap( const Eigen::Vector3d& p )
  {
    const double L = p[2] * units::micrometre;
    std::vector<WireSegment> s{
      { Vec3(-kLead, -L / 2, 0), Vec3(0, -L / 2, 0), kCurrent },
      { Vec3(0, -L / 2, 0), Vec3(0, L / 2, 0), kCurrent },
      { Vec3(0, L / 2, 0), Vec3(kLead, L / 2, 0), kCurrent },
    };
    return WireFieldModel(s, Vec3(p[0], p[1], 0) * units::gauss);
  }

  struct Probe {
    Vec3 r0;
    double B0;
    TrapFrequencies freq;
  };

  Probe probe( const Eigen::Vector3d& p )
  {
    const auto K = builtin_species().stretched("K40");
    const auto m = z_trap(p);
    PotentialOptions o;
    o.surface = SurfacePlane{};
    const auto mn = find_minimum(m, Vec3(0, 0, kHeight));
    return { mn.position, mn.B0, trap_frequencies(m, K, o, mn.position) };
  }

  Eigen::Vector3d residual( const Eigen::Vector3d& p )
  {
    const auto pr = probe(p);
    const auto& w = pr.freq.omega_lab;
    return { std::log(std::sqrt(w[0] * w[2]) / kOmegaPerp), std::log(w[1] / kOmegaAxial),
             std::log(pr.r0[2] / kHeight) };
  }

}

int main( int argc, char** argv )
{
  Eigen::Vector3d p(-21.0, -6.5, 1800.0);
  bool converged = false;
  for (int it = 0; it < 30 && !converged; ++it) {
    const Eigen::Vector3d r = residual(p);
    std::fprintf(stderr, "iter %2d  Bx=%.6f G  By=%.6f G  L=%.4f um  |r|=%.3e\n", it, p[0], p[1], p[2], r.norm());
    if (r.norm() < 1e-9) {
      converged = true;
      break;
    }
    Eigen::Matrix3d J;
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-5 * std::abs(p[j]);
      Eigen::Vector3d q = p;
      q[j] += h;
      const Eigen::Vector3d up = residual(q);
      q[j] -= 2 * h;
      J.col(j) = (up - residual(q)) / (2 * h);
    }
    Eigen::Vector3d dp = -J.fullPivLu().solve(r);
    for (int j = 0; j < 3; ++j)
      if (std::abs(dp[j]) > 0.2 * std::abs(p[j]))
        dp *= 0.2 * std::abs(p[j]) / std::abs(dp[j]);
    p += dp;
  }
  if (!converged) {
    std::fprintf(stderr, "calibration did not converge\n");
    return 3;
  }

  const auto pr = probe(p);
  const auto K = builtin_species().stretched("K40");
  PotentialOptions o;
  o.surface = SurfacePlane{};
  const auto model = z_trap(p);
  const auto depth = trap_depth(model, K, o, pr.r0);
  const auto& w = pr.freq.omega_lab;
  char note[512];
  std::snprintf(note, sizeof note,
                "Calibrated Z wire at %.1f A with in-plane bias: minimum at %.1f um, B0 = %.3f G, "
                "(w_x, w_y, w_z)/2pi = (%.1f, %.2f, %.1f) Hz and depth k_B x %.3f mK for K40 |9/2,9/2>. "
                "Wire widths and exact chip layout are not known; only these observables are matched.",
                kCurrent, pr.r0[2] * 1e6, pr.B0 / units::gauss, units::angular_to_hz(w[0]),
                units::angular_to_hz(w[1]), units::angular_to_hz(w[2]), depth.temperature_equivalent * 1e3);
  std::fprintf(stderr, "%s\n", note);

  const std::string text = wire_model_to_json_text(model, "paper-z-trap", note, true, Vec3(0, 0, kHeight),
                                                   SurfacePlane{});
  if (argc > 1) {
    std::ofstream os(argv[1]);
    if (!os) {
      std::fprintf(stderr, "cannot write %s\n", argv[1]);
      return 2;
    }
    os << text << '\n';
  } else {
    std::cout << text << '\n';
  }
  return 0;
}
