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

#include "thermo.hpp"
#include "error.hpp"
#include "format.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "polylog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fermichip {

  double HarmonicTrap::omega_bar() const
  {
    return std::cbrt(omega_x * omega_y * omega_z);
  }

  HarmonicTrap HarmonicTrap::from_hz( double fx, double fy, double fz )
  {
    return { units::hz_to_angular(fx), units::hz_to_angular(fy), units::hz_to_angular(fz), std::nullopt };
  }

  void validate( const HarmonicTrap& t )
  {
    require(t.omega_x > 0.0 && t.omega_y > 0.0 && t.omega_z > 0.0, ErrorCode::InvalidArgument,
            "trap frequencies must be positive");
    require(!t.trap_depth || *t.trap_depth > 0.0, ErrorCode::InvalidArgument,
            "trap depth must be positive when given");
  }

  double occupation( double epsilon, double mu, double T )
  {
    require(T > 0.0, ErrorCode::Domain, "occupation needs T > 0");
    if (mu == -std::numeric_limits<double>::infinity())
      return 0.0;
    const double x = (epsilon - mu) / (constants.k_B * T);
    if (x > 0.0) {
      const double e = std::exp(-x);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
  }

  double fermi_energy( double N, const HarmonicTrap& trap )
  {
    validate(trap);
    require(N >= 1.0, ErrorCode::Domain, "Fermi energy needs N >= 1");
    return constants.hbar * trap.omega_bar() * std::cbrt(6.0 * N);
  }

  double atom_number_for_fermi_energy( double E_F, const HarmonicTrap& trap )
  {
    validate(trap);
    const double x = E_F / (constants.hbar * trap.omega_bar());
    return x * x * x / 6.0;
  }

  double log_fugacity_from_reduced_temperature( double t )
  {
    require(t > 0.0 && std::isfinite(t), ErrorCode::Domain, "reduced temperature must be positive");
    // Solve ln(6 f_3(Z)) = -3 ln t in x = ln Z.
    const double rhs = -3.0 * std::log(t);
    auto g = [rhs]( double x ) { return std::log(6.0 * polylog::fermi_fn_log(3.0, x)) - rhs; };
    // Z = 1 sits at t = (6 f_3(1))^{-1/3} ~ 0.57.
    const double boltzmann = -std::log(6.0) + rhs;   // ln Z for Z << 1
    double lo, hi;
    if (g(0.0) >= 0.0) {
      lo = std::min(-690.0, boltzmann - 1.0);
      hi = 0.0;
    } else {
      lo = 0.0;
      hi = 3.0 / t;
    }
    const double x = numerics::find_root(g, lo, hi, 1e-14, 1e-15);
    return x;
  }

  double fugacity_from_reduced_temperature( double t )
  {
    return std::exp(log_fugacity_from_reduced_temperature(t));
  }

  double reduced_temperature_from_log_fugacity( double log_z )
  {
    require(std::isfinite(log_z), ErrorCode::Domain, "log fugacity must be finite");
    return std::pow(6.0 * polylog::fermi_fn_log(3.0, log_z), -1.0 / 3.0);
  }

  double chemical_potential_approx( double t, MuRegime regime )
  {
    require(t >= 0.0, ErrorCode::Domain, "reduced temperature must be non-negative");
    if (regime == MuRegime::Low)
      return 1.0 - kPi * kPi / 3.0 * t * t;
    require(t > 0.0, ErrorCode::Domain, "high-temperature form needs t > 0");
    return -t * std::log(6.0 * t * t * t);
  }

  double chemical_potential_exact( double t )
  {
    return t * log_fugacity_from_reduced_temperature(t);
  }

  namespace {
    double thermal_ratio_cubed( const HarmonicTrap& trap, double T )
    {
      const double x = constants.k_B * T / (constants.hbar * trap.omega_bar());
      return x * x * x;
    }
  }

  double atom_number( const HarmonicTrap& trap, double T, double log_z )
  {
    validate(trap);
    require(T > 0.0, ErrorCode::Domain, "temperature must be positive");
    return thermal_ratio_cubed(trap, T) * polylog::fermi_fn_log(3.0, log_z);
  }

  double total_energy( const HarmonicTrap& trap, double T, double log_z )
  {
    validate(trap);
    require(T > 0.0, ErrorCode::Domain, "temperature must be positive");
    return 3.0 * constants.k_B * T * thermal_ratio_cubed(trap, T) * polylog::fermi_fn_log(4.0, log_z);
  }

  TrappedGasState TrappedGasState::make( const SpinState& spin, const HarmonicTrap& trap, double N, double T )
  {
    validate(spin);
    validate(trap);
    require(N >= 1.0, ErrorCode::Domain, "atom number must be >= 1");
    require(T > 0.0 && std::isfinite(T), ErrorCode::Domain, "temperature must be positive");
    TrappedGasState s;
    s.m_spin = spin;
    s.m_trap = trap;
    s.m_N = N;
    s.m_T = T;
    s.m_E_F = fermi_energy(N, trap);
    s.m_log_z = log_fugacity_from_reduced_temperature(T / s.T_F());
    return s;
  }

  TrappedGasState TrappedGasState::from_reduced_temperature( const SpinState& spin, const HarmonicTrap& trap,
                                                             double N, double t )
  {
    require(t > 0.0, ErrorCode::Domain, "reduced temperature must be positive");
    const double T_F = fermi_energy(N, trap) / constants.k_B;
    return make(spin, trap, N, t * T_F);
  }

  double TrappedGasState::fugacity() const { return std::exp(m_log_z); }

  double TrappedGasState::thermal_wavelength() const
  {
    return std::sqrt(kTwoPi * constants.hbar * constants.hbar / (mass() * constants.k_B * m_T));
  }

  double total_energy( const TrappedGasState& s )
  {
    return total_energy(s.trap(), s.T(), s.log_z());
  }

  double energy_per_particle( const TrappedGasState& s )
  {
    return 3.0 * constants.k_B * s.T() * polylog::fermi_fn_log(4.0, s.log_z())
           / polylog::fermi_fn_log(3.0, s.log_z());
  }

  double degeneracy_parameter( const TrappedGasState& s )
  {
    return degeneracy_parameter_fermi(s.log_z());
  }

  double degeneracy_parameter_fermi( double log_z )
  {
    return polylog::fermi_fn_log(1.5, log_z);
  }

  double degeneracy_parameter_bose( double z )
  {
    return polylog::bose_fn(1.5, z);
  }

  Capacity1D capacity_1d( const HarmonicTrap& trap, double tol )
  {
    validate(trap);
    const double w[3] = { trap.omega_x, trap.omega_y, trap.omega_z };
    // The axial axis is the one whose two partners agree.
    for (int ax = 0; ax < 3; ++ax) {
      const double a = w[(ax + 1) % 3];
      const double b = w[(ax + 2) % 3];
      if (std::abs(a - b) <= tol * std::max(a, b)) {
        const double perp = std::sqrt(a * b);
        if (perp >= w[ax] * (1.0 - 1e-12)) {
          Capacity1D c;
          c.ratio = perp / w[ax];
          c.whole_atoms = long(std::floor(c.ratio + 1e-12));
          c.axial_axis = ax;
          return c;
        }
      }
    }
    std::ostringstream ss;
    ss << "trap is not axially symmetric within " << tol << " (w = " << w[0] << ", " << w[1] << ", "
       << w[2] << " rad/s)";
    fail(ErrorCode::InvalidArgument, ss.str());
  }

  namespace {

    double origin_offset( const HarmonicTrap& trap, EnergyOrigin origin )
    {
      if (origin == EnergyOrigin::GroundState)
        return 0.0;
      return 0.5 * constants.hbar * (trap.omega_x + trap.omega_y + trap.omega_z);
    }

    bool isotropic( const HarmonicTrap& t )
    {
      return std::abs(t.omega_x - t.omega_y) <= 1e-12 * t.omega_x
             && std::abs(t.omega_x - t.omega_z) <= 1e-12 * t.omega_x;
    }

  }

  long discrete_sum_cutoff( const HarmonicTrap& trap, double mu, double T, EnergyOrigin origin )
  {
    validate(trap);
    require(T > 0.0, ErrorCode::Domain, "temperature must be positive");
    if (mu == -std::numeric_limits<double>::infinity())
      return 1;
    const double wmin = std::min({ trap.omega_x, trap.omega_y, trap.omega_z });
    // occupancy < 1e-12 once eps - mu > kT ln(1e12)
    const double eps = mu + constants.k_B * T * std::log(1e12) - origin_offset(trap, origin);
    const double n = std::ceil(eps / (constants.hbar * wmin)) + 2.0;
    return std::max(1L, long(n));
  }

  DiscreteSums discrete_sum_oracle( const HarmonicTrap& trap, double mu, double T, long cutoff,
                                    EnergyOrigin origin )
  {
    validate(trap);
    require(T > 0.0, ErrorCode::Domain, "temperature must be positive");
    require(cutoff >= 1, ErrorCode::InvalidArgument, "cutoff must be >= 1");
    DiscreteSums out;
    if (mu == -std::numeric_limits<double>::infinity())
      return out;

    const double hb = constants.hbar;
    const double e0 = origin_offset(trap, origin);
    const double wmin = std::min({ trap.omega_x, trap.omega_y, trap.omega_z });
    out.tail_occupancy = occupation(e0 + hb * wmin * double(cutoff - 1), mu, T);
    if (out.tail_occupancy > 1e-12) {
      std::ostringstream ss;
      ss.precision(3);
      ss << "discrete-sum cutoff " << cutoff << " too small: edge occupancy " << out.tail_occupancy
         << " (need < 1e-12, try cutoff >= " << discrete_sum_cutoff(trap, mu, T, origin) << ")";
      fail(ErrorCode::InvalidArgument, ss.str());
    }

    long double N = 0.0L;
    long double E = 0.0L;
    if (isotropic(trap)) {
      // Shell n holds (n+1)(n+2)/2 states.
      for (long n = 0; n < cutoff; ++n) {
        const double eps = e0 + hb * trap.omega_x * double(n);
        const double occ = occupation(eps, mu, T);
        const long double g = 0.5L * (n + 1) * (n + 2);
        N += g * occ;
        E += g * occ * eps;
      }
    } else {
      // Terms below this are dropped; the total they can carry is bounded by
      // the edge-occupancy check above times the level count.
      const double negligible = 1e-30;
      for (long nx = 0; nx < cutoff; ++nx) {
        const double ex = e0 + hb * trap.omega_x * double(nx);
        if (occupation(ex, mu, T) < negligible)
          break;
        for (long ny = 0; ny < cutoff; ++ny) {
          const double exy = ex + hb * trap.omega_y * double(ny);
          if (occupation(exy, mu, T) < negligible)
            break;
          for (long nz = 0; nz < cutoff; ++nz) {
            const double eps = exy + hb * trap.omega_z * double(nz);
            const double occ = occupation(eps, mu, T);
            if (occ < negligible)
              break;
            N += occ;
            E += occ * eps;
          }
        }
      }
    }
    out.N = double(N);
    out.E = double(E);
    return out;
  }

  std::vector<ThermoScanRow> thermo_scan( const std::vector<double>& t_values, unsigned jobs )
  {
    std::vector<ThermoScanRow> rows(t_values.size());
    auto work = [&]( std::size_t i ) {
      const double t = t_values[i];
      ThermoScanRow& r = rows[i];
      r.t = t;
      r.log_z = log_fugacity_from_reduced_temperature(t);
      r.mu_over_EF = t * r.log_z;
      r.E_per_N_over_EF = 3.0 * t * polylog::fermi_fn_log(4.0, r.log_z) / polylog::fermi_fn_log(3.0, r.log_z);
      r.n0_lambda3 = polylog::fermi_fn_log(1.5, r.log_z);
    };
    parallel_for(rows.size(), jobs, work);
    return rows;
  }

  void write_thermo_scan_csv( std::ostream& os, const std::vector<ThermoScanRow>& rows )
  {
    os << "T_over_TF,Z,mu_over_EF,E_per_N_over_EF,n0_lambda3\n";
    for (const auto& r : rows)
      os << fmt17(r.t) << ',' << fmt17(std::exp(r.log_z)) << ',' << fmt17(r.mu_over_EF) << ','
         << fmt17(r.E_per_N_over_EF) << ',' << fmt17(r.n0_lambda3) << '\n';
  }

}
