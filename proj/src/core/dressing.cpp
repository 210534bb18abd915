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

#include "dressing.hpp"
#include "error.hpp"
#include "format.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fermichip {

  namespace {

    double abs_g( const SpinState& s ) { return std::abs(s.g_F.value()); }

    double rf_perp( const RFField& rf, const Vec3& B, const Vec3& r )
    {
      const Vec3 e = rf.polarization.normalized();
      const Vec3 b = B.normalized();
      // |sin theta| between polarization and the local static field
      return rf.amplitude_at(r) * e.cross(b).norm();
    }

  }

  double RFField::amplitude_at( const Vec3& r ) const
  {
    if (law == Law::Uniform)
      return amplitude;
    const Vec3 u = wire_direction.normalized();
    const Vec3 d = r - wire_point;
    const double dist = (d - d.dot(u) * u).norm();
    require(dist > 0.0, ErrorCode::Domain, "RF amplitude evaluated on the RF wire");
    return amplitude * reference_distance / dist;
  }

  void validate( const RFField& rf )
  {
    require(rf.amplitude >= 0.0 && std::isfinite(rf.amplitude), ErrorCode::Domain, "RF amplitude must be >= 0");
    require(rf.omega > 0.0 && std::isfinite(rf.omega), ErrorCode::Domain, "RF frequency must be > 0");
    require(rf.polarization.norm() > 0.0, ErrorCode::InvalidArgument, "RF polarization must be non-zero");
    if (rf.law == RFField::Law::WireNearField) {
      require(rf.wire_direction.norm() > 0.0, ErrorCode::InvalidArgument, "RF wire direction must be non-zero");
      require(rf.reference_distance > 0.0, ErrorCode::Domain, "RF wire reference distance must be > 0");
    }
  }

  bool rwa_valid( const RFField& rf, double B0 ) { return rf.amplitude < 0.3 * B0; }

  DetuningRabi detuning_and_rabi( const MagneticField& field, const RFField& rf, const SpinState& state,
                                  const Vec3& r )
  {
    const Vec3 B = field.field(r);
    const double b = B.norm();
    require(b > 0.0, ErrorCode::Domain, "static field vanishes; detuning undefined");
    const double g = abs_g(state) * constants.mu_B;
    return { constants.hbar * rf.omega - g * b, 0.5 * g * rf_perp(rf, B, r) };
  }

  std::vector<double> dressed_levels( HalfInt F, double delta, double Omega )
  {
    const double w = std::hypot(delta, Omega);
    std::vector<double> out;
    for (int tw = -F.twice(); tw <= F.twice(); tw += 2)
      out.push_back(0.5 * tw * w);
    return out;
  }

  HalfInt connected_branch( const SpinState& state, double delta, double Omega, int steps )
  {
    require(delta != 0.0, ErrorCode::Ambiguous, "branch connection undefined at zero detuning");
    require(Omega >= 0.0 && steps > 0, ErrorCode::InvalidArgument, "connection needs Omega >= 0 and steps > 0");
    const int dim = state.F.twice() + 1;
    const double F = state.F.value();
    // basis index k <-> m = F - k
    Eigen::MatrixXd Fz = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd Fx = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
      const double m = F - k;
      Fz(k, k) = m;
      if (k + 1 < dim) {
        const double c = 0.5 * std::sqrt(F * (F + 1) - m * (m - 1));
        Fx(k, k + 1) = c;
        Fx(k + 1, k) = c;
      }
    }
    // Scale to O(1) so the tracking is independent of the units.
    const double scale = std::hypot(delta, Omega);
    const double d = delta / scale;
    const double o = Omega / scale;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    const int k0 = int(std::lround(F - state.m_F.value()));
    v[k0] = 1.0;
    double energy = -d * state.m_F.value();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (int i = 1; i <= steps; ++i) {
      const double lam = double(i) / steps;
      es.compute(-d * Fz + lam * o * Fx);
      Eigen::Index best = 0;
      (es.eigenvectors().transpose() * v).cwiseAbs().maxCoeff(&best);
      v = es.eigenvectors().col(best);
      energy = es.eigenvalues()[best];
    }
    const double mp = energy;   // in units of sqrt(delta^2 + Omega^2)
    const int twice = int(std::lround(2.0 * mp));
    require(std::abs(2.0 * mp - twice) < 1e-6, ErrorCode::Ambiguous, "dressed level is not a half-integer multiple");
    return HalfInt::from_twice(twice);
  }

  Vec3 ScanAxis::at( double s ) const { return origin + s * direction.normalized(); }

  double ScanAxis::pitch() const { return samples > 1 ? (s_max - s_min) / double(samples - 1) : 0.0; }

  DressedPotentialScan dressed_potential( const MagneticField& field, const RFField& rf, const SpinState& state,
                                          HalfInt m_F_prime, const ScanAxis& axis, unsigned jobs )
  {
    validate(rf);
    validate(state);
    require(std::abs(m_F_prime.twice()) <= state.F.twice(), ErrorCode::InvalidArgument,
            "|m_F'| must not exceed F");
    require(axis.samples >= 2 && axis.s_max > axis.s_min && axis.direction.norm() > 0.0,
            ErrorCode::InvalidArgument, "scan axis needs >= 2 samples, s_max > s_min and a direction");
    DressedPotentialScan sc;
    sc.state = state;
    sc.m_F_prime = m_F_prime;
    sc.axis = axis;
    const std::size_t n = axis.samples;
    sc.s.resize(n);
    sc.U.resize(n);
    sc.delta.resize(n);
    sc.Omega.resize(n);
    std::vector<double> bdc(n), ratio(n);
    const double h = axis.pitch();
    parallel_for(n, jobs, [&]( std::size_t i ) {
      const double s = i + 1 == n ? axis.s_max : axis.s_min + double(i) * h;
      const Vec3 r = axis.at(s);
      const auto dr = detuning_and_rabi(field, rf, state, r);
      sc.s[i] = s;
      sc.delta[i] = dr.delta;
      sc.Omega[i] = dr.Omega;
      sc.U[i] = m_F_prime.value() * std::hypot(dr.delta, dr.Omega);
      bdc[i] = field.field(r).norm();
      ratio[i] = rf.amplitude_at(r) / bdc[i];
    });
    sc.min_B_dc = *std::min_element(bdc.begin(), bdc.end());
    const double worst = *std::max_element(ratio.begin(), ratio.end());
    require(worst < 1.0, ErrorCode::RwaViolation, "RF amplitude reaches the static field; RWA invalid");
    sc.rwa_warning = worst >= 0.3;
    return sc;
  }

  void verify_scan( const DressedPotentialScan& sc )
  {
    const std::size_t n = sc.s.size();
    require(sc.U.size() == n && sc.delta.size() == n && sc.Omega.size() == n, ErrorCode::InvalidArgument,
            "scan columns differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      const double expect = sc.m_F_prime.value() * std::hypot(sc.delta[i], sc.Omega[i]);
      require(std::abs(sc.U[i] - expect) <= 1e-12 * std::abs(expect) + 1e-300, ErrorCode::InvalidArgument,
              "scan row violates U = m' sqrt(delta^2 + Omega^2)");
      require(sc.Omega[i] >= 0.0, ErrorCode::InvalidArgument, "negative Rabi energy in scan");
    }
  }

  std::string to_string( WellTopology t ) { return t == WellTopology::Double ? "double" : "single"; }

  namespace {

    // Extrema of sampled U(s). Differences below a roundoff floor are
    // treated as flat.
    std::vector<Extremum> find_extrema( const std::vector<double>& s, const std::vector<double>& U )
    {
      std::vector<Extremum> out;
      const std::size_t n = U.size();
      if (n < 3)
        return out;
      double umax = 0.0;
      for (double u : U)
        umax = std::max(umax, std::abs(u));
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * umax;
      int last_sign = 0;
      std::size_t last_k = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double d = U[k + 1] - U[k];
        if (std::abs(d) <= floor)
          continue;
        const int sg = d > 0 ? 1 : -1;
        if (last_sign != 0 && sg != last_sign) {
          const std::size_t i = (last_k + 1 + k) / 2;
          Extremum e{ s[i], U[i], last_sign < 0 };
          if (i > 0 && i + 1 < n) {
            const double den = U[i - 1] - 2.0 * U[i] + U[i + 1];
            const double h = 0.5 * (s[i + 1] - s[i - 1]);
            if (den != 0.0) {
              const double off = std::clamp(0.5 * (U[i - 1] - U[i + 1]) / den, -1.0, 1.0);
              e.s = s[i] + off * h;
              e.U = U[i] - 0.25 * (U[i - 1] - U[i + 1]) * off;
            }
          }
          out.push_back(e);
        }
        last_sign = sg;
        last_k = k;
      }
      return out;
    }

    DoubleWellReport classify( std::vector<Extremum> ext,
                               const std::function<double( double )>& omega_at )
    {
      std::sort(ext.begin(), ext.end(), []( const Extremum& a, const Extremum& b ) { return a.s < b.s; });
      DoubleWellReport rep;
      rep.extrema = ext;
      std::vector<std::size_t> mins;
      for (std::size_t i = 0; i < ext.size(); ++i)
        if (ext[i].minimum)
          mins.push_back(i);
      if (mins.size() == 1) {
        rep.topology = WellTopology::Single;
        rep.wells = { ext[mins[0]].s };
        rep.level_repulsion = { omega_at(ext[mins[0]].s) };
        return rep;
      }
      if (mins.size() == 2) {
        std::vector<std::size_t> maxs;
        for (std::size_t i = mins[0] + 1; i < mins[1]; ++i)
          if (!ext[i].minimum)
            maxs.push_back(i);
        if (maxs.size() == 1) {
          const auto& a = ext[mins[0]];
          const auto& b = ext[mins[1]];
          const auto& m = ext[maxs[0]];
          rep.topology = WellTopology::Double;
          rep.wells = { a.s, b.s };
          rep.separation = std::abs(b.s - a.s);
          rep.saddle = m.s;
          rep.barrier = std::max(0.0, m.U - std::max(a.U, b.U));
          rep.level_repulsion = { omega_at(a.s), omega_at(b.s) };
          return rep;
        }
      }
      fail(ErrorCode::Ambiguous, "well topology ambiguous: " + std::to_string(mins.size()) + " minima found");
    }

    double omega_from_scan( const DressedPotentialScan& sc, double s )
    {
      auto it = std::lower_bound(sc.s.begin(), sc.s.end(), s);
      if (it == sc.s.begin())
        return sc.Omega.front();
      if (it == sc.s.end())
        return sc.Omega.back();
      const std::size_t j = std::size_t(it - sc.s.begin());
      const double f = (s - sc.s[j - 1]) / (sc.s[j] - sc.s[j - 1]);
      return (1.0 - f) * sc.Omega[j - 1] + f * sc.Omega[j];
    }

  }

  DoubleWellReport characterize_wells( const DressedPotentialScan& sc )
  {
    require(sc.s.size() >= 3, ErrorCode::InvalidArgument, "scan too short to characterize");
    double worst = 0.0;
    for (std::size_t i = 1; i < sc.s.size(); ++i)
      worst = std::max(worst, sc.s[i] - sc.s[i - 1]);
    require(worst <= 0.05 * units::micrometre * (1.0 + 1e-9), ErrorCode::InvalidArgument,
            "scan pitch above 0.05 um; refine the scan");
    return classify(find_extrema(sc.s, sc.U), [&]( double s ) { return omega_from_scan(sc, s); });
  }

  DoubleWellReport analyze_wells( const MagneticField& field, const RFField& rf, const SpinState& state,
                                  HalfInt m_F_prime, const ScanAxis& axis, unsigned jobs )
  {
    const auto coarse = dressed_potential(field, rf, state, m_F_prime, axis, jobs);
    const double h = axis.pitch();
    require(h / 10.0 <= 0.05 * units::micrometre * (1.0 + 1e-9), ErrorCode::InvalidArgument,
            "window too wide for 0.05 um refined resolution; add samples");
    std::vector<Extremum> refined;
    for (const auto& e : find_extrema(coarse.s, coarse.U)) {
      ScanAxis fine = axis;
      fine.s_min = e.s - 2.0 * h;
      fine.s_max = e.s + 2.0 * h;
      fine.samples = 41;
      const auto sc = dressed_potential(field, rf, state, m_F_prime, fine, 1);
      auto local = find_extrema(sc.s, sc.U);
      // keep the one matching the coarse extremum
      const Extremum* best = nullptr;
      for (const auto& x : local)
        if (x.minimum == e.minimum && (!best || std::abs(x.s - e.s) < std::abs(best->s - e.s)))
          best = &x;
      refined.push_back(best ? *best : e);
    }
    auto omega_at = [&]( double s ) { return detuning_and_rabi(field, rf, state, axis.at(s)).Omega; };
    return classify(refined, omega_at);
  }

  ResonanceShell resonance_shell( const MagneticField& field, const RFField& rf, const SpinState& state,
                                  const ScanAxis& axis )
  {
    auto delta = [&]( double s ) { return detuning_and_rabi(field, rf, state, axis.at(s)).delta; };
    const double lo = std::max(0.0, axis.s_min);
    require(axis.s_max > lo, ErrorCode::InvalidArgument, "resonance search needs s_max > max(0, s_min)");
    const double d0 = delta(lo);
    const double d1 = delta(axis.s_max);
    require((d0 > 0.0) != (d1 > 0.0), ErrorCode::Domain, "no RF resonance on the scanned half-axis");
    const double s = numerics::find_root(delta, lo, axis.s_max, 1e-12, 1e-15);
    const double dB = field.field(axis.at(s)).norm() - field.field(axis.at(0.0)).norm();
    return { s, magnetic_moment(state) * dB };
  }

  KnifeDepth rf_knife_depth( const SpinState& state, double B0, double omega_rf )
  {
    require(B0 >= 0.0 && omega_rf > 0.0, ErrorCode::Domain, "knife needs B0 >= 0 and w_RF > 0");
    const double excess = constants.hbar * omega_rf - abs_g(state) * constants.mu_B * B0;
    if (excess < 0.0)
      return {};
    const double m = state.moment_factor().value() / abs_g(state);
    return { m * excess, true };
  }

  double rf_knife_frequency( const SpinState& state, double B0, double depth )
  {
    require(depth >= 0.0, ErrorCode::Domain, "knife depth must be >= 0");
    const double m = state.moment_factor().value() / abs_g(state);
    require(m > 0.0, ErrorCode::Domain, "knife needs a trappable state");
    return (depth / m + abs_g(state) * constants.mu_B * B0) / constants.hbar;
  }

  EtaCoefficients eta_coefficients( const SpinState& K, const SpinState& Rb )
  {
    require(Rb.m_F.twice() != 0, ErrorCode::Domain, "eta relation needs m_F(Rb) != 0");
    const Rational mK = to_rational(K.m_F);
    return { (mK / to_rational(Rb.m_F)).normalized(), (mK * (Rb.g_F - K.g_F)).normalized() };
  }

  double eta_relation( const SpinState& K, const SpinState& Rb, double eta_Rb, double B0, double T )
  {
    require(T > 0.0 && B0 >= 0.0, ErrorCode::Domain, "eta relation needs T > 0 and B0 >= 0");
    const auto c = eta_coefficients(K, Rb);
    return c.ratio.value() * eta_Rb + c.field.value() * constants.mu_B * B0 / (constants.k_B * T);
  }

  EtaMinimum eta_min_over_sublevels( const SpinState& K, const SpinState& Rb, double eta_Rb, double B0, double T )
  {
    EtaMinimum best{ std::numeric_limits<double>::infinity(), K.m_F };
    for (int tw = -K.F.twice(); tw <= K.F.twice(); tw += 2) {
      SpinState s = K;
      s.m_F = HalfInt::from_twice(tw);
      if (!s.trappable())
        continue;
      const double eta = eta_relation(s, Rb, eta_Rb, B0, T);
      if (eta < best.eta)
        best = { eta, s.m_F };
    }
    require(std::isfinite(best.eta), ErrorCode::Domain, "no trappable sublevel");
    return best;
  }

  double k_only_evaporation_depth( const SpinState& K, const SpinState& Rb, double B0 )
  {
    require(B0 >= 0.0, ErrorCode::Domain, "B0 must be >= 0");
    return eta_coefficients(K, Rb).field.value() * constants.mu_B * B0;
  }

  std::vector<std::string> dressing_scenario_names() { return { "rb-doublewell", "k-doublewell" }; }

  DressingScenario dressing_scenario( const std::string& name )
  {
    const auto Rb = builtin_species().stretched("Rb87");
    const double B0 = 1.214 * units::gauss;
    const double wx = units::hz_to_angular(1230.0);
    const double wy = units::hz_to_angular(13.7);
    DressingScenario sc;
    sc.name = name;
    sc.trap.B0 = B0;
    sc.trap.gradient = ip_gradient_from_frequency(Rb, B0, wx);
    // w_ax^2 = m_F g_F mu_B B'' / M
    sc.trap.curvature = Rb.mass() * wy * wy / magnetic_moment(Rb);
    sc.trap.axes.col(0) = Vec3::UnitX();
    sc.trap.axes.col(1) = Vec3::UnitY();
    sc.trap.axes.col(2) = Vec3::UnitZ();
    sc.rf.amplitude = 200.0 * units::milligauss;
    sc.rf.polarization = Vec3::UnitZ();   // perpendicular to the axial (y) bias field
    sc.axis.direction = Vec3::UnitX();
    sc.axis.s_min = -10.0 * units::micrometre;
    sc.axis.s_max = 10.0 * units::micrometre;
    sc.axis.samples = 4096;
    if (name == "rb-doublewell") {
      sc.connect_omega = units::hz_to_angular(800e3);
      sc.rf.omega = units::hz_to_angular(860e3);
    } else if (name == "k-doublewell") {
      sc.connect_omega = units::hz_to_angular(338e3);
      sc.rf.omega = units::hz_to_angular(383e3);
    } else {
      fail(ErrorCode::InvalidArgument, "unknown dressing scenario '" + name + "'");
    }
    return sc;
  }

  std::vector<SpeciesDressing> run_dressing( const MagneticField& field, const RFField& rf, double connect_omega,
                                             const std::vector<SpinState>& states, const ScanAxis& axis,
                                             unsigned jobs )
  {
    RFField connect = rf;
    connect.omega = connect_omega;
    std::vector<SpeciesDressing> out;
    for (const auto& st : states) {
      SpeciesDressing d;
      d.state = st;
      d.at_connect = detuning_and_rabi(field, connect, st, axis.origin);
      d.at_origin = detuning_and_rabi(field, rf, st, axis.origin);
      d.m_F_prime = connected_branch(st, d.at_connect.delta, d.at_connect.Omega);
      d.scan = dressed_potential(field, rf, st, d.m_F_prime, axis, jobs);
      try {
        d.wells = analyze_wells(field, rf, st, d.m_F_prime, axis, jobs);
      } catch ( const Error& e ) {
        if (e.code() != ErrorCode::Ambiguous)
          throw;
        d.wells_error = e.what();
      }
      out.push_back(std::move(d));
    }
    return out;
  }

  void write_scan_csv( std::ostream& os, const DressedPotentialScan& sc )
  {
    verify_scan(sc);
    os << "s_m,U_J,delta_J,Omega_J,U_over_h_Hz\n";
    for (std::size_t i = 0; i < sc.s.size(); ++i)
      os << fmt17(sc.s[i]) << ',' << fmt17(sc.U[i]) << ',' << fmt17(sc.delta[i]) << ',' << fmt17(sc.Omega[i])
         << ',' << fmt17(sc.U[i] / constants.h) << '\n';
  }

}
