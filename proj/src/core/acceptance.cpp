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

#include "acceptance.hpp"
#include "dressing.hpp"
#include "error.hpp"
#include "evaporation.hpp"
#include "fit.hpp"
#include "json_out.hpp"
#include "parallel.hpp"
#include "polylog.hpp"
#include "thermo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace fermichip {

  bool CriterionResult::pass() const
  {
    if (!error.empty() || rows.empty())
      return false;
    return std::all_of(rows.begin(), rows.end(), []( const CheckRow& r ) { return r.pass; });
  }

  namespace {

    std::string num( double v, int digits = 4 )
    {
      std::ostringstream ss;
      ss.precision(digits);
      ss << v;
      return ss.str();
    }

    CheckRow band( std::string label, std::string quantity, double computed, double lo, double hi,
                   std::string target, std::string unit = "" )
    {
      CheckRow r{ std::move(label), std::move(quantity), computed, lo, hi, std::move(target), std::move(unit), false };
      r.pass = std::isfinite(computed) && computed >= lo && computed <= hi;
      return r;
    }

    CheckRow around( std::string label, std::string quantity, double computed, double target, double tol,
                     std::string unit = "" )
    {
      return band(std::move(label), std::move(quantity), computed, target - tol, target + tol,
                  num(target, 6) + " +- " + num(tol, 3), std::move(unit));
    }

    CheckRow relative( std::string label, std::string quantity, double computed, double target, double rel,
                       std::string unit = "" )
    {
      const double tol = std::abs(target) * rel;
      return band(std::move(label), std::move(quantity), computed, target - tol, target + tol,
                  num(target, 6) + " +- " + num(100.0 * rel, 3) + "%", std::move(unit));
    }

    CheckRow at_most( std::string label, std::string quantity, double computed, double limit, std::string unit = "" )
    {
      return band(std::move(label), std::move(quantity), computed, -std::numeric_limits<double>::infinity(), limit,
                  "<= " + num(limit, 3), std::move(unit));
    }

    CheckRow flag( std::string label, std::string quantity, bool ok, std::string target )
    {
      return band(std::move(label), std::move(quantity), ok ? 1.0 : 0.0, 1.0, 1.0, std::move(target));
    }

    double loglog_slope( const std::vector<double>& x, const std::vector<double>& y )
    {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = double(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
      return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    const SpinState& rb() { static const SpinState s = builtin_species().stretched("Rb87"); return s; }
    const SpinState& k40() { static const SpinState s = builtin_species().stretched("K40"); return s; }

    constexpr double kUm3 = units::cubic_micrometre;

    // ---- criteria ----

    void degeneracy_constants( CriterionResult& c )
    {
      c.rows.push_back(around("1a", "n0 Lambda^3 (Fermi) at Z = 1", degeneracy_parameter_fermi(0.0), 0.7651, 5e-4));
      c.rows.push_back(around("1b", "n0 Lambda^3 (Bose) at Z = 1", degeneracy_parameter_bose(1.0), 2.612, 1e-3));
      c.rows.push_back(around("1c", "T/T_F at Z = 1", reduced_temperature_from_log_fugacity(0.0), 0.5697, 5e-4));
    }

    void energy_per_particle_limits( CriterionResult& c )
    {
      auto e_over_ef = []( double t ) {
        const double lz = log_fugacity_from_reduced_temperature(t);
        return 3.0 * t * polylog::fermi_fn_log(4.0, lz) / polylog::fermi_fn_log(3.0, lz);
      };
      c.rows.push_back(around("2a", "E/N / E_F at T/T_F = 0.01", e_over_ef(0.01), 0.600, 1e-4));
      const double lz5 = log_fugacity_from_reduced_temperature(5.0);
      c.rows.push_back(relative("2b", "E/N / 3kT at T/T_F = 5",
                                polylog::fermi_fn_log(4.0, lz5) / polylog::fermi_fn_log(3.0, lz5), 1.0, 0.01));
    }

    void chemical_potential( CriterionResult& c )
    {
      double low = 0.0;
      for (int i = 1; i <= 40; ++i) {
        const double t = 0.2 * i / 40.0;
        const double exact = chemical_potential_exact(t);
        low = std::max(low, std::abs(chemical_potential_approx(t, MuRegime::Low) - exact) / std::abs(exact));
      }
      double high = 0.0;
      for (int i = 0; i <= 40; ++i) {
        const double t = 2.0 * std::pow(50.0, i / 40.0);   // 2 .. 100
        const double exact = chemical_potential_exact(t);
        high = std::max(high, std::abs(chemical_potential_approx(t, MuRegime::High) - exact) / std::abs(exact));
      }
      c.rows.push_back(at_most("3a", "max rel. error, low form, T/T_F in (0, 0.2]", low, 0.01));
      c.rows.push_back(at_most("3b", "max rel. error, high form, T/T_F in [2, 100]", high, 0.01));
    }

    void discrete_oracle( CriterionResult& c, unsigned jobs )
    {
      // Random atom numbers at k T = 50 hbar w, plus N = 1000.
      std::mt19937_64 rng(20260415);
      std::uniform_real_distribution<double> logN(std::log(100.0), std::log(1e5));
      std::vector<double> Ns{ 1000.0 };
      for (int i = 0; i < 15; ++i)
        Ns.push_back(std::round(std::exp(logN(rng))));
      const HarmonicTrap trap = HarmonicTrap::from_hz(300.0, 300.0, 300.0);
      const double T = 50.0 * constants.hbar * trap.omega_bar() / constants.k_B;
      std::vector<double> dev(Ns.size());
      parallel_for(Ns.size(), jobs, [&]( std::size_t i ) {
        const double t = T * constants.k_B / fermi_energy(Ns[i], trap);
        const double lz = log_fugacity_from_reduced_temperature(t);
        const double mu = lz * constants.k_B * T;
        const auto sums = discrete_sum_oracle(trap, mu, T, discrete_sum_cutoff(trap, mu, T));
        dev[i] = std::abs(sums.N / atom_number(trap, T, lz) - 1.0);
      });
      c.rows.push_back(at_most("4a", "|N_disc/N_cont - 1| at N = 1000", dev[0], 0.02));
      c.rows.push_back(at_most("4b", "max |N_disc/N_cont - 1| over " + std::to_string(Ns.size()) + " random N",
                               *std::max_element(dev.begin(), dev.end()), 0.02));
    }

    void trap_volumes( CriterionResult& c )
    {
      const auto reichel = evaluate(evaporation_preset("reichel-z"));
      const auto loop = evaluate(evaporation_preset("libbrecht-loop"));
      const auto ioffe = evaluate(evaporation_preset("ioffe-c"));
      const auto ours = evaluate(evaporation_preset("toronto-z"));
      c.rows.push_back(relative("5a", "Reichel Z-trap V_eff", reichel.V_eff / kUm3, 1.3e7, 0.10, "um^3"));
      c.rows.push_back(relative("5b", "Reichel Z-trap N_max", reichel.N_max, 1.2e7, 0.15));
      c.rows.push_back(relative("5c", "single-loop quadrupole V_eff", loop.V_eff / kUm3, 310.0, 0.20, "um^3"));
      c.rows.push_back(relative("5d", "single-loop quadrupole N_max", loop.N_max, 2e4, 0.20));
      c.rows.push_back(relative("5e", "Ioffe (c) V_eff", ioffe.V_eff / kUm3, 0.4, 0.25, "um^3"));
      c.rows.push_back(band("5f", "Ioffe (c) N_max", ioffe.N_max, 0.0, 1.0, "< 1"));
      c.rows.push_back(relative("5g", "our trap V_eff", ours.V_eff / kUm3, 3e7, 0.15, "um^3"));
    }

    void start_temperature( CriterionResult& c )
    {
      const double a = *rb().species.s_wave_scattering_length;
      const double T0 = min_start_temperature(rb().mass(), 1e-6, 150.0, a);
      c.rows.push_back(relative("6a", "T0_min (rho0 = 1e-6, 150 /s, 5.3 nm)", T0 / units::microkelvin, 300.0, 0.02, "uK"));
      const double gamma =
        collision_rate(rb().mass(), 1e-6, 300.0 * units::microkelvin, sigma_identical_bosons(a));
      c.rows.push_back(relative("6b", "collision rate at 300 uK", gamma, 150.0, 0.02, "1/s"));
    }

    void eta_algebra( CriterionResult& c )
    {
      const auto co = eta_coefficients(k40(), rb());
      c.rows.push_back(flag("7a", "eta_Rb coefficient = 9/4 (exact, " + co.ratio.str() + ")",
                            co.ratio == Rational{ 9, 4 }, "9/4"));
      c.rows.push_back(flag("7b", "field coefficient = 5/4 (exact, " + co.field.str() + ")",
                            co.field == Rational{ 5, 4 }, "5/4"));
      const auto m = eta_min_over_sublevels(k40(), rb(), 0.0, 5.7 * units::gauss, 220.0 * units::nanokelvin);
      c.rows.push_back(around("7c", "min eta_K over sublevels (m_F = " + m.m_F.str() + ")", m.eta, 242.0, 2.0));
      c.rows.push_back(band("7d", "min eta_K > 220", m.eta, 220.0, std::numeric_limits<double>::infinity(), "> 220"));
      const double depth = k_only_evaporation_depth(k40(), rb(), 5.7 * units::gauss);
      c.rows.push_back(relative("7e", "K-only depth at B0 = 5.7 G", depth / constants.k_B / units::microkelvin,
                                479.0, 0.01, "uK"));
    }

    void dressing_anchors( CriterionResult& c, unsigned jobs )
    {
      const auto sc = dressing_scenario("rb-doublewell");
      const IoffePritchardField field(sc.trap);
      const auto runs = run_dressing(field, sc.rf, sc.connect_omega, { rb(), k40() }, sc.axis, jobs);
      const auto& r = runs[0];
      const auto& k = runs[1];
      const double kHz = 1e3;
      c.rows.push_back(around("8a", "Rb delta(0)/h at 800 kHz", units::energy_to_hz(r.at_connect.delta) / kHz,
                              -50.0, 1.0, "kHz"));
      c.rows.push_back(around("8b", "K |delta(0)|/h at 860 kHz", std::abs(units::energy_to_hz(k.at_origin.delta)) / kHz,
                              482.0, 2.0, "kHz"));
      c.rows.push_back(around("8c", "Rb Omega/h at B_RF = 200 mG", units::energy_to_hz(r.at_origin.Omega) / kHz,
                              70.0, 0.5, "kHz"));
      ScanAxis wide = sc.axis;
      wide.s_min = 0.0;
      wide.s_max = 60.0 * units::micrometre;
      const auto shell = resonance_shell(field, sc.rf, k40(), wide);
      c.rows.push_back(band("8d", "K resonance-shell energy", shell.energy / constants.k_B / units::microkelvin,
                            104.0, 115.0, "104 .. 115", "uK"));
      const bool rb_double = r.wells && r.wells->topology == WellTopology::Double;
      const bool k_single = k.wells && k.wells->topology == WellTopology::Single;
      c.rows.push_back(flag("8e", "Rb (m' = " + r.m_F_prime.str() + ") topology double", rb_double, "double"));
      c.rows.push_back(flag("8f", "K (m' = " + k.m_F_prime.str() + ") topology single", k_single, "single"));
      const double sep = rb_double ? r.wells->separation / units::micrometre : 0.0;
      const double barrier = rb_double ? units::energy_to_hz(r.wells->barrier) / kHz : 0.0;
      c.rows.push_back(band("8g", "Rb well separation", sep, 0.4, 40.0, "0.4 .. 40", "um"));
      c.rows.push_back(band("8h", "Rb barrier / h", barrier, 0.2, 24.0, "0.2 .. 24", "kHz"));
    }

    void fit_discrimination( CriterionResult& c, unsigned jobs )
    {
      const HarmonicTrap trap = HarmonicTrap::from_hz(823.0, 46.0, 823.0);
      const double t_tof = 10e-3;
      const double ts[2] = { 0.1, 2.0 };
      double chi2[2][2] = {};
      parallel_for(4, jobs, [&]( std::size_t i ) {
        const auto s = TrappedGasState::from_reduced_temperature(k40(), trap, 4e4, ts[i / 2]);
        const Grid2D grid = fit_window(s, t_tof);
        const double peak = column_density_fermi(s, t_tof, 0.0, 0.0);
        const TofImage img = synthesize_tof_image(s, t_tof, grid, 0.02 * peak, 7);
        chi2[i / 2][i % 2] = fit(img, i % 2 ? FitModel::FermiDirac : FitModel::Gaussian).reduced_chi2;
      });
      c.rows.push_back(band("9a", "reduced chi2 gauss/FD at T/T_F = 0.1, 2% noise", chi2[0][0] / chi2[0][1], 2.0, 5.0,
                            "2 .. 5"));
      c.rows.push_back(band("9b", "reduced chi2 gauss/FD at T/T_F = 2, 2% noise", chi2[1][0] / chi2[1][1], 0.95, 1.3,
                            "0.95 .. 1.3"));
      double below = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 45; ++i)
        below = std::min(below, apparent_temperature_ratio(0.05 + 0.44 * i / 44.0) - 1.0);
      double above = 0.0;
      for (int i = 0; i <= 40; ++i)
        above = std::max(above, std::abs(apparent_temperature_ratio(1.51 * std::pow(10.0, i / 40.0)) - 1.0));
      c.rows.push_back(band("9c", "min (T_app/T - 1), T/T_F in [0.05, 0.49]", below, 0.05,
                            std::numeric_limits<double>::infinity(), "> 0.05"));
      c.rows.push_back(at_most("9d", "max |T_app/T - 1|, T/T_F in [1.51, 15.1]", above, 0.02));
    }

    void scaling( CriterionResult& c )
    {
      using K = EffectiveVolumeModel::Kind;
      const auto loop = evaporation_preset("libbrecht-loop");
      std::vector<EffectiveVolumeModel> models(4);
      models[0].kind = K::SHO;
      models[0].omega_bar = units::hz_to_angular(300.0);
      models[0].mass = rb().mass();
      models[1] = loop.model;
      models[2].kind = K::Box;
      models[2].side = 100.0 * units::micrometre;
      models[3].kind = K::Quad2DBox;
      models[3].mean_gradient = loop.model.mean_gradient;
      models[3].side = 1e-3;
      const char tags[4] = { 'a', 'b', 'c', 'd' };
      for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<double> T, V, U, N;
        for (int i = 0; i <= 8; ++i) {
          const double Ti = 10.0 * units::microkelvin * std::pow(1000.0, i / 8.0);
          T.push_back(Ti);
          V.push_back(effective_volume(models[m], Ti));
          LoadingBudget b{ 1e-6, 4.0 * constants.k_B * Ti, 4.0, rb().mass() };
          U.push_back(b.depth);
          N.push_back(max_loadable_atoms(b, models[m]));
        }
        const double d = volume_exponent(models[m].kind);
        const std::string name = to_string(models[m].kind);
        c.rows.push_back(around(std::string("10") + tags[m], "V_eff exponent, " + name, loglog_slope(T, V), d, 1e-6));
        c.rows.push_back(around(std::string("10") + char(tags[m] + 4), "N_max vs U_td exponent, " + name,
                                loglog_slope(U, N), d + 1.5, 1e-3));
      }
      c.rows.push_back(around("10i", "N_max vs wire current exponent", current_scaling_exponent(paper_current_family(), rb()),
                              2.5, 0.05));
    }

    void hygiene( CriterionResult& c )
    {
      namespace rg = polylog::regime;
      const double orders[] = { 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0 };
      double seam = 0.0;
      for (double n : orders) {
        const double q1 = rg::quadrature(n, std::log(rg::series_max_z));
        seam = std::max(seam, std::abs(rg::alternating_series(n, rg::series_max_z) - q1) / q1);
        const double q2 = rg::quadrature(n, rg::sommerfeld_min_log_z);
        seam = std::max(seam, std::abs(rg::sommerfeld(n, rg::sommerfeld_min_log_z) - q2) / q2);
      }
      c.rows.push_back(at_most("11a", "max polylog seam mismatch", seam, 1e-8));

      double reduction = 0.0;
      const std::pair<double, double> cases[] = { { 1.5, 1.0 }, { 1.0, 5.0 }, { 0.5, 0.01 }, { 2.5, 40.0 } };
      for (auto [n, C] : cases) {
        const auto g = polylog::gaussian_reduction_check(n, C);
        reduction = std::max(reduction, std::abs(g.lhs - g.rhs) / g.rhs);
      }
      c.rows.push_back(at_most("11b", "max Gaussian-reduction mismatch", reduction, 1e-6));

      // Z wire at 2 A with a planar bias, closed through a return path 10 mm
      // below the chip: an open chain of segments is not curl-free (its
      // dangling ends act as current sources). Random points 40 .. 600 um up.
      const double mm = 1e-3;
      const double L = 1.76 * mm;
      const Vec3 p[6] = { { -3.0 * mm, -0.5 * L, 0.0 },  { 0.0, -0.5 * L, 0.0 },        { 0.0, 0.5 * L, 0.0 },
                          { 3.0 * mm, 0.5 * L, 0.0 },    { 3.0 * mm, 0.5 * L, -10 * mm }, { -3.0 * mm, -0.5 * L, -10 * mm } };
      std::vector<WireSegment> segs;
      for (int i = 0; i < 6; ++i)
        segs.push_back({ p[i], p[(i + 1) % 6], 2.0 });
      const WireFieldModel wires(segs, Vec3(-20.3, -5.8, 0.0) * units::gauss);
      std::mt19937_64 rng(4711);
      std::uniform_real_distribution<double> xy(-1.5 * mm, 1.5 * mm);
      std::uniform_real_distribution<double> height(40e-6, 600e-6);
      double div = 0.0;
      double curl = 0.0;
      for (int p = 0; p < 20; ++p) {
        const Vec3 r(xy(rng), xy(rng), height(rng));
        const double h = 1e-4 * wires.source_distance(r);
        Mat3 J;
        for (int j = 0; j < 3; ++j) {
          Vec3 dr = Vec3::Zero();
          dr[j] = h;
          J.col(j) = (wires.field(r + dr) - wires.field(r - dr)) / (2.0 * h);
        }
        const double scale = J.norm();
        div = std::max(div, std::abs(J.trace()) / scale);
        const Vec3 cv(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
        curl = std::max(curl, cv.norm() / scale);
      }
      c.rows.push_back(at_most("11c", "max |div B| / |grad B| (finite differences)", div, 1e-6));
      c.rows.push_back(at_most("11d", "max |curl B| / |grad B| (finite differences)", curl, 1e-6));

      const auto sc = dressing_scenario("rb-doublewell");
      const IoffePritchardField ip(sc.trap);
      const auto f = trap_frequencies(ip, rb(), PotentialOptions{}, sc.trap.center);
      const double k = magnetic_moment(rb()) / rb().mass();
      const double Bp = sc.trap.gradient;
      const double Bpp = sc.trap.curvature;
      const double w_perp = std::sqrt(k * (Bp * Bp / sc.trap.B0 - 0.5 * Bpp));
      const double w_ax = std::sqrt(k * Bpp);
      const double expect[3] = { w_perp, w_ax, w_perp };
      double worst = 0.0;
      for (int i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(f.omega_lab[i] / expect[i] - 1.0));
      c.rows.push_back(at_most("11e", "max |w_Hessian / w_IP - 1|", worst, 0.01));
    }

  }

  std::vector<int> acceptance_criteria() { return { 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11 }; }

  std::string acceptance_title( int id )
  {
    switch (id) {
    case 1: return "degeneracy crossover constants";
    case 2: return "energy per particle limits";
    case 3: return "chemical-potential approximations";
    case 4: return "discrete-sum oracle vs continuum";
    case 5: return "worked trap-volume examples";
    case 6: return "minimum start temperature and collision rate";
    case 7: return "eta algebra";
    case 8: return "dressed-potential anchors";
    case 9: return "fit discrimination and apparent temperature";
    case 10: return "scaling exponents";
    case 11: return "numerical hygiene";
    }
    fail(ErrorCode::InvalidArgument, "unknown acceptance criterion " + std::to_string(id));
  }

  CriterionResult run_criterion( int id, unsigned jobs )
  {
    CriterionResult c;
    c.id = id;
    c.title = acceptance_title(id);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (id) {
      case 1: degeneracy_constants(c); break;
      case 2: energy_per_particle_limits(c); break;
      case 3: chemical_potential(c); break;
      case 4: discrete_oracle(c, jobs); break;
      case 5: trap_volumes(c); break;
      case 6: start_temperature(c); break;
      case 7: eta_algebra(c); break;
      case 8: dressing_anchors(c, jobs); break;
      case 9: fit_discrimination(c, jobs); break;
      case 10: scaling(c); break;
      case 11: hygiene(c); break;
      }
    } catch ( const std::exception& e ) {
      c.error = e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
  }

  std::vector<CriterionResult> run_acceptance( const std::vector<int>& ids, unsigned jobs )
  {
    std::vector<CriterionResult> out;
    for (int id : ids)
      out.push_back(run_criterion(id, jobs));
    return out;
  }

  std::string acceptance_to_json_text( const std::vector<CriterionResult>& results )
  {
    using nlohmann::json;
    json arr = json::array();
    bool all = true;
    for (const auto& c : results) {
      json rows = json::array();
      for (const auto& r : c.rows)
        rows.push_back({ { "label", r.label }, { "quantity", r.quantity }, { "computed", r.computed },
                         { "lo", r.lo }, { "hi", r.hi }, { "target", r.target }, { "unit", r.unit },
                         { "pass", r.pass } });
      all = all && c.pass();
      arr.push_back({ { "id", c.id }, { "title", c.title }, { "pass", c.pass() }, { "error", c.error },
                      { "rows", rows } });
    }
    return dump17(json{ { "criteria", arr }, { "pass", all } });
  }

}
