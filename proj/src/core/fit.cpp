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

#include "fit.hpp"
#include "error.hpp"
#include "polylog.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace fermichip {

  void validate( const TofImage& img )
  {
    const auto& g = img.raster.grid;
    require(g.nx > 0 && g.ny > 0 && g.pitch_x > 0.0 && g.pitch_y > 0.0, ErrorCode::InvalidArgument,
            "image needs positive dimensions and pitch");
    require(img.raster.values.size() == std::size_t(g.nx) * g.ny, ErrorCode::InvalidArgument,
            "image value count does not match its grid");
    for (double v : img.raster.values)
      require(std::isfinite(v), ErrorCode::InvalidArgument, "image contains non-finite values");
    require(img.noise_rms >= 0.0, ErrorCode::InvalidArgument, "noise RMS must be >= 0");
  }

  TofImage synthesize_tof_image( const TrappedGasState& s, double t, const Grid2D& grid, double noise_rms,
                                 std::uint64_t seed, ProfileModel model, unsigned jobs )
  {
    require(noise_rms >= 0.0, ErrorCode::Domain, "noise RMS must be >= 0");
    TofImage img;
    img.raster = column_profile(s, t, grid, model, jobs);
    img.noise_rms = noise_rms;
    img.context = ImageContext{ s.trap(), s.mass(), t };
    img.true_N = s.N();
    img.true_T = s.T();
    img.true_log_z = s.log_z();
    if (noise_rms > 0.0) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> noise(0.0, noise_rms);
      for (auto& v : img.raster.values)
        v += noise(rng);
    }
    return img;
  }

  Grid2D fit_window( const TrappedGasState& s, double t, std::uint32_t n ) { return column_grid(s, t, n, 2.0); }

  std::string to_string( FitModel m ) { return m == FitModel::FermiDirac ? "fermi-dirac" : "gaussian"; }

  namespace {

    struct Profile {
      FitModel model;
      double lz_min, lz_max;

      int size() const { return model == FitModel::FermiDirac ? 6 : 5; }

      double clamp_lz( double lz ) const { return std::clamp(lz, lz_min, lz_max); }

      // Pixel-independent part of the model for one parameter vector.
      struct Prepared {
        double rx, ry, x0, y0, lz;
        double A;          // N / (2 pi r_x r_y [f_3(Z)])
        double dlogA_dlz;  // -f_2(Z) / f_3(Z)
        bool clamped;
      };

      Prepared prepare( const double* p ) const
      {
        Prepared c{};
        c.rx = std::exp(p[1]);
        c.ry = std::exp(p[2]);
        c.x0 = p[3];
        c.y0 = p[4];
        c.A = std::exp(p[0]) / (kTwoPi * c.rx * c.ry);
        if (model == FitModel::FermiDirac) {
          c.lz = clamp_lz(p[5]);
          c.clamped = c.lz != p[5];
          const double f3 = polylog::fermi_fn_log(3.0, c.lz);
          c.A /= f3;
          c.dlogA_dlz = -polylog::fermi_fn_log(2.0, c.lz) / f3;
        }
        return c;
      }

      // Value and (optionally) gradient with respect to the parameter vector.
      double eval( const Prepared& c, double x, double y, double* grad ) const
      {
        const double dx = x - c.x0;
        const double dy = y - c.y0;
        const double qx = 0.5 * dx * dx / (c.rx * c.rx);
        const double qy = 0.5 * dy * dy / (c.ry * c.ry);
        const double q = qx + qy;
        double F, dF;   // shape and -dF/dq
        if (model == FitModel::Gaussian) {
          F = std::exp(-q);
          dF = F;
        } else {
          F = polylog::fermi_fn_log(2.0, c.lz - q);
          dF = grad ? polylog::fermi_fn_log(1.0, c.lz - q) : 0.0;
        }
        const double v = c.A * F;
        if (grad) {
          const double a = c.A * dF;
          grad[0] = v;
          grad[1] = -v + a * 2.0 * qx;
          grad[2] = -v + a * 2.0 * qy;
          grad[3] = a * dx / (c.rx * c.rx);
          grad[4] = a * dy / (c.ry * c.ry);
          if (model == FitModel::FermiDirac)
            grad[5] = c.clamped ? 0.0 : c.dlogA_dlz * v + a;
        }
        return v;
      }
    };

    struct Problem : Eigen::DenseFunctor<double> {
      const TofImage* img = nullptr;
      Profile prof{ FitModel::Gaussian, -40.0, 80.0 };
      double sigma = 1.0;
      mutable int evaluations = 0;

      Problem( const TofImage& image, Profile p, double s )
        : Eigen::DenseFunctor<double>(p.size(), int(image.raster.values.size())), img(&image), prof(p), sigma(s) {}

      int operator()( const InputType& x, ValueType& f ) const
      {
        ++evaluations;
        const auto& g = img->raster.grid;
        const auto c = prof.prepare(x.data());
        for (std::uint32_t j = 0; j < g.ny; ++j)
          for (std::uint32_t i = 0; i < g.nx; ++i) {
            const std::size_t k = std::size_t(j) * g.nx + i;
            f[Eigen::Index(k)] = (prof.eval(c, g.x(i), g.y(j), nullptr) - img->raster.values[k]) / sigma;
          }
        return 0;
      }

      int df( const InputType& x, JacobianType& J ) const
      {
        const auto& g = img->raster.grid;
        double grad[6];
        const auto c = prof.prepare(x.data());
        for (std::uint32_t j = 0; j < g.ny; ++j)
          for (std::uint32_t i = 0; i < g.nx; ++i) {
            const Eigen::Index k = Eigen::Index(j) * g.nx + i;
            prof.eval(c, g.x(i), g.y(j), grad);
            for (int c = 0; c < prof.size(); ++c)
              J(k, c) = grad[c] / sigma;
          }
        return 0;
      }
    };

    struct Guess {
      double N, rx, ry, x0, y0;
    };

    // Centroid and widths from the pixels above half maximum; for a Gaussian
    // that ellipse has semi-axes r sqrt(2 ln 2) and <x^2> = a^2 / 4.
    Guess initial_guess( const TofImage& img )
    {
      const auto& g = img.raster.grid;
      const auto& v = img.raster.values;
      const double peak = *std::max_element(v.begin(), v.end());
      require(peak > 0.0, ErrorCode::InvalidArgument, "image has no positive pixels");
      double sw = 0, sx = 0, sy = 0;
      for (std::uint32_t j = 0; j < g.ny; ++j)
        for (std::uint32_t i = 0; i < g.nx; ++i)
          if (v[std::size_t(j) * g.nx + i] > 0.5 * peak) {
            sw += 1;
            sx += g.x(i);
            sy += g.y(j);
          }
      const double cx = sx / sw;
      const double cy = sy / sw;
      double sxx = 0, syy = 0;
      for (std::uint32_t j = 0; j < g.ny; ++j)
        for (std::uint32_t i = 0; i < g.nx; ++i)
          if (v[std::size_t(j) * g.nx + i] > 0.5 * peak) {
            sxx += (g.x(i) - cx) * (g.x(i) - cx);
            syy += (g.y(j) - cy) * (g.y(j) - cy);
          }
      const double k = 2.0 / std::sqrt(2.0 * std::log(2.0));
      double rx = k * std::sqrt(sxx / sw + g.pitch_x * g.pitch_x / 12.0);
      double ry = k * std::sqrt(syy / sw + g.pitch_y * g.pitch_y / 12.0);
      rx = std::max(rx, g.pitch_x);
      ry = std::max(ry, g.pitch_y);
      return { peak * kTwoPi * rx * ry, rx, ry, cx, cy };
    }

    double gradient_cosine( const Eigen::MatrixXd& J, const Eigen::VectorXd& r )
    {
      const double rn = r.norm();
      if (rn == 0.0)
        return 0.0;
      double worst = 0.0;
      for (Eigen::Index c = 0; c < J.cols(); ++c) {
        const double jn = J.col(c).norm();
        if (jn > 0.0)
          worst = std::max(worst, std::abs(J.col(c).dot(r)) / (jn * rn));
      }
      return worst;
    }

    template <class Functor>
    int run_lm( Functor& f, Eigen::VectorXd& x, int max_evaluations )
    {
      Eigen::LevenbergMarquardt<Functor> lm(f);
      lm.setFtol(1e-14);
      lm.setXtol(1e-14);
      lm.setGtol(0.0);
      lm.setMaxfev(max_evaluations);
      return int(lm.minimize(x));
    }

  }

  FitResult fit( const TofImage& img, FitModel model, const FitOptions& opt )
  {
    validate(img);
    require(opt.starts >= 1, ErrorCode::InvalidArgument, "need at least one start");
    const auto& v = img.raster.values;
    const double threshold = img.noise_rms > 0.0 ? 5.0 * img.noise_rms : 0.0;
    const auto informative = std::count_if(v.begin(), v.end(), [&]( double x ) { return x > threshold; });
    require(informative >= 100, ErrorCode::InvalidArgument,
            "image has fewer than 100 informative pixels (" + std::to_string(informative) + ")");

    const Profile prof{ model, opt.log_z_min, opt.log_z_max };
    const int np = prof.size();
    const double sigma = img.noise_rms > 0.0 ? img.noise_rms : 1.0;
    const Guess g0 = initial_guess(img);

    // Perturbed starts. Fermi-Dirac starts pick ln Z and shrink the thermal
    // radius so the second moment matches the half-maximum estimate.
    std::vector<Eigen::VectorXd> starts;
    const double gauss_scale[3] = { 1.0, 0.8, 1.25 };
    const double fd_log_z[3] = { -2.0, 1.5, 5.0 };
    for (int s = 0; s < opt.starts; ++s) {
      Eigen::VectorXd x(np);
      double rs = gauss_scale[s % 3];
      if (model == FitModel::FermiDirac) {
        const double lz = fd_log_z[s % 3] + 2.0 * (s / 3);
        rs = 1.0 / std::sqrt(polylog::fermi_fn_log(4.0, lz) / polylog::fermi_fn_log(3.0, lz));
        x[5] = lz;
      }
      x[0] = std::log(g0.N);
      x[1] = std::log(g0.rx * rs);
      x[2] = std::log(g0.ry * rs);
      x[3] = g0.x0;
      x[4] = g0.y0;
      starts.push_back(x);
    }

    Problem problem(img, prof, sigma);
    FitResult best;
    bool have = false;
    std::ostringstream diag;
    double data_norm = 0.0;
    for (double d : v)
      data_norm += (d / sigma) * (d / sigma);
    data_norm = std::sqrt(data_norm);

    for (int s = 0; s < int(starts.size()); ++s) {
      Eigen::VectorXd x = starts[std::size_t(s)];
      int status = 0;
      int evals = 0;
      try {
        if (opt.numeric_jacobian) {
          // NumericalDiff::df hides the analytic one. Step ~ eps^(1/3) balances
          // truncation and rounding for central differences.
          Eigen::NumericalDiff<Problem, Eigen::Central> nd(Problem(img, prof, sigma), 4e-11);
          status = run_lm(nd, x, opt.max_evaluations);
          evals = nd.evaluations;
        } else {
          problem.evaluations = 0;
          status = run_lm(problem, x, opt.max_evaluations);
          evals = problem.evaluations;
        }
      } catch ( const Error& e ) {
        diag << " start " << s << ": " << e.what() << ';';
        continue;
      }
      if (!x.allFinite()) {
        diag << " start " << s << ": non-finite parameters;";
        continue;
      }
      Eigen::VectorXd r(problem.values());
      problem(x, r);
      Eigen::MatrixXd J(problem.values(), np);
      problem.df(x, J);
      const double chi2 = r.squaredNorm();
      const double cosine = gradient_cosine(J, r);
      const bool exact = std::sqrt(chi2) <= 1e-10 * data_norm;
      const bool ok = exact || cosine < 1e-8;
      if (!ok) {
        diag << " start " << s << ": status " << status << ", gradient cosine " << cosine << ';';
        continue;
      }
      if (!have || chi2 < best.chi2) {
        have = true;
        best = FitResult{};
        best.model = model;
        best.params = x;
        best.chi2 = chi2;
        best.dof = long(r.size()) - np;
        best.reduced_chi2 = chi2 / double(best.dof);
        best.gradient_cosine = cosine;
        best.converged = true;
        best.evaluations = evals;
        best.best_start = s;
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        // A pseudo-inverse would hide the flat ln Z direction; keep it visible.
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(JtJ);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(np, np);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.vectorD().minCoeff() > 0.0)
          best.covariance = ldlt.solve(I) * best.reduced_chi2;
        else
          best.covariance = Eigen::MatrixXd::Constant(np, np, std::numeric_limits<double>::infinity());
      }
    }
    if (!have)
      fail(ErrorCode::Convergence, to_string(model) + " fit did not converge:" + diag.str());

    const auto& x = best.params;
    best.N = std::exp(x[0]);
    best.r_x = std::exp(x[1]);
    best.r_y = std::exp(x[2]);
    best.x0 = x[3];
    best.y0 = x[4];
    if (model == FitModel::FermiDirac) {
      const double lz = x[5];
      best.log_z = prof.clamp_lz(lz);
      best.z_at_lower_bound = lz <= opt.log_z_min + 1e-6;
      best.z_at_upper_bound = lz >= opt.log_z_max - 1e-6;
      const double var = best.covariance(5, 5);
      best.log_z_sigma = var > 0.0 ? std::sqrt(var) : 0.0;
      // 95% interval exp(lnZ +- 1.96 sigma) wider than a decade
      best.z_poorly_constrained = best.z_at_lower_bound || 2.0 * 1.96 * *best.log_z_sigma > std::log(10.0);
      best.t_over_tf = reduced_temperature_from_log_fugacity(*best.log_z);
    }
    return best;
  }

  FitResult fit_gaussian( const TofImage& img, const FitOptions& opt ) { return fit(img, FitModel::Gaussian, opt); }

  FitResult fit_fermi_dirac( const TofImage& img, const FitOptions& opt )
  {
    return fit(img, FitModel::FermiDirac, opt);
  }

  double model_value( const FitResult& r, double x, double y )
  {
    const Profile prof{ r.model, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity() };
    require(r.params.size() == prof.size(), ErrorCode::InvalidArgument, "fit result has no parameter vector");
    return prof.eval(prof.prepare(r.params.data()), x, y, nullptr);
  }

  Raster model_image( const Grid2D& g, const FitResult& r )
  {
    Raster out;
    out.grid = g;
    out.values.resize(std::size_t(g.nx) * g.ny);
    for (std::uint32_t j = 0; j < g.ny; ++j)
      for (std::uint32_t i = 0; i < g.nx; ++i)
        out.values[std::size_t(j) * g.nx + i] = model_value(r, g.x(i), g.y(j));
    return out;
  }

  Raster residual_image( const TofImage& img, const FitResult& r )
  {
    Raster out = model_image(img.raster.grid, r);
    for (std::size_t k = 0; k < out.values.size(); ++k)
      out.values[k] = img.raster.values[k] - out.values[k];
    return out;
  }

  double apparent_temperature( const FitResult& gauss, const ImageContext& ctx )
  {
    require(gauss.model == FitModel::Gaussian, ErrorCode::InvalidArgument, "apparent temperature needs a Gaussian fit");
    require(ctx.mass > 0.0 && ctx.trap.omega_x > 0.0 && ctx.t >= 0.0, ErrorCode::InvalidArgument,
            "image context needs M > 0, w_x > 0, t >= 0");
    const double w = ctx.trap.omega_x;
    return gauss.r_x * gauss.r_x * ctx.mass / ((1.0 / (w * w) + ctx.t * ctx.t) * constants.k_B);
  }

  double apparent_temperature( const TofImage& img, const FitOptions& opt )
  {
    require(img.context.has_value(), ErrorCode::InvalidArgument, "image has no trap / expansion-time context");
    return apparent_temperature(fit_gaussian(img, opt), *img.context);
  }

  double apparent_temperature_ratio( double t_over_tf )
  {
    const double lz = log_fugacity_from_reduced_temperature(t_over_tf);
    return polylog::fermi_fn_log(4.0, lz) / polylog::fermi_fn_log(3.0, lz);
  }

}
