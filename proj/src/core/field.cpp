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

#include "field.hpp"
#include "error.hpp"
#include "format.hpp"

#include "json.hpp"

#include <boost/math/tools/minima.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fermichip {

  // ---------------------------------------------------------------- wires

  WireFieldModel::WireFieldModel( std::vector<WireSegment> segments, Vec3 bias )
    : m_segments(std::move(segments)), m_bias(bias)
  {
    for (const auto& s : m_segments)
      require((s.b - s.a).norm() > 0.0, ErrorCode::InvalidArgument, "wire segment has zero length");
  }

  WireFieldModel WireFieldModel::scaled( double factor ) const
  {
    WireFieldModel m = *this;
    for (auto& s : m.m_segments)
      s.current *= factor;
    m.m_bias *= factor;
    return m;
  }

  WireFieldModel WireFieldModel::translated( const Vec3& shift ) const
  {
    WireFieldModel m = *this;
    for (auto& s : m.m_segments) {
      s.a += shift;
      s.b += shift;
    }
    return m;
  }

  WireFieldModel WireFieldModel::with_bias( const Vec3& bias ) const
  {
    WireFieldModel m = *this;
    m.m_bias = bias;
    return m;
  }

  double WireFieldModel::source_distance( const Vec3& r ) const
  {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : m_segments) {
      const Vec3 L = s.b - s.a;
      const double t = std::clamp((r - s.a).dot(L) / L.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (r - (s.a + t * L)).norm());
    }
    return best;
  }

  void WireFieldModel::guard( const Vec3& r ) const
  {
    const double d = source_distance(r);
    if (d < guard_distance) {
      std::ostringstream ss;
      ss << "field evaluated " << d * 1e6 << " um from a wire (guard " << guard_distance * 1e6 << " um)";
      fail(ErrorCode::Domain, ss.str());
    }
  }

  Vec3 WireFieldModel::field( const Vec3& r ) const
  {
    guard(r);
    return AutoDiffField<WireFieldModel>::field(r);
  }

  Mat3 WireFieldModel::jacobian( const Vec3& r ) const
  {
    guard(r);
    return AutoDiffField<WireFieldModel>::jacobian(r);
  }

  // ------------------------------------------------------- Ioffe-Pritchard

  IoffePritchardField::IoffePritchardField( IPTrapParams p )
    : m_p(p)
  {
    const Mat3 I = m_p.axes.transpose() * m_p.axes;
    require((I - Mat3::Identity()).norm() < 1e-9 && m_p.axes.determinant() > 0.0, ErrorCode::InvalidArgument,
            "Ioffe-Pritchard axes must form a right-handed orthonormal triad");
  }

  // ------------------------------------------------------------ potential

  namespace {

    double moment( const SpinState& s ) { return magnetic_moment(s); }

    double gravity_term( const SpinState& s, const PotentialOptions& o, const Vec3& r )
    {
      return o.gravity ? s.mass() * o.g * o.up.normalized().dot(r) : 0.0;
    }

    Vec3 perturbation_gradient( const PotentialOptions& o, const Vec3& r )
    {
      Vec3 g = Vec3::Zero();
      if (!o.perturbation)
        return g;
      const double h = 1e-8;
      for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        g[i] = (o.perturbation(r + e) - o.perturbation(r - e)) / (2.0 * h);
      }
      return g;
    }

  }

  double potential_energy( const MagneticField& f, const SpinState& s, const PotentialOptions& o, const Vec3& r )
  {
    double u = moment(s) * f.field(r).norm() + gravity_term(s, o, r);
    if (o.perturbation)
      u += o.perturbation(r);
    return u;
  }

  Vec3 field_magnitude_gradient( const MagneticField& f, const Vec3& r )
  {
    const Vec3 B = f.field(r);
    const double b = B.norm();
    require(b > 0.0, ErrorCode::Domain, "|B| is not differentiable where B = 0");
    return f.jacobian(r).transpose() * B / b;
  }

  Vec3 potential_gradient( const MagneticField& f, const SpinState& s, const PotentialOptions& o, const Vec3& r )
  {
    Vec3 g = moment(s) * field_magnitude_gradient(f, r);
    if (o.gravity)
      g += s.mass() * o.g * o.up.normalized();
    g += perturbation_gradient(o, r);
    return g;
  }

  double default_hessian_step( const MagneticField& f, const Vec3& r )
  {
    const double B0 = f.field(r).norm();
    const double Bp = f.jacobian(r).norm();
    if (!(Bp > 0.0))
      return 1e-8;
    return std::max(1e-8, 1e-4 * B0 / Bp);
  }

  namespace {

    template <class Grad>
    Mat3 fd_hessian( Grad&& grad, const Vec3& r, double h )
    {
      auto one_level = [&]( double step ) {
        Mat3 H;
        for (int j = 0; j < 3; ++j) {
          Vec3 e = Vec3::Zero();
          e[j] = step;
          H.col(j) = (grad(Vec3(r + e)) - grad(Vec3(r - e))) / (2.0 * step);
        }
        return H;
      };
      Mat3 H = (4.0 * one_level(0.5 * h) - one_level(h)) / 3.0;
      return 0.5 * (H + H.transpose());
    }

    // Damped Newton for a smooth scalar objective in 3D. `done` decides
    // convergence; `grad` is analytic, the Hessian is differenced from it.
    template <class Value, class Grad, class Done>
    MinimumResult newton_minimize( Value&& value, Grad&& grad, Done&& done, const Vec3& seed,
                                   double step_h, double radius )
    {
      MinimumResult res;
      Vec3 x = seed;
      double fx = value(x);
      Vec3 gx = grad(x);
      for (int it = 0; it < 400; ++it) {
        res.iterations = it;
        if (done(x, fx, gx)) {
          res.position = x;
          return res;
        }
        const Mat3 H = fd_hessian(grad, x, step_h);
        Eigen::SelfAdjointEigenSolver<Mat3> es(H);
        const Eigen::Vector3d lam = es.eigenvalues();
        const double floor = std::max(std::numeric_limits<double>::min(), 1e-8 * lam.cwiseAbs().maxCoeff());
        Vec3 p = Vec3::Zero();
        for (int k = 0; k < 3; ++k) {
          const Vec3 v = es.eigenvectors().col(k);
          p -= v * (v.dot(gx) / std::max(std::abs(lam[k]), floor));
        }
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
          Vec3 step = p;
          if (step.norm() > radius)
            step *= radius / step.norm();
          Vec3 xn = x + step;
          double fn;
          Vec3 gn;
          try {
            fn = value(xn);
            gn = grad(xn);
          } catch ( const Error& e ) {
            if (e.code() != ErrorCode::Domain)
              throw;
            radius *= 0.25;
            continue;
          }
          if (fn < fx || gn.norm() < gx.norm()) {
            accepted = true;
            if (step.norm() >= 0.99 * radius)
              radius *= 2.0;
            x = xn;
            fx = fn;
            gx = gn;
          } else {
            radius *= 0.25;
            if (radius < 1e-18)
              break;
          }
        }
        if (!accepted) {
          res.position = x;
          if (done(x, fx, gx))
            return res;
          break;
        }
      }
      std::ostringstream ss;
      ss << "minimum search did not converge from seed (" << seed.transpose() * 1e6 << ") um; last point ("
         << x.transpose() * 1e6 << ") um, gradient " << gx.norm();
      fail(ErrorCode::Convergence, ss.str());
    }

    double initial_radius( const MagneticField& f, const Vec3& seed )
    {
      const double d = f.source_distance(seed);
      return std::isfinite(d) ? 0.25 * d : 1e-4;
    }

  }

  MinimumResult find_minimum( const MagneticField& f, const Vec3& seed )
  {
    const double scale = std::max(f.field(seed).norm(), 1e-30);
    const double tiny = 1e-9 * scale;   // below this the minimum counts as a field zero
    auto value = [&]( const Vec3& r ) { return f.field(r).squaredNorm(); };
    auto grad = [&]( const Vec3& r ) { return Vec3(2.0 * f.jacobian(r).transpose() * f.field(r)); };
    auto done = [&]( const Vec3& r, double fx, const Vec3& ) {
      const double b = std::sqrt(fx);
      if (b <= tiny)
        return true;
      return field_magnitude_gradient(f, r).norm() < 1e-10;
    };
    MinimumResult res = newton_minimize(value, grad, done, seed, default_hessian_step(f, seed),
                                        initial_radius(f, seed));
    res.B0 = f.field(res.position).norm();
    res.zero_field = res.B0 <= tiny;
    if (res.zero_field) {
      res.gradient_norm = 0.0;
      return res;
    }
    res.gradient_norm = field_magnitude_gradient(f, res.position).norm();
    const Mat3 H = fd_hessian([&]( const Vec3& r ) { return field_magnitude_gradient(f, r); }, res.position,
                              default_hessian_step(f, res.position));
    const Eigen::Vector3d lam = Eigen::SelfAdjointEigenSolver<Mat3>(H).eigenvalues();
    if (lam.minCoeff() < -1e-6 * lam.cwiseAbs().maxCoeff()) {
      std::ostringstream ss;
      ss << "stationary point of |B| at (" << res.position.transpose() * 1e6
         << ") um is a saddle (Hessian eigenvalues " << lam.transpose() << " T/m^2)";
      fail(ErrorCode::NotATrap, ss.str());
    }
    return res;
  }

  MinimumResult find_potential_minimum( const MagneticField& f, const SpinState& s, const PotentialOptions& o,
                                        const Vec3& seed )
  {
    validate(s);
    const double mu = moment(s);
    require(mu > 0.0, ErrorCode::NotATrap, s.label() + " is not magnetically trappable (m_F g_F <= 0)");
    auto value = [&]( const Vec3& r ) { return potential_energy(f, s, o, r); };
    auto grad = [&]( const Vec3& r ) { return potential_gradient(f, s, o, r); };
    auto done = [&]( const Vec3&, double, const Vec3& g ) { return g.norm() / mu < 1e-10; };
    MinimumResult res = newton_minimize(value, grad, done, seed, default_hessian_step(f, seed),
                                        initial_radius(f, seed));
    res.B0 = f.field(res.position).norm();
    res.gradient_norm = potential_gradient(f, s, o, res.position).norm() / mu;
    const Mat3 H = fd_hessian(grad, res.position, default_hessian_step(f, res.position));
    const Eigen::Vector3d lam = Eigen::SelfAdjointEigenSolver<Mat3>(H).eigenvalues();
    if (lam.minCoeff() < -1e-6 * lam.cwiseAbs().maxCoeff())
      fail(ErrorCode::NotATrap, "stationary point of the potential is a saddle");
    return res;
  }

  Mat3 potential_hessian( const MagneticField& f, const SpinState& s, const PotentialOptions& o, const Vec3& r,
                          double step )
  {
    if (!(step > 0.0))
      step = default_hessian_step(f, r);
    return fd_hessian([&]( const Vec3& x ) { return potential_gradient(f, s, o, x); }, r, step);
  }

  TrapFrequencies trap_frequencies( const MagneticField& f, const SpinState& s, const PotentialOptions& o,
                                    const Vec3& r0 )
  {
    validate(s);
    const Mat3 H = potential_hessian(f, s, o, r0);
    Eigen::SelfAdjointEigenSolver<Mat3> es(H);
    const Eigen::Vector3d lam = es.eigenvalues();
    if (!(lam.minCoeff() > 0.0)) {
      std::ostringstream ss;
      ss << "potential curvature at (" << r0.transpose() * 1e6 << ") um has eigenvalues " << lam.transpose()
         << " J/m^2: not a trap for " << s.label();
      fail(ErrorCode::NotATrap, ss.str());
    }
    TrapFrequencies out;
    for (int i = 0; i < 3; ++i)
      out.omega[i] = std::sqrt(lam[i] / s.mass());
    out.axes = es.eigenvectors();
    // Assign eigenvectors to lab axes by the permutation with the largest
    // product of |components|.
    std::array<int, 3> perm{ 0, 1, 2 }, best = perm;
    double best_score = -1.0;
    do {
      double score = 1.0;
      for (int a = 0; a < 3; ++a)
        score *= std::abs(out.axes(a, perm[a]));
      if (score > best_score) {
        best_score = score;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int a = 0; a < 3; ++a)
      out.omega_lab[a] = out.omega[best[a]];
    return out;
  }

  // ----------------------------------------------------------------- depth

  namespace {

    struct RayOutcome {
      bool bounded = false;
      double barrier = 0.0;   // J above U0
      double distance = 0.0;
      std::string reason;
    };

    RayOutcome scan_ray( const MagneticField& f, const SpinState& s, const PotentialOptions& o, const Vec3& r0,
                         double U0, double flat, const Vec3& dir, double length, int samples )
    {
      RayOutcome out;
      double s_end = length;
      bool clipped = false;
      if (o.surface) {
        const Vec3 n = o.surface->normal.normalized();
        const double nd = n.dot(dir);
        if (nd < 0.0) {
          const double hit = n.dot(r0 - o.surface->point) / -nd;
          if (hit < s_end) {
            s_end = hit;
            clipped = true;
          }
        }
      }
      auto U = [&]( double t ) { return potential_energy(f, s, o, Vec3(r0 + t * dir)); };
      const double guard = 2.0 * WireFieldModel::guard_distance;
      std::vector<double> ts, us;
      ts.reserve(samples + 1);
      us.reserve(samples + 1);
      ts.push_back(0.0);
      us.push_back(U0);
      // quadratic spacing: fine near the trap, reaching far out
      for (int k = 1; k <= samples; ++k) {
        const double q = double(k) / double(samples);
        const double t = s_end * q * q;
        if (f.source_distance(Vec3(r0 + t * dir)) < guard) {
          clipped = true;
          break;
        }
        ts.push_back(t);
        us.push_back(U(t));
      }
      const std::size_t n = us.size();
      // first interior local maximum above the start
      for (std::size_t k = 1; k + 1 < n; ++k) {
        if (us[k] - U0 > flat && us[k] >= us[k - 1] && us[k] > us[k + 1]) {
          auto neg = [&]( double t ) { return -U(t); };
          auto r = boost::math::tools::brent_find_minima(neg, ts[k - 1], ts[k + 1], 40);
          out.bounded = true;
          out.distance = r.first;
          out.barrier = std::max(-r.second, us[k]) - U0;
          out.reason = "barrier";
          return out;
        }
      }
      if (n < 3) {
        out.reason = "ray blocked immediately";
        return out;
      }
      const double top = *std::max_element(us.begin(), us.end());
      if (clipped) {
        out.bounded = true;
        out.barrier = top - U0;
        out.distance = ts[std::max_element(us.begin(), us.end()) - us.begin()];
        out.reason = "surface";
        return out;
      }
      const std::size_t quarter = n / 2;   // t = s_end / 4 on the quadratic grid
      const double end_rise = us.back() - U0;
      const double mid_rise = us[quarter] - U0;
      if (!(end_rise > flat) || !(mid_rise > 0.0)) {
        out.reason = "no barrier (potential does not rise)";
        return out;
      }
      // log-log growth over the outer part of the ray
      const double p = std::log(end_rise / mid_rise) / std::log(ts.back() / ts[quarter]);
      if (p > 0.5) {
        std::ostringstream ss;
        ss.precision(3);
        ss << "unbounded (potential still growing as s^" << p << " at the end of the ray)";
        out.reason = ss.str();
        return out;
      }
      // Saturating ray: extrapolate the asymptote assuming U = A - C/s,
      // the far-field approach of wire fields to the bias.
      const double t1 = ts[quarter];
      const double t2 = ts.back();
      const double asymptote = (t2 * us.back() - t1 * us[quarter]) / (t2 - t1);
      out.bounded = true;
      out.barrier = std::max(top, asymptote) - U0;
      out.distance = ts.back();
      out.reason = "asymptotic";
      return out;
    }

  }

  DepthResult trap_depth( const MagneticField& f, const SpinState& s, const PotentialOptions& o, const Vec3& r0,
                          const DepthOptions& opt )
  {
    validate(s);
    require(opt.samples >= 10, ErrorCode::InvalidArgument, "depth scan needs at least 10 samples per ray");
    double length = opt.max_distance;
    if (!(length > 0.0)) {
      const double d = f.source_distance(r0);
      length = std::isfinite(d) ? 50.0 * d : 1e-3;
    }
    const double U0 = potential_energy(f, s, o, r0);
    // Rays rising less than this are flat (e.g. along a long straight wire).
    const double scale_length = std::isfinite(f.source_distance(r0)) ? f.source_distance(r0) : length;
    const double flat = 1e-6 * magnetic_moment(s)
                        * std::max(f.field(r0).norm(), f.jacobian(r0).norm() * scale_length);

    std::vector<Vec3> dirs;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k)
          if (i || j || k)
            dirs.push_back(Vec3(i, j, k).normalized());
    try {
      const Mat3 H = potential_hessian(f, s, o, r0);
      Eigen::SelfAdjointEigenSolver<Mat3> es(H);
      for (int k = 0; k < 3; ++k) {
        dirs.push_back(es.eigenvectors().col(k));
        dirs.push_back(-es.eigenvectors().col(k));
      }
    } catch ( const Error& ) {
      // zero-field minimum: no curvature axes, the grid alone is used
    }

    DepthResult res;
    auto consider = [&]( const Vec3& d, bool record ) {
      RayOutcome ro = scan_ray(f, s, o, r0, U0, flat, d, length, opt.samples);
      // A saturating ray may just be too short (shallow rays along a wire
      // leave the trap region slowly); extend until the asymptote settles.
      double len = length;
      for (int ext = 0; ext < 3 && ro.bounded && ro.reason == "asymptotic"; ++ext) {
        len *= 4.0;
        RayOutcome longer = scan_ray(f, s, o, r0, U0, flat, d, len, opt.samples);
        const bool settled = longer.bounded && std::abs(longer.barrier - ro.barrier) <= 1e-2 * ro.barrier;
        ro = longer;
        if (settled)
          break;
      }
      ++res.rays;
      if (!ro.bounded) {
        if (record)
          res.excluded.push_back({ d, ro.reason });
        return std::numeric_limits<double>::infinity();
      }
      if (ro.barrier < res.depth) {
        res.depth = ro.barrier;
        res.direction = d;
        res.barrier_distance = ro.distance;
      }
      return ro.barrier;
    };
    for (const auto& d : dirs)
      consider(d, true);

    if (opt.refine && std::isfinite(res.depth)) {
      // stay within the grid cell of the weakest grid ray
      const Vec3 anchor = res.direction;
      double delta = 0.2;
      for (int round = 0; round < 10; ++round) {
        const Vec3 d0 = res.direction;
        Vec3 t1 = d0.unitOrthogonal();
        Vec3 t2 = d0.cross(t1);
        const double before = res.depth;
        for (const Vec3& t : { t1, Vec3(-t1), t2, Vec3(-t2) }) {
          const Vec3 d = (d0 + delta * t).normalized();
          if (d.dot(anchor) > std::cos(0.35))
            consider(d, false);
        }
        if (!(res.depth < before))
          delta *= 0.5;
      }
    }
    res.temperature_equivalent = units::energy_to_kelvin(res.depth);
    return res;
  }

  // ---------------------------------------------------------------- IP fit

  double ip_transverse_frequency( const SpinState& s, double B0, double gradient )
  {
    require(B0 > 0.0, ErrorCode::Domain, "IP frequency needs B0 > 0");
    return gradient * std::sqrt(moment(s) / (s.mass() * B0));
  }

  double ip_gradient_from_frequency( const SpinState& s, double B0, double omega )
  {
    require(B0 > 0.0 && moment(s) > 0.0, ErrorCode::Domain, "IP inversion needs B0 > 0 and a trappable state");
    return omega * std::sqrt(s.mass() * B0 / moment(s));
  }

  IPFitResult ip_fit( const MagneticField& f, const Vec3& r0 )
  {
    const Vec3 B = f.field(r0);
    const double B0 = B.norm();
    const double h = default_hessian_step(f, r0);
    // field zero relative to the field the gradient builds over the local length scale
    const double d = f.source_distance(r0);
    const double len = std::isfinite(d) ? d : 1e3 * h;
    require(B0 > 1e-9 * f.jacobian(r0).norm() * len, ErrorCode::NotATrap,
            "zero field at the minimum: no Ioffe-Pritchard parameters");
    const Vec3 eax = B / B0;
    const Mat3 H = fd_hessian([&]( const Vec3& r ) { return field_magnitude_gradient(f, r); }, r0, h);
    const Mat3 P = Mat3::Identity() - eax * eax.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(P * H * P);
    // drop the eigenvector along the axis
    int skip = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(es.eigenvectors().col(k).dot(eax)) > std::abs(es.eigenvectors().col(skip).dot(eax)))
        skip = k;
    std::vector<Vec3> trans;
    for (int k = 2; k >= 0; --k)
      if (k != skip)
        trans.push_back(es.eigenvectors().col(k));
    Vec3 e1 = (trans[0] - trans[0].dot(eax) * eax).normalized();
    Vec3 e2 = e1.cross(eax);

    IPFitResult out;
    out.params.B0 = B0;
    out.params.center = r0;
    out.params.axes.col(0) = e1;
    out.params.axes.col(1) = eax;
    out.params.axes.col(2) = e2;

    // axial curvature: B = B0 + c1 s + B'' s^2 / 2
    const double kax = eax.dot(H * eax);
    const double sax = kax > 0.0 ? 0.2 * std::sqrt(2.0 * B0 / kax) : 1e-6;
    {
      const int n = 41;
      Eigen::MatrixXd A(n, 3);
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) {
        const double t = sax * (2.0 * i / double(n - 1) - 1.0);
        A(i, 0) = 1.0;
        A(i, 1) = t;
        A(i, 2) = 0.5 * t * t;
        y[i] = f.field(Vec3(r0 + t * eax)).norm() - B0;
      }
      const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
      out.params.curvature = c[2];
    }

    // transverse: B^2 = a + b s^2, exact for an IP field without curvature;
    // with curvature b = B'^2 - B0 B''/2 up to O(s^4).
    double sumsq = 0.0;
    int count = 0;
    double grads[2] = { 0.0, 0.0 };
    for (int axis = 0; axis < 2; ++axis) {
      const Vec3 e = axis == 0 ? e1 : e2;
      const double k = e.dot(H * e);
      const double bp_est = k > 0.0 ? std::sqrt(k * B0) : std::max(f.jacobian(r0).norm(), 1e-12);
      const double sfit = 0.2 * B0 / bp_est;
      const int n = 41;
      Eigen::MatrixXd A(n, 2);
      Eigen::VectorXd y(n), mag(n), svals(n);
      for (int i = 0; i < n; ++i) {
        const double t = sfit * (2.0 * i / double(n - 1) - 1.0);
        svals[i] = t;
        mag[i] = f.field(Vec3(r0 + t * e)).norm();
        A(i, 0) = 1.0;
        A(i, 1) = t * t;
        y[i] = mag[i] * mag[i];
      }
      const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
      const double b = c[1] + 0.5 * B0 * out.params.curvature;
      if (!(c[1] > 0.0))
        out.transverse_trapping = false;
      grads[axis] = b > 0.0 ? std::sqrt(b) : 0.0;
      for (int i = 0; i < n; ++i) {
        const double model = std::sqrt(std::max(c[0] + c[1] * svals[i] * svals[i], 0.0));
        sumsq += (model - mag[i]) * (model - mag[i]);
        ++count;
      }
    }
    out.gradient_1 = grads[0];
    out.gradient_2 = grads[1];
    out.params.gradient = std::sqrt(grads[0] * grads[1]);
    out.residual_rms = std::sqrt(sumsq / count) / B0;
    out.poor_fit = out.residual_rms > 0.01;
    return out;
  }

  // ------------------------------------------------------------- geometry

  namespace {

    using nlohmann::json;

    void check_keys( const json& j, std::initializer_list<const char*> known, const std::string& where )
    {
      require(j.is_object(), ErrorCode::Parse, where + " must be an object");
      for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
          ok = ok || it.key() == k;
        require(ok, ErrorCode::Parse, "unknown key '" + it.key() + "' in " + where);
      }
    }

    Vec3 vec3( const json& j, const std::string& what, double scale )
    {
      require(j.is_array() && j.size() == 3, ErrorCode::Parse, what + " must be a 3-vector");
      Vec3 v;
      for (int i = 0; i < 3; ++i) {
        require(j[i].is_number(), ErrorCode::Parse, what + " must contain numbers");
        v[i] = j[i].get<double>() * scale;
      }
      return v;
    }

    json vec_json( const Vec3& v, double scale )
    {
      return json::array({ v[0] / scale, v[1] / scale, v[2] / scale });
    }

  }

  FieldConfig field_config_from_json_text( const std::string& text )
  {
    json doc;
    try {
      doc = json::parse(text);
    } catch ( const json::exception& e ) {
      fail(ErrorCode::Parse, std::string("geometry file: ") + e.what());
    }
    check_keys(doc, { "name", "note", "calibrated", "model", "segments", "bias_G", "ioffe_pritchard", "gravity",
                      "surface", "seed_um" },
               "geometry file");
    FieldConfig cfg;
    cfg.name = doc.value("name", std::string());
    cfg.note = doc.value("note", std::string());
    cfg.calibrated = doc.value("calibrated", false);
    const std::string model = doc.value("model", std::string("wires"));
    const double um = units::micrometre;
    if (model == "wires") {
      require(!doc.contains("ioffe_pritchard"), ErrorCode::Parse, "wire geometry cannot carry ioffe_pritchard");
      std::vector<WireSegment> segs;
      if (doc.contains("segments")) {
        require(doc["segments"].is_array(), ErrorCode::Parse, "segments must be an array");
        for (const auto& js : doc["segments"]) {
          check_keys(js, { "from_um", "to_um", "current_A" }, "segment");
          require(js.contains("from_um") && js.contains("to_um") && js.contains("current_A"), ErrorCode::Parse,
                  "segment needs from_um, to_um, current_A");
          segs.push_back({ vec3(js["from_um"], "from_um", um), vec3(js["to_um"], "to_um", um),
                           js["current_A"].get<double>() });
        }
      }
      Vec3 bias = doc.contains("bias_G") ? vec3(doc["bias_G"], "bias_G", units::gauss) : Vec3::Zero();
      auto w = std::make_shared<WireFieldModel>(std::move(segs), bias);
      cfg.wires = w;
      cfg.field = w;
    } else if (model == "ioffe-pritchard") {
      require(doc.contains("ioffe_pritchard"), ErrorCode::Parse, "ioffe-pritchard model needs its parameters");
      require(!doc.contains("segments") && !doc.contains("bias_G"), ErrorCode::Parse,
              "ioffe-pritchard model takes no segments or bias");
      const auto& ip = doc["ioffe_pritchard"];
      check_keys(ip, { "B0_G", "gradient_G_per_cm", "curvature_G_per_cm2", "center_um", "axial_axis",
                       "transverse_axis" },
                 "ioffe_pritchard");
      require(ip.contains("B0_G") && ip.contains("gradient_G_per_cm"), ErrorCode::Parse,
              "ioffe_pritchard needs B0_G and gradient_G_per_cm");
      IPTrapParams p;
      p.B0 = ip["B0_G"].get<double>() * units::gauss;
      p.gradient = ip["gradient_G_per_cm"].get<double>() * units::gauss_per_cm;
      p.curvature = ip.value("curvature_G_per_cm2", 0.0) * units::gauss_per_cm2;
      if (ip.contains("center_um"))
        p.center = vec3(ip["center_um"], "center_um", um);
      Vec3 ax = ip.contains("axial_axis") ? vec3(ip["axial_axis"], "axial_axis", 1.0) : Vec3::UnitY();
      Vec3 tr = ip.contains("transverse_axis") ? vec3(ip["transverse_axis"], "transverse_axis", 1.0)
                                               : Vec3::UnitX();
      require(ax.norm() > 0.0 && tr.norm() > 0.0, ErrorCode::Parse, "IP axes must be non-zero");
      ax.normalize();
      tr = (tr - tr.dot(ax) * ax);
      require(tr.norm() > 1e-9, ErrorCode::Parse, "IP transverse axis is parallel to the axial axis");
      tr.normalize();
      p.axes.col(0) = tr;
      p.axes.col(1) = ax;
      p.axes.col(2) = tr.cross(ax);
      cfg.field = std::make_shared<IoffePritchardField>(p);
      if (!cfg.seed)
        cfg.seed = p.center;
    } else {
      fail(ErrorCode::Parse, "unknown field model '" + model + "'");
    }
    if (doc.contains("gravity")) {
      check_keys(doc["gravity"], { "enabled", "up" }, "gravity");
      cfg.options.gravity = doc["gravity"].value("enabled", false);
      if (doc["gravity"].contains("up"))
        cfg.options.up = vec3(doc["gravity"]["up"], "gravity.up", 1.0).normalized();
    }
    if (doc.contains("surface")) {
      check_keys(doc["surface"], { "point_um", "normal" }, "surface");
      SurfacePlane sp;
      if (doc["surface"].contains("point_um"))
        sp.point = vec3(doc["surface"]["point_um"], "surface.point_um", um);
      if (doc["surface"].contains("normal"))
        sp.normal = vec3(doc["surface"]["normal"], "surface.normal", 1.0).normalized();
      cfg.options.surface = sp;
    }
    if (doc.contains("seed_um"))
      cfg.seed = vec3(doc["seed_um"], "seed_um", um);
    return cfg;
  }

  FieldConfig load_field_config( const std::string& path )
  {
    std::ifstream in(path);
    require(bool(in), ErrorCode::Io, "cannot open geometry file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return field_config_from_json_text(ss.str());
  }

  std::string wire_model_to_json_text( const WireFieldModel& m, const std::string& name, const std::string& note,
                                       bool calibrated, const std::optional<Vec3>& seed,
                                       const std::optional<SurfacePlane>& surface )
  {
    const double um = units::micrometre;
    json doc;
    doc["name"] = name;
    doc["note"] = note;
    doc["calibrated"] = calibrated;
    doc["model"] = "wires";
    json segs = json::array();
    for (const auto& s : m.segments())
      segs.push_back({ { "from_um", vec_json(s.a, um) }, { "to_um", vec_json(s.b, um) }, { "current_A", s.current } });
    doc["segments"] = segs;
    doc["bias_G"] = vec_json(m.bias(), units::gauss);
    if (surface)
      doc["surface"] = { { "point_um", vec_json(surface->point, um) }, { "normal", vec_json(surface->normal, 1.0) } };
    if (seed)
      doc["seed_um"] = vec_json(*seed, um);
    return doc.dump(2);
  }

}
