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

// Magnetostatics of chip wire traps: finite straight segments (Biot-Savart)
// plus uniform bias, an analytic Ioffe-Pritchard model, and the trap
// analysis built on |B| (minimum, frequencies, depth, IP parameters).

#include "constants.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fermichip {

  using Vec3 = Eigen::Vector3d;
  using Mat3 = Eigen::Matrix3d;

  struct WireSegment {
    Vec3 a = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    double current = 0.0;   // A, positive from a to b
  };

  class MagneticField {
  public:
    virtual ~MagneticField() = default;
    virtual Vec3 field( const Vec3& r ) const = 0;
    // J(i, j) = dB_i / dr_j
    virtual Mat3 jacobian( const Vec3& r ) const = 0;
    // Distance from r to the nearest source; +inf when there is none.
    virtual double source_distance( const Vec3& ) const { return std::numeric_limits<double>::infinity(); }
  };

  // Implements field() and jacobian() from a scalar-generic Derived::eval<S>().
  template <class Derived>
  class AutoDiffField : public MagneticField {
  public:
    Vec3 field( const Vec3& r ) const override
    {
      return static_cast<const Derived&>(*this).template eval<double>(r);
    }
    Mat3 jacobian( const Vec3& r ) const override
    {
      using AD = Eigen::AutoDiffScalar<Eigen::Vector3d>;
      Eigen::Matrix<AD, 3, 1> x;
      for (int i = 0; i < 3; ++i)
        x[i] = AD(r[i], 3, i);
      const Eigen::Matrix<AD, 3, 1> B = static_cast<const Derived&>(*this).template eval<AD>(x);
      Mat3 J;
      for (int i = 0; i < 3; ++i)
        J.row(i) = B[i].derivatives().transpose();
      return J;
    }
  };

  class WireFieldModel : public AutoDiffField<WireFieldModel> {
  public:
    WireFieldModel() = default;
    WireFieldModel( std::vector<WireSegment> segments, Vec3 bias );

    const std::vector<WireSegment>& segments() const { return m_segments; }
    const Vec3& bias() const { return m_bias; }

    // Positions closer than this to a segment are rejected.
    static constexpr double guard_distance = 1e-6;

    // Same geometry with every current and the bias multiplied by `factor`.
    WireFieldModel scaled( double factor ) const;
    WireFieldModel translated( const Vec3& shift ) const;
    WireFieldModel with_bias( const Vec3& bias ) const;

    double source_distance( const Vec3& r ) const override;

    // Guarded evaluation; throws ErrorCode::Domain inside the guard.
    Vec3 field( const Vec3& r ) const override;
    Mat3 jacobian( const Vec3& r ) const override;

    template <class S>
    Eigen::Matrix<S, 3, 1> eval( const Eigen::Matrix<S, 3, 1>& r ) const;

  private:
    void guard( const Vec3& r ) const;
    std::vector<WireSegment> m_segments;
    Vec3 m_bias = Vec3::Zero();
  };

  // B = B0 e_ax + B'(u e_1 - w e_2) + B''/2 [(v^2 - (u^2+w^2)/2) e_ax - u v e_1 - w v e_2]
  // with (u, v, w) the coordinates along (e_1, e_ax, e_2) relative to the centre.
  struct IPTrapParams {
    double B0 = 0.0;          // T
    double gradient = 0.0;    // T/m
    double curvature = 0.0;   // T/m^2
    Vec3 center = Vec3::Zero();
    Mat3 axes = Mat3::Identity();   // columns e_1, e_ax, e_2 (right handed)
  };

  class IoffePritchardField : public AutoDiffField<IoffePritchardField> {
  public:
    explicit IoffePritchardField( IPTrapParams p );
    const IPTrapParams& params() const { return m_p; }

    template <class S>
    Eigen::Matrix<S, 3, 1> eval( const Eigen::Matrix<S, 3, 1>& r ) const;

  private:
    IPTrapParams m_p;
  };

  struct SurfacePlane {
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();   // atoms live on this side
  };

  // Everything beyond the field that shapes the potential energy.
  struct PotentialOptions {
    bool gravity = false;                 // off by default
    Vec3 up = Vec3::UnitZ();              // U_g = M g (up . r)
    double g = 9.80665;                   // m/s^2
    std::optional<SurfacePlane> surface;  // atoms reaching it are lost
    std::function<double( const Vec3& )> perturbation;   // J, optional
  };

  // U = m_F g_F mu_B |B| (+ gravity, + perturbation)
  double potential_energy( const MagneticField&, const SpinState&, const PotentialOptions&, const Vec3& r );
  Vec3 potential_gradient( const MagneticField&, const SpinState&, const PotentialOptions&, const Vec3& r );

  // grad |B| = J^T B / |B|
  Vec3 field_magnitude_gradient( const MagneticField&, const Vec3& r );

  struct MinimumResult {
    Vec3 position = Vec3::Zero();
    double B0 = 0.0;            // T
    double gradient_norm = 0.0; // T/m at return (of |B|, or of U/mu for potential minima)
    bool zero_field = false;    // |B| vanishes at the minimum (quadrupole)
    int iterations = 0;
  };

  // Minimizes |B|. Throws Convergence on failure and NotATrap at a saddle.
  MinimumResult find_minimum( const MagneticField&, const Vec3& seed );
  // Minimizes the full potential (gravity and perturbation included).
  MinimumResult find_potential_minimum( const MagneticField&, const SpinState&, const PotentialOptions&,
                                        const Vec3& seed );

  // Central-difference Hessian of U with one Richardson level. The step is
  // max(1e-8 m, 1e-4 B0/B') unless given.
  Mat3 potential_hessian( const MagneticField&, const SpinState&, const PotentialOptions&, const Vec3& r,
                          double step = 0.0 );
  double default_hessian_step( const MagneticField&, const Vec3& r );

  struct TrapFrequencies {
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();   // rad/s, ascending
    Mat3 axes = Mat3::Identity();                      // matching eigenvectors (columns)
    // Frequencies re-ordered by the lab axis each eigenvector is closest to.
    Eigen::Vector3d omega_lab = Eigen::Vector3d::Zero();
  };
  TrapFrequencies trap_frequencies( const MagneticField&, const SpinState&, const PotentialOptions&,
                                    const Vec3& r0 );

  struct DepthOptions {
    double max_distance = 0.0;   // ray length, m; 0 = automatic
    int samples = 2000;          // per ray
    bool refine = true;          // pattern search around the weakest ray
  };

  struct ExcludedRay {
    Vec3 direction;
    std::string reason;
  };

  struct DepthResult {
    double depth = std::numeric_limits<double>::infinity();   // J
    double temperature_equivalent = std::numeric_limits<double>::infinity();   // K
    Vec3 direction = Vec3::Zero();   // weakest escape direction
    double barrier_distance = 0.0;   // m along that direction
    std::vector<ExcludedRay> excluded;
    int rays = 0;
  };
  DepthResult trap_depth( const MagneticField&, const SpinState&, const PotentialOptions&, const Vec3& r0,
                          const DepthOptions& = {} );

  struct IPFitResult {
    IPTrapParams params;
    double gradient_1 = 0.0;       // T/m along e_1
    double gradient_2 = 0.0;       // T/m along e_2
    double residual_rms = 0.0;     // relative to B0
    bool poor_fit = false;         // residual above 1% of B0
    bool transverse_trapping = true;
  };
  IPFitResult ip_fit( const MagneticField&, const Vec3& r0 );

  // IP transverse frequency w = B' sqrt(m_F g_F mu_B / (M B0)) (curvature neglected),
  // and its inversion for B'.
  double ip_transverse_frequency( const SpinState&, double B0, double gradient );
  double ip_gradient_from_frequency( const SpinState&, double B0, double omega );

  // Geometry files (JSON). Lengths in um, currents in A, fields in G.
  struct FieldConfig {
    std::string name;
    std::string note;
    bool calibrated = false;
    std::shared_ptr<const MagneticField> field;
    std::shared_ptr<const WireFieldModel> wires;   // null for the IP model
    PotentialOptions options;
    std::optional<Vec3> seed;
  };
  FieldConfig field_config_from_json_text( const std::string& text );
  FieldConfig load_field_config( const std::string& path );
  std::string wire_model_to_json_text( const WireFieldModel&, const std::string& name, const std::string& note,
                                       bool calibrated, const std::optional<Vec3>& seed,
                                       const std::optional<SurfacePlane>& surface );

  // ---- template definitions ----

  template <class S>
  Eigen::Matrix<S, 3, 1> WireFieldModel::eval( const Eigen::Matrix<S, 3, 1>& r ) const
  {
    using std::sqrt;
    Eigen::Matrix<S, 3, 1> B;
    for (int i = 0; i < 3; ++i)
      B[i] = S(m_bias[i]);
    const double k = constants.mu_0 / (4.0 * kPi);
    for (const auto& seg : m_segments) {
      Eigen::Matrix<S, 3, 1> r1, r2;
      for (int i = 0; i < 3; ++i) {
        r1[i] = r[i] - seg.a[i];
        r2[i] = r[i] - seg.b[i];
      }
      const Vec3 L = seg.b - seg.a;
      const S n1 = sqrt(r1.dot(r1));
      const S n2 = sqrt(r2.dot(r2));
      const S factor = (n1 + n2) / (n1 * n2 * (n1 * n2 + r1.dot(r2)));
      Eigen::Matrix<S, 3, 1> c;
      c[0] = L[1] * r1[2] - L[2] * r1[1];
      c[1] = L[2] * r1[0] - L[0] * r1[2];
      c[2] = L[0] * r1[1] - L[1] * r1[0];
      B += (k * seg.current) * factor * c;
    }
    return B;
  }

  template <class S>
  Eigen::Matrix<S, 3, 1> IoffePritchardField::eval( const Eigen::Matrix<S, 3, 1>& r ) const
  {
    Eigen::Matrix<S, 3, 1> d;
    for (int i = 0; i < 3; ++i)
      d[i] = r[i] - m_p.center[i];
    // local coordinates
    const S u = m_p.axes(0, 0) * d[0] + m_p.axes(1, 0) * d[1] + m_p.axes(2, 0) * d[2];
    const S v = m_p.axes(0, 1) * d[0] + m_p.axes(1, 1) * d[1] + m_p.axes(2, 1) * d[2];
    const S w = m_p.axes(0, 2) * d[0] + m_p.axes(1, 2) * d[1] + m_p.axes(2, 2) * d[2];
    const double h = 0.5 * m_p.curvature;
    const S b1 = m_p.gradient * u - h * u * v;
    const S bax = m_p.B0 + h * (v * v - 0.5 * (u * u + w * w));
    const S b2 = -m_p.gradient * w - h * w * v;
    Eigen::Matrix<S, 3, 1> B;
    for (int i = 0; i < 3; ++i)
      B[i] = m_p.axes(i, 0) * b1 + m_p.axes(i, 1) * bax + m_p.axes(i, 2) * b2;
    return B;
  }

}
