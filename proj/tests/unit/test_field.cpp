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

#include "doctest.h"

#include "checks.hpp"
#include "field.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace fermichip;

namespace {

  const SpinState& K40() { static const SpinState s = builtin_species().stretched("K40"); return s; }
  const SpinState& Rb87() { static const SpinState s = builtin_species().stretched("Rb87"); return s; }

  // Biot-Savart by brute force: midpoint rule over small current elements.
  Vec3 brute_force( const std::vector<WireSegment>& segs, const Vec3& bias, const Vec3& r, int pieces = 200000 )
  {
    Vec3 B = bias;
    for (const auto& s : segs) {
      const Vec3 dl = (s.b - s.a) / pieces;
      for (int i = 0; i < pieces; ++i) {
        const Vec3 p = s.a + (i + 0.5) * dl;
        const Vec3 d = r - p;
        B += constants.mu_0 / (4.0 * kPi) * s.current * dl.cross(d) / std::pow(d.norm(), 3);
      }
    }
    return B;
  }

  double rel( const Vec3& a, const Vec3& b ) { return (a - b).norm() / b.norm(); }

  IPTrapParams ip( double B0_G, double grad_G_cm, double curv_G_cm2 )
  {
    IPTrapParams p;
    p.B0 = B0_G * units::gauss;
    p.gradient = grad_G_cm * units::gauss_per_cm;
    p.curvature = curv_G_cm2 * units::gauss_per_cm2;
    return p;
  }

  // Closed rectangular loop in the z = 0 plane.
  std::vector<WireSegment> loop( double a, double b, double I )
  {
    const Vec3 c[4] = { { -a, -b, 0 }, { a, -b, 0 }, { a, b, 0 }, { -a, b, 0 } };
    std::vector<WireSegment> s;
    for (int i = 0; i < 4; ++i)
      s.push_back({ c[i], c[(i + 1) % 4], I });
    return s;
  }

}

TEST_SUITE("field") {

  TEST_CASE("finite segment matches the closed-form perpendicular field")
  {
    const double L = 2e-3, d = 150e-6, I = 2.0;
    const WireFieldModel m({ { Vec3(-L / 2, 0, 0), Vec3(L / 2, 0, 0), I } }, Vec3::Zero());
    const Vec3 B = m.field(Vec3(0, 0, d));
    const double expect = constants.mu_0 * I / (2.0 * kPi * d) * (L / 2) / std::hypot(d, L / 2);
    CHECK(B[1] == doctest::Approx(-expect).epsilon(1e-13));
    CHECK(std::abs(B[0]) < 1e-15);
    CHECK(std::abs(B[2]) < 1e-15);
    // a long wire approaches mu0 I / (2 pi d)
    const WireFieldModel lng({ { Vec3(-1.0, 0, 0), Vec3(1.0, 0, 0), I } }, Vec3::Zero());
    CHECK(lng.field(Vec3(0, 0, d)).norm() == doctest::Approx(constants.mu_0 * I / (2 * kPi * d)).epsilon(1e-7));
  }

  TEST_CASE("segments agree with brute-force Biot-Savart integration")
  {
    oracle::Gen gen(31);
    std::vector<WireSegment> segs;
    for (int i = 0; i < 3; ++i)
      segs.push_back({ Vec3(gen.uniform(-1e-3, 1e-3), gen.uniform(-1e-3, 1e-3), 0.0),
                       Vec3(gen.uniform(-1e-3, 1e-3), gen.uniform(-1e-3, 1e-3), gen.uniform(-1e-4, 1e-4)),
                       gen.uniform(-3.0, 3.0) });
    const Vec3 bias(1e-4, -2e-4, 0.5e-4);
    const WireFieldModel m(segs, bias);
    for (int i = 0; i < 5; ++i) {
      const Vec3 r(gen.uniform(-5e-4, 5e-4), gen.uniform(-5e-4, 5e-4), gen.uniform(2e-4, 6e-4));
      CHECK(rel(m.field(r), brute_force(segs, bias, r)) < 1e-8);
    }
  }

  TEST_CASE("field is linear in the currents and moves with the geometry")
  {
    const WireFieldModel m(loop(1e-3, 2e-3, 1.5), Vec3(0, 1e-4, 0));
    const Vec3 r(1e-4, -2e-4, 3e-4);
    CHECK(rel(m.scaled(2.0).field(r), 2.0 * m.field(r)) < 1e-14);
    const Vec3 shift(5e-4, 1e-4, -2e-5);
    CHECK(rel(m.translated(shift).field(r + shift), m.field(r)) < 1e-12);
    CHECK(rel(m.with_bias(Vec3::Zero()).field(r), m.field(r) - Vec3(0, 1e-4, 0)) < 1e-12);
  }

  TEST_CASE("analytic Jacobian matches finite differences, divergence and curl vanish")
  {
    const WireFieldModel m(loop(1e-3, 1.5e-3, 2.0), Vec3(2e-4, 0, 0));
    oracle::Gen gen(41);
    for (int i = 0; i < 25; ++i) {
      const Vec3 r(gen.uniform(-8e-4, 8e-4), gen.uniform(-1.2e-3, 1.2e-3), gen.uniform(5e-5, 5e-4));
      const Mat3 J = m.jacobian(r);
      const double h = 1e-4 * m.source_distance(r);
      Mat3 F;
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        F.col(k) = (m.field(r + e) - m.field(r - e)) / (2 * h);
      }
      CHECK((J - F).norm() / J.norm() < 1e-6);
      CHECK(std::abs(J.trace()) / J.norm() < 1e-12);
      CHECK((J - J.transpose()).norm() / J.norm() < 1e-12);
    }
  }

  TEST_CASE("points on a wire are rejected")
  {
    const WireFieldModel m({ { Vec3(-1e-3, 0, 0), Vec3(1e-3, 0, 0), 1.0 } }, Vec3::Zero());
    CHECK(error_code_of([&] { m.field(Vec3(0, 0, 1e-7)); }) == ErrorCode::Domain);
    CHECK(m.source_distance(Vec3(0, 0, 3e-6)) == doctest::Approx(3e-6));
    CHECK(error_code_of([] { WireFieldModel({ { Vec3::Zero(), Vec3::Zero(), 1.0 } }, Vec3::Zero()); })
          == ErrorCode::InvalidArgument);
  }

  TEST_CASE("Ioffe-Pritchard trap frequencies from the Hessian")
  {
    oracle::Gen gen(51);
    for (int i = 0; i < 10; ++i) {
      const auto p = ip(gen.uniform(0.5, 10.0), gen.uniform(100.0, 2000.0), gen.uniform(50.0, 500.0));
      const IoffePritchardField f(p);
      const auto& s = i % 2 ? K40() : Rb87();
      const double mu = magnetic_moment(s);
      const auto m = find_minimum(f, Vec3(3e-6, -5e-6, 2e-6));
      CHECK(m.position.norm() < 1e-9);
      CHECK(m.B0 == doctest::Approx(p.B0).epsilon(1e-12));
      const auto w = trap_frequencies(f, s, {}, m.position);
      const double wp = std::sqrt(mu * (p.gradient * p.gradient / p.B0 - 0.5 * p.curvature) / s.mass());
      const double wa = std::sqrt(mu * p.curvature / s.mass());
      CHECK(w.omega_lab[0] == doctest::Approx(wp).epsilon(1e-6));
      CHECK(w.omega_lab[1] == doctest::Approx(wa).epsilon(1e-6));
      CHECK(w.omega_lab[2] == doctest::Approx(wp).epsilon(1e-6));
    }
  }

  TEST_CASE("IP fit recovers the model parameters")
  {
    auto p = ip(1.214, 1500.0, 200.0);
    // rotate the frame about z and move the centre
    const double a = 0.3;
    p.axes << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    p.center = Vec3(1e-5, -2e-5, 3e-5);
    const IoffePritchardField f(p);
    const auto r = ip_fit(f, p.center);
    CHECK(r.params.B0 == doctest::Approx(p.B0).epsilon(1e-9));
    CHECK(r.params.gradient == doctest::Approx(p.gradient).epsilon(1e-4));
    CHECK(r.params.curvature == doctest::Approx(p.curvature).epsilon(1e-4));
    CHECK(std::abs(r.params.axes.col(1).dot(p.axes.col(1))) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(r.poor_fit);
    CHECK(r.transverse_trapping);
  }

  TEST_CASE("transverse frequency inversion")
  {
    oracle::Gen gen(61);
    for (int i = 0; i < 50; ++i) {
      const double B0 = gen.uniform(0.1, 10.0) * units::gauss;
      const double w = kTwoPi * gen.uniform(50.0, 5000.0);
      const double g = ip_gradient_from_frequency(Rb87(), B0, w);
      CHECK(ip_transverse_frequency(Rb87(), B0, g) == doctest::Approx(w).epsilon(1e-12));
    }
    CHECK(error_code_of([] { ip_gradient_from_frequency(Rb87(), 0.0, 1.0); }) == ErrorCode::Domain);
  }

  TEST_CASE("untrappable states and field zeros")
  {
    const IoffePritchardField f(ip(1.0, 1000.0, 100.0));
    const auto anti = builtin_species().state("K40", HalfInt::from_twice(-9));
    CHECK(error_code_of([&] { trap_frequencies(f, anti, {}, Vec3::Zero()); }) == ErrorCode::NotATrap);
    // quadrupole: two opposing loops, zero field in the middle
    auto segs = loop(1e-3, 1e-3, 1.0);
    for (auto s : loop(1e-3, 1e-3, -1.0)) {
      s.a[2] = s.b[2] = 2e-3;
      segs.push_back(s);
    }
    const WireFieldModel quad(segs, Vec3::Zero());
    const auto m = find_minimum(quad, Vec3(1e-5, 2e-5, 1.1e-3));
    CHECK(m.zero_field);
    CHECK(error_code_of([&] { ip_fit(quad, m.position); }) == ErrorCode::NotATrap);
  }

  TEST_CASE("shipped Z-trap geometry")
  {
    const auto cfg = load_field_config(FERMICHIP_DATA_PATH "/geometry/paper-z-trap.json");
    CHECK(cfg.calibrated);
    REQUIRE(cfg.seed.has_value());
    const auto m = find_potential_minimum(*cfg.field, K40(), cfg.options, *cfg.seed);
    CHECK(m.position[2] == doctest::Approx(190e-6).epsilon(1e-6));
    const auto w = trap_frequencies(*cfg.field, K40(), cfg.options, m.position);
    CHECK(std::sqrt(w.omega_lab[0] * w.omega_lab[2]) == doctest::Approx(kTwoPi * 823.0).epsilon(1e-3));
    CHECK(w.omega_lab[1] == doctest::Approx(kTwoPi * 46.0).epsilon(1e-3));
    const auto d = trap_depth(*cfg.field, K40(), cfg.options, m.position);
    CHECK(d.temperature_equivalent > 0.5e-3);
    CHECK(d.temperature_equivalent < 2e-3);
  }

  TEST_CASE("geometry documents are validated")
  {
    CHECK(error_code_of([] { field_config_from_json_text("{\"model\":\"wires\",\"segments\":[],\"colour\":1}"); })
          == ErrorCode::Parse);
    CHECK(error_code_of([] { field_config_from_json_text("{not json"); }) == ErrorCode::Parse);
    CHECK(error_code_of([] { field_config_from_json_text("{\"model\":\"helmholtz\"}"); }) == ErrorCode::Parse);
    CHECK(error_code_of([] { load_field_config("/nonexistent.json"); }) == ErrorCode::Io);
    const auto c = field_config_from_json_text(R"({"model":"ioffe-pritchard","name":"ip",
      "ioffe_pritchard":{"B0_G":1.0,"gradient_G_per_cm":1000.0,"curvature_G_per_cm2":100.0}})");
    CHECK(c.field->field(Vec3::Zero()).norm() == doctest::Approx(1e-4));
  }

  TEST_CASE("wire geometry survives a JSON round trip")
  {
    const WireFieldModel m(loop(1e-3, 2e-3, 1.5), Vec3(0, 1e-4, 0));
    const auto text = wire_model_to_json_text(m, "loop", "", false, Vec3(0, 0, 1e-4), std::nullopt);
    const auto c = field_config_from_json_text(text);
    const Vec3 r(1e-4, 2e-4, 3e-4);
    CHECK(rel(c.field->field(r), m.field(r)) < 1e-14);
  }
}
