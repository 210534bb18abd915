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

#include "constants.hpp"
#include "error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fermichip {

  std::string HalfInt::str() const
  {
    if (m_twice % 2 == 0)
      return std::to_string(m_twice / 2);
    return std::to_string(m_twice) + "/2";
  }

  Rational Rational::normalized() const
  {
    require(den != 0, ErrorCode::Domain, "rational with zero denominator");
    long g = std::gcd(num, den);
    if (g == 0)
      g = 1;
    Rational r{ num / g, den / g };
    if (r.den < 0) {
      r.num = -r.num;
      r.den = -r.den;
    }
    return r;
  }

  Rational operator+( Rational a, Rational b ) { return Rational{ a.num * b.den + b.num * a.den, a.den * b.den }.normalized(); }
  Rational operator-( Rational a, Rational b ) { return Rational{ a.num * b.den - b.num * a.den, a.den * b.den }.normalized(); }
  Rational operator*( Rational a, Rational b ) { return Rational{ a.num * b.num, a.den * b.den }.normalized(); }
  Rational operator/( Rational a, Rational b ) { return Rational{ a.num * b.den, a.den * b.num }.normalized(); }
  bool operator==( Rational a, Rational b )
  {
    auto x = a.normalized();
    auto y = b.normalized();
    return x.num == y.num && x.den == y.den;
  }

  std::string Rational::str() const
  {
    auto r = normalized();
    if (r.den == 1)
      return std::to_string(r.num);
    return std::to_string(r.num) + "/" + std::to_string(r.den);
  }

  Rational to_rational( HalfInt h ) { return Rational{ h.twice(), 2 }.normalized(); }

  std::string SpinState::label() const
  {
    return species.name + "|" + F.str() + "," + m_F.str() + ">";
  }

  void validate( const SpinState& s )
  {
    require(s.species.mass > 0.0, ErrorCode::InvalidArgument, "species mass must be positive");
    require(s.F.twice() >= 0, ErrorCode::InvalidArgument, "F must be non-negative");
    require(std::abs(s.m_F.twice()) <= s.F.twice(), ErrorCode::InvalidArgument,
            "|m_F| exceeds F for " + s.label());
    require((s.F.twice() - s.m_F.twice()) % 2 == 0, ErrorCode::InvalidArgument,
            "F and m_F must both be integer or both half-integer");
  }

  double magnetic_moment( const SpinState& s )
  {
    return s.moment_factor().value() * constants.mu_B;
  }

  void SpeciesRegistry::add( SpeciesEntry e )
  {
    require(e.species.mass > 0.0, ErrorCode::InvalidArgument, "species mass must be positive");
    require(!e.species.name.empty(), ErrorCode::InvalidArgument, "species needs a name");
    auto it = std::find_if(m_entries.begin(), m_entries.end(),
                           [&]( const SpeciesEntry& x ) { return x.species.name == e.species.name; });
    if (it != m_entries.end())
      *it = std::move(e);
    else
      m_entries.push_back(std::move(e));
  }

  bool SpeciesRegistry::contains( const std::string& name ) const
  {
    return std::any_of(m_entries.begin(), m_entries.end(),
                       [&]( const SpeciesEntry& x ) { return x.species.name == name; });
  }

  const SpeciesEntry& SpeciesRegistry::entry( const std::string& name ) const
  {
    for (const auto& e : m_entries)
      if (e.species.name == name)
        return e;
    fail(ErrorCode::InvalidArgument, "unknown species '" + name + "'");
  }

  std::vector<std::string> SpeciesRegistry::names() const
  {
    std::vector<std::string> out;
    for (const auto& e : m_entries)
      out.push_back(e.species.name);
    return out;
  }

  SpinState SpeciesRegistry::state( const std::string& name, HalfInt m_F ) const
  {
    const auto& e = entry(name);
    SpinState s{ e.species, e.F, m_F, e.g_F };
    validate(s);
    return s;
  }

  SpinState SpeciesRegistry::stretched( const std::string& name ) const
  {
    return state(name, entry(name).F);
  }

  namespace {

    HalfInt parse_halfint( const nlohmann::json& j )
    {
      if (j.is_number_integer())
        return HalfInt::from_twice(2 * j.get<int>());
      if (j.is_number()) {
        double v = j.get<double>();
        double tw = std::round(2.0 * v);
        require(std::abs(2.0 * v - tw) < 1e-12, ErrorCode::Parse, "spin value must be a half-integer");
        return HalfInt::from_twice(int(tw));
      }
      if (j.is_string()) {
        auto s = j.get<std::string>();
        auto slash = s.find('/');
        if (slash == std::string::npos)
          return HalfInt::from_twice(2 * std::stoi(s));
        require(s.substr(slash + 1) == "2", ErrorCode::Parse, "spin value must be n/2");
        return HalfInt::from_twice(std::stoi(s.substr(0, slash)));
      }
      fail(ErrorCode::Parse, "spin value must be a number or \"n/2\" string");
    }

    Rational parse_rational( const nlohmann::json& j )
    {
      if (j.is_number_integer())
        return Rational{ j.get<long>(), 1 };
      require(j.is_string(), ErrorCode::Parse, "g_F must be an integer or \"p/q\" string");
      auto s = j.get<std::string>();
      auto slash = s.find('/');
      if (slash == std::string::npos)
        return Rational{ std::stol(s), 1 };
      return Rational{ std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1)) }.normalized();
    }

  }

  SpeciesRegistry SpeciesRegistry::from_json_text( const std::string& text )
  {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch ( const nlohmann::json::exception& e ) {
      fail(ErrorCode::Parse, std::string("species file: ") + e.what());
    }
    require(doc.is_object() && doc.contains("species") && doc["species"].is_array(),
            ErrorCode::Parse, "species file must contain a \"species\" array");
    SpeciesRegistry reg;
    for (const auto& js : doc["species"]) {
      for (auto it = js.begin(); it != js.end(); ++it) {
        static const char* known[] = { "name", "mass_u", "F", "g_F", "a_s_nm" };
        require(std::find(std::begin(known), std::end(known), it.key()) != std::end(known),
                ErrorCode::Parse, "unknown key '" + it.key() + "' in species entry");
      }
      require(js.contains("name") && js.contains("mass_u") && js.contains("F") && js.contains("g_F"),
              ErrorCode::Parse, "species entry needs name, mass_u, F, g_F");
      SpeciesEntry e;
      e.species.name = js["name"].get<std::string>();
      e.species.mass = js["mass_u"].get<double>() * constants.atomic_mass_unit;
      if (js.contains("a_s_nm") && !js["a_s_nm"].is_null())
        e.species.s_wave_scattering_length = js["a_s_nm"].get<double>() * units::nanometre;
      e.F = parse_halfint(js["F"]);
      e.g_F = parse_rational(js["g_F"]);
      reg.add(std::move(e));
    }
    return reg;
  }

  SpeciesRegistry SpeciesRegistry::load( const std::string& path )
  {
    std::ifstream in(path);
    require(bool(in), ErrorCode::Io, "cannot open species file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
  }

  std::string SpeciesRegistry::to_json_text() const
  {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : m_entries) {
      nlohmann::json j;
      j["name"] = e.species.name;
      j["mass_u"] = e.species.mass / constants.atomic_mass_unit;
      j["F"] = e.F.str();
      j["g_F"] = e.g_F.str();
      if (e.species.s_wave_scattering_length)
        j["a_s_nm"] = *e.species.s_wave_scattering_length / units::nanometre;
      arr.push_back(j);
    }
    return nlohmann::json{ { "species", arr } }.dump(2);
  }

  const SpeciesRegistry& builtin_species()
  {
    static const SpeciesRegistry reg = [] {
      SpeciesRegistry r;
      r.add({ { "K40", 39.9640 * constants.atomic_mass_unit, std::nullopt },
              HalfInt::from_twice(9), Rational{ 2, 9 } });
      r.add({ { "Rb87", 86.9092 * constants.atomic_mass_unit, 5.3 * units::nanometre },
              HalfInt::from_twice(4), Rational{ 1, 2 } });
      return r;
    }();
    return reg;
  }

}
