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

// nlohmann::json serialization with doubles pinned to 17 significant digits
// (nlohmann's own dump emits the shortest round-trip form, which is also
// deterministic but not what the artifact format promises). Non-finite
// numbers become null.

#include "format.hpp"
#include "json.hpp"

#include <string>

namespace fermichip {

  namespace detail {
    inline void dump17( const nlohmann::json& j, std::string& out, int indent, int level )
    {
      auto newline = [&]( int lv ) {
        if (indent >= 0) {
          out += '\n';
          out.append(std::size_t(indent * lv), ' ');
        }
      };
      switch (j.type()) {
      case nlohmann::json::value_t::object: {
        if (j.empty()) {
          out += "{}";
          return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
          if (!first)
            out += ',';
          first = false;
          newline(level + 1);
          out += nlohmann::json(it.key()).dump();
          out += indent >= 0 ? ": " : ":";
          dump17(it.value(), out, indent, level + 1);
        }
        newline(level);
        out += '}';
        return;
      }
      case nlohmann::json::value_t::array: {
        if (j.empty()) {
          out += "[]";
          return;
        }
        out += '[';
        bool first = true;
        for (const auto& v : j) {
          if (!first)
            out += ',';
          first = false;
          newline(level + 1);
          dump17(v, out, indent, level + 1);
        }
        newline(level);
        out += ']';
        return;
      }
      case nlohmann::json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? fmt17(v) : "null";
        return;
      }
      default:
        out += j.dump();
      }
    }
  }

  inline std::string dump17( const nlohmann::json& j, int indent = 2 )
  {
    std::string out;
    detail::dump17(j, out, indent, 0);
    return out;
  }

}
