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

#include <stdexcept>
#include <string>

namespace fermichip {

  enum class ErrorCode {
    Domain = 1,        // argument outside the mathematical domain
    Convergence = 2,   // root finder / quadrature / optimizer did not converge
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    NotATrap = 6,      // saddle, negative curvature, missing barrier
    RwaViolation = 7,
    Ambiguous = 8,     // topology or branch could not be decided
  };

  class Error : public std::runtime_error {
  public:
    Error( ErrorCode code, const std::string& msg )
      : std::runtime_error(msg), m_code(code) {}
    ErrorCode code() const noexcept { return m_code; }
  private:
    ErrorCode m_code;
  };

  [[noreturn]] inline void fail( ErrorCode code, const std::string& msg ) { throw Error(code, msg); }

  inline void require( bool cond, ErrorCode code, const std::string& msg )
  {
    if (!cond)
      fail(code, msg);
  }

}
