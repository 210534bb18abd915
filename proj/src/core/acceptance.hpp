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

// Regression suite of the worked numbers: each criterion evaluates a few
// quantities and compares them with a target band.

#include <string>
#include <vector>

namespace fermichip {

  struct CheckRow {
    std::string label;      // e.g. "2a"
    std::string quantity;
    double computed = 0.0;
    double lo = 0.0;        // pass iff lo <= computed <= hi
    double hi = 0.0;
    std::string target;     // human-readable target
    std::string unit;
    bool pass = false;
  };

  struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<CheckRow> rows;
    std::string error;      // set when the evaluation itself threw
    double seconds = 0.0;
    bool pass() const;
  };

  // 1 .. 11
  std::vector<int> acceptance_criteria();
  std::string acceptance_title( int id );

  // Never throws for a valid id; numerical failures land in `error`.
  CriterionResult run_criterion( int id, unsigned jobs = 1 );
  std::vector<CriterionResult> run_acceptance( const std::vector<int>& ids, unsigned jobs = 1 );

  // {"criteria":[{"id","title","pass","error","rows":[...]}],"pass":bool}; timings are left
  // out so the text is deterministic.
  std::string acceptance_to_json_text( const std::vector<CriterionResult>& );

}
