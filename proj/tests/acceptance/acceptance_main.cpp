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

// Regression suite runner: one PASS/FAIL line per criterion, through the C API.
//
//   fermichip_acceptance [--criterion N ...] [--jobs N] [--verbose] [--json FILE]
//
// Exit status 0 when every selected criterion passes, 1 otherwise, 2 on a
// usage or library error.

#include "fermichip/fermichip.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

int main( int argc, char** argv )
{
  CLI::App app{ "fermichip acceptance suite" };
  std::vector<int> ids;
  unsigned jobs = 1;
  bool verbose = false;
  std::string json_path;
  app.add_option("--criterion", ids, "Criterion ids (default: all)");
  app.add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  app.add_flag("--verbose", verbose, "Print every checked quantity");
  app.add_option("--json", json_path, "Write the report as JSON");
  CLI11_PARSE(app, argc, argv);

  char* text = nullptr;
  int all_pass = 0;
  const fc_status s = fc_acceptance_run_json(ids.empty() ? nullptr : ids.data(), ids.size(), jobs, &text, &all_pass);
  if (s != FC_OK) {
    std::fprintf(stderr, "acceptance: %s: %s\n", fc_status_name(s), fc_last_error());
    return 2;
  }
  const std::string report(text);
  fc_string_free(text);
  if (!json_path.empty())
    std::ofstream(json_path) << report << '\n';

  const auto j = nlohmann::json::parse(report);
  for (const auto& c : j["criteria"]) {
    std::string detail;
    for (const auto& r : c["rows"])
      if (!r["pass"].get<bool>())
        detail += " " + r["label"].get<std::string>();
    if (!c["error"].get<std::string>().empty())
      detail += " error: " + c["error"].get<std::string>();
    std::printf("%s %2d %s%s%s\n", c["pass"].get<bool>() ? "PASS" : "FAIL", c["id"].get<int>(),
                c["title"].get<std::string>().c_str(), detail.empty() ? "" : "  failing:", detail.c_str());
    if (verbose)
      for (const auto& r : c["rows"]) {
        const double v = r["computed"].is_number() ? r["computed"].get<double>() : std::nan("");
        std::printf("       %-4s %-4s %-50s %.10g (target %s %s)\n", r["label"].get<std::string>().c_str(),
                    r["pass"].get<bool>() ? "ok" : "FAIL", r["quantity"].get<std::string>().c_str(), v,
                    r["target"].get<std::string>().c_str(), r["unit"].get<std::string>().c_str());
      }
  }
  return all_pass ? 0 : 1;
}
