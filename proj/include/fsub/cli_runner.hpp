#pragma once

// Command-line front end: parse/validate/execute separation so the commands
// are directly testable.  Exit codes: 0 success, 1 identity failure,
// 2 invalid fixture, 3 I/O error.

#include <iosfwd>

#include "fsub/specfile.hpp"

namespace finsub {

struct RunConfig {
  std::string command;
  std::string fixture;
  std::string spec_path;
  int samples = 100;
  uint64_t seed = 0;
  std::string profile = "ad";
  std::vector<std::string> identities;
  std::string out_path;
  std::string csv_path;
  int jobs = 1;
  std::string corruption = "none";
  std::string space = "total";  // geodesic command: total or base chart
  std::vector<double> x0, v0;
  double t1 = 1.0;
  std::string loop = "coordinate";  // transport: coordinate | circle
  int loop_coord = 2;
  double loop_radius = 0.25;
};

// Loads the fixture named in the config (built-in or spec file) and applies
// the evaluation profile.
Fixture resolve_fixture(const RunConfig& cfg);

int cmd_list(std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_geodesic(const RunConfig& cfg, std::ostream& out);
int cmd_lift(const RunConfig& cfg, std::ostream& out);
int cmd_transport(const RunConfig& cfg, std::ostream& out);

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace finsub
