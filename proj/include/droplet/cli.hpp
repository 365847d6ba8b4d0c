#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "droplet/geometry.hpp"

namespace droplet {

// Inclusive linear grid for one sweep axis; count = 0 gives an empty sweep.
struct GridAxis {
  double lo = 0;
  double hi = 0;
  int count = 1;
  bool set = false;
};

struct RunConfig {
  std::string command;
  ModelParams params;
  int N = 8;
  int k0 = 3;
  int nodes = 256;
  std::string suite;
  std::string format = "json";  // json | csv
  std::string out_path;         // empty: stdout
  GridAxis grid_a, grid_c, grid_tau;
  std::vector<int> grid_n;
  int max_threads = 1;
};

// Parses argv-style arguments and dispatches one command. Writes the report
// to --out or to `out`; diagnostics go to `err`. Exit status: 0 success,
// 1 verification checks failed, 2 domain/phase errors, 3 solver/tolerance
// failures, 64 usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace droplet
