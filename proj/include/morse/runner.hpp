#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "morse/problem.hpp"

namespace morse {

/// Parses and validates a problem document (JSON text).  Schema:
///   {"manifold": {"torus_dims": int, "euclidean_dims": int, "periods": [real]},
///    "Z": {"pinned": [{"index": int, "value": real}]},
///    "F": str, "h": str,
///    "tolerances": {...optional...}, "seed_grid": [int]}
/// ProblemDef invariants (F|_Z = 0, Z in Crit F) are checked immediately;
/// failures are load errors.
ProblemDef parse_problem(const std::string& json_text);
ProblemDef parse_problem_file(const std::string& path);

struct RunConfig {
    std::string problem_file;
    std::string command;     // verify | spectrum | flow | moduli | chain | homology | pairing
    std::string output_dir;
    std::vector<std::pair<std::string, std::string>> overrides;  // --set key=value
    std::uint64_t rng_seed = 0;
};

/// Executes one command: writes report.json (and command-specific CSV/SVG
/// artifacts) under output_dir.  Exit code contract: 0 verified / success,
/// 1 usage/IO/parse error, 2 hypothesis violated, 3 bound violated.
int run(const RunConfig& cfg, std::ostream& err);

}  // namespace morse
