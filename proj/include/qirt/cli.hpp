#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qirt/classify.hpp"
#include "qirt/io.hpp"
#include "qirt/sdp.hpp"
#include "qirt/transforms.hpp"

namespace qirt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 64;

// Bad arguments, unreadable inputs or an invalid config; maps to kExitUsage.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Settings read from a plain key = value file. Lines starting with '#' and [section] headers
// are ignored. Keys: gap_tol, residual_tol, target_gap, target_residual, max_iter,
// certificate_tol, witness_family, oracle_samples, threads.
struct Config {
  SdpSettings sdp = default_sdp_settings();
  std::string witness_family;
  std::size_t oracle_samples = 0;
  unsigned threads = 0;
};
Config parse_config(const std::string& text, Config base = {});

// witness.v1: {"format", "note", "sets": [[povm.v1, ...], ...]}.
io::json witness_family_to_json(const WitnessFamily& f);
WitnessFamily witness_family_from_json(const io::json& j);

// supermap.v1: {"format", "q", "first": wiring, "second": wiring}, with a wiring
// {"ancilla", "pre": [instrument.v1], "post": [[instrument.v1 per flattened input outcome]]}.
// A missing or null term is empty.
io::json supermap_to_json(const SupermapSpec& s);
SupermapSpec supermap_from_json(const io::json& j);
// pid.v1: {"format", "ancilla", "f": one-branch instrument.v1, "k": instrument.v1,
// "out_outcomes", "q_table", "p_table"}.
io::json pid_to_json(const PidSpec& s);
PidSpec pid_from_json(const io::json& j);

io::json verdict_to_json(const Verdict& v);
io::json measure_to_json(const MeasureResult& m);
io::json harness_to_json(const HarnessReport& h);

struct Outcome {
  int exit_code = kExitOk;
  io::json report;     // report.v1, null on usage errors
  std::string message; // usage or help text
  std::string output_path;
};

// Parses and executes one invocation. args excludes the program name.
Outcome execute(const std::vector<std::string>& args);
// Prints the report (or writes it to --output) and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qirt::cli
