#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qirt/io.hpp"

namespace qirt {

// Provenance of an expected value: stated in the source text, immediate from definitions, or
// computed by an independent numerical oracle.
enum class Provenance { Published, Elementary, Computed };
const char* to_string(Provenance p);

struct ReproCheck {
  std::string name;
  io::json expected;
  io::json observed;
  double tolerance = 0.0;
  bool pass = false;
  Provenance provenance = Provenance::Computed;
};

struct ReproResult {
  std::string id;
  std::string description;
  std::vector<ReproCheck> checks;
  double seconds = 0.0;

  bool pass() const;
};

struct ReproCase {
  std::string id;
  std::string description;
  std::function<ReproResult(std::uint64_t seed)> run;
};

// The worked examples, threshold formulas, hierarchy chains and short harness runs.
const std::vector<ReproCase>& repro_cases();
// Runs every case, or only `only` when non-empty; throws Error for an unknown id.
std::vector<ReproResult> repro_all(std::uint64_t seed, const std::string& only = "");

io::json to_json(const ReproCheck& c);
io::json to_json(const ReproResult& r, bool timings);

// Example instruments shared by the repro cases, tests and bindings.
Instrument example1_instrument();
// The measurements A = {|0><0|, |1><1|} and B = {|+><+|, |-><-|}.
PovmSet example2_pair();
// ν_{zxy}, indexed [x*2 + y][z] for the outcome order of heisenberg_measurement.
std::vector<std::vector<double>> example2_nu_table();

}  // namespace qirt
