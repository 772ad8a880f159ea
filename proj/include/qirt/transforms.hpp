#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qirt/classify.hpp"
#include "qirt/measures.hpp"

namespace qirt {

// One controlled wiring for an input set {I^i = {Φ^i_a}} (dim_in -> dim_out):
//   out^j_c = Σ_{i,a} post[j][k(i,a)]_c ∘ (Φ^i_a ⊗ Id_Q) ∘ pre[j]_i,
// where pre[j] is an instrument H' -> H_in ⊗ Q with one branch per set member and post[j][k] is an
// instrument K_out ⊗ Q -> K' indexed by the flattened input outcome k(i,a) = Σ_{i'<i} n_{i'} + a.
struct Wiring {
  std::size_t ancilla = 1;
  std::vector<Instrument> pre;
  std::vector<std::vector<Instrument>> post;

  std::size_t outputs() const { return pre.size(); }
};

// Mixture q·first + (1-q)·second. An empty term is dropped; single-term theories use `first`.
struct SupermapSpec {
  double q = 1.0;
  Wiring first;
  Wiring second;

  bool has_first() const { return !first.pre.empty(); }
  bool has_second() const { return !second.pre.empty(); }
};

// Free programmable-instrument supermap:
//   out^j_b = Σ_{λ,i,a} p(b|i,j,λ,a) q(i|j,λ) K_λ ∘ (Φ^i_a ⊗ Id_Q) ∘ F.
struct PidSpec {
  std::size_t ancilla = 1;
  CpMap f;        // H_in -> H_in ⊗ Q
  Instrument k;   // K_out ⊗ Q -> K', branches λ
  std::vector<std::size_t> out_outcomes;  // outcome count of each output instrument j
  // q_table[j][λ][i] and p_table[j][λ][i][a][b].
  std::vector<std::vector<std::vector<double>>> q_table;
  std::vector<std::vector<std::vector<std::vector<std::vector<double>>>>> p_table;
};

enum class Theory { IP, EP, SEP, MIP, SMIP, TI, PI };
const char* to_string(Theory t);
Theory parse_theory(const std::string& s);
// Free set whose distance measure is monotone for the theory.
FreeSetSpec theory_free_set(Theory t, const WitnessFamily& family);

// Flattened outcome offsets of a set, with the total as the last entry.
std::vector<std::size_t> outcome_offsets(const InstrumentSet& set);

InstrumentSet apply_wiring(const Wiring& w, const InstrumentSet& set);
// Generic controlled implementation, without slot constraints.
InstrumentSet controlled_supermap(const SupermapSpec& spec, const InstrumentSet& set);
// The same map realized on flag channels: Θ_post ∘ (Σ_C ⊗ Id) ∘ Θ_pre with explicit classical
// registers, where Σ_C = Σ_i |i><i| ⊗ Γ_{I^i}. Slower; used to cross-check controlled_supermap.
InstrumentSet controlled_supermap_via_flags(const SupermapSpec& spec, const InstrumentSet& set);
// Wiring that reproduces the input set (Q = 1).
SupermapSpec identity_spec(const InstrumentSet& set);

struct SlotCheck {
  std::string slot;
  Verdict verdict;
};

// Slot rules per theory. IP: first.pre trash-and-prepare, second.post trash-and-prepare and
// shared by every k. EP: first.pre EB, second.post EB. SEP: every post sum channel EB. MIP:
// first.pre EB, second.post IB on the family. SMIP: every post sum channel IB on the family.
// PI: the pre instruments {first.pre[j]}_j parallel compatible, checked when the joint Choi
// dimension is at most 32. A NonMember slot throws Error.
std::vector<SlotCheck> check_slots(Theory t, const SupermapSpec& spec, const WitnessFamily& family);

InstrumentSet tp_free_transform(const SupermapSpec& spec, const InstrumentSet& set);
InstrumentSet eb_free_transform(const SupermapSpec& spec, const InstrumentSet& set);
InstrumentSet web_free_transform(const SupermapSpec& spec, const InstrumentSet& set);
InstrumentSet ib_free_transform(const SupermapSpec& spec, const InstrumentSet& set, const WitnessFamily& family);
InstrumentSet wib_free_transform(const SupermapSpec& spec, const InstrumentSet& set, const WitnessFamily& family);
InstrumentSet pc_free_transform(const SupermapSpec& spec, const InstrumentSet& set);
// Dispatches to the transform of the theory; TI expects a PidSpec and is rejected here.
InstrumentSet free_transform(Theory t, const SupermapSpec& spec, const InstrumentSet& set, const WitnessFamily& family);

void validate_pid_spec(const PidSpec& spec, const InstrumentSet& pid);
// Rejects inputs whose induced channels differ.
InstrumentSet pid_supermap(const PidSpec& spec, const InstrumentSet& pid);

// Per-index post-processing: set[i] followed by processors[i][a] on outcome a.
InstrumentSet instrument_post_process(const InstrumentSet& set, const std::vector<std::vector<Instrument>>& processors);

// Random free objects.
Instrument random_trash_prepare_instrument(std::size_t dim_in, std::size_t dim_out, std::size_t outcomes, Rng& rng);
// Branch a: ρ ↦ Σ_x Tr[E_{a,x} ρ] σ_{a,x}.
Instrument random_measure_prepare_instrument(std::size_t dim_in, std::size_t dim_out, std::size_t outcomes, Rng& rng,
                                             std::size_t inner = 2);
// Every branch followed by depolarizing(dim_out, t).
Instrument depolarize_output(const Instrument& inst, double t);
struct JointSet {
  Instrument joint;
  InstrumentSet marginals;
};
JointSet random_tc_set(std::size_t dim_in, std::size_t dim_out, const std::vector<std::size_t>& outcomes, Rng& rng,
                       std::size_t kraus_rank = 2);
JointSet random_pc_set(std::size_t dim_in, const Dims& dims_out, const std::vector<std::size_t>& outcomes, Rng& rng,
                       std::size_t kraus_rank = 2);
// Shared Stinespring isometry, different environment measurements (coarse-grained random bases).
InstrumentSet random_weakly_compatible_set(std::size_t dim_in, std::size_t dim_out,
                                           const std::vector<std::size_t>& outcomes, Rng& rng, std::size_t env = 2);
InstrumentSet random_free_set(Theory t, std::size_t members, std::size_t dim, std::size_t outcomes, Rng& rng);

// Random valid specs mapping sets of `in_members` instruments (dim -> dim, in_outcomes) to
// `out_members` instruments (dim -> dim, out_outcomes).
struct SpecShape {
  std::size_t dim = 2;
  std::size_t ancilla = 2;
  std::size_t in_members = 2;
  std::size_t in_outcomes = 2;
  std::size_t out_members = 2;
  std::size_t out_outcomes = 2;
};
SupermapSpec random_spec(Theory t, const SpecShape& shape, double q, Rng& rng);
PidSpec random_pid_spec(const SpecShape& shape, Rng& rng, std::size_t branches = 2);
// Deterministic tables, unitary F with a pure ancilla, K a sharp ancilla readout followed by a unitary.
PidSpec sharp_pid_spec(const SpecShape& shape, Rng& rng);

// Canonical constructions mapping every set shaped like `source` onto a free target.
// Prepare style (IP, EP, PI): pre[j] = ρ ↦ |0><0| ⊗ Γ_{target j}(ρ), post reads the flag.
// Pass-through style (SEP, MIP, SMIP): pre[j] = ρ ↦ |0><0| ⊗ ρ, post = target ∘ Tr_in.
SupermapSpec canonical_spec(Theory t, const InstrumentSet& source, const InstrumentSet& target);
// q(i|j,λ) = δ_{i0}, F = |0><0| ⊗ ρ, K_λ = joint_λ ∘ Tr_in, p(b|..,λ,..) = δ(b, λ_j).
PidSpec canonical_pid_spec(const InstrumentSet& source, const JointSet& target);

struct TrialRecord {
  std::uint64_t seed = 0;
  double q = 1.0;
  double distance_before = 0.0;
  double distance_after = 0.0;
  double measure_before = 0.0;
  double measure_after = 0.0;
};

struct HarnessReport {
  Theory theory = Theory::IP;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double max_distance_violation = 0.0;  // max over trials of D̂ after - D̂ before
  double max_measure_violation = 0.0;   // max over trials of measure after - measure before
  std::size_t violations = 0;
  std::vector<TrialRecord> records;
  std::string free_set_note;

  bool ok() const { return violations == 0; }
};

inline constexpr double kMonotonicityTol = 1e-7;
HarnessReport monotonicity_harness(Theory t, std::size_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace qirt
