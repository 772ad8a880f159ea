#pragma once

#include <string>
#include <vector>

#include "qirt/model.hpp"
#include "qirt/qobjects.hpp"

namespace qirt {

enum class VerdictStatus { Member, NonMember, Inconclusive };
enum class Relaxation { Exact, PptRelaxation, WitnessFamily };
const char* to_string(VerdictStatus s);
const char* to_string(Relaxation r);

// Verdict thresholds: NonMember needs a certified value of at least kNonMemberMargin; a
// Member verdict needs an explicit verified point, and reports its interior depth.
inline constexpr double kNonMemberMargin = 1e-6;
inline constexpr double kEqualityTol = 1e-8;
inline constexpr double kPptTol = 1e-9;

struct Verdict {
  VerdictStatus status = VerdictStatus::Inconclusive;
  double margin = 0.0;
  Relaxation relaxation = Relaxation::Exact;
  std::string certificate;
  std::vector<ComplexMatrix> certificate_data;

  bool member() const { return status == VerdictStatus::Member; }
  bool non_member() const { return status == VerdictStatus::NonMember; }
};

// Finite surrogate for "every measurement set": each entry is an incompatible set of POVMs
// on the output space.
struct WitnessFamily {
  std::vector<PovmSet> sets;
  std::string note;
};

// Verifies that every set is incompatible and throws otherwise.
WitnessFamily make_witness_family(std::vector<PovmSet> sets, std::string note);
WitnessFamily mub_pair_family();
// MUB pair, MUB triple, the pair {|0><0|, |1><1|}, {|+><+|, |-><-|}, and five seeded random
// incompatible qubit pairs.
WitnessFamily default_witness_family(std::uint64_t seed = kDefaultSeed);

Verdict is_trash_and_prepare(const Instrument& inst);
Verdict is_entanglement_breaking(const Instrument& inst);
Verdict is_weak_entanglement_breaking(const Instrument& inst);
Verdict joint_measurement(const PovmSet& povms);
Verdict breaks_incompatibility(const Instrument& inst, const WitnessFamily& family);
Verdict is_weak_incompatibility_breaking(const Instrument& inst, const WitnessFamily& family);
Verdict is_traditionally_compatible(const InstrumentSet& insts);
Verdict is_weakly_compatible(const InstrumentSet& insts);
Verdict is_parallel_compatible(const InstrumentSet& insts);

struct DepolarizingThresholds {
  double eb = 0.0;     // 1/(1+d)
  double ibc_n = 0.0;  // (n+d)/(n(1+d))
  double ibc = 0.0;    // (3d-1)(d-1)^(d-1)/(d^d (d+1))
};
DepolarizingThresholds depolarizing_thresholds(std::size_t d, std::size_t n);

// Cone builders shared with the measures. Each returns, for every instrument i and outcome a,
// an expression for branch Choi J^i_a generated by a joint PSD object.
using BranchExprs = std::vector<std::vector<HermExpr>>;
// Joint instrument with outcome tuples; marginals by summing the other outcomes.
BranchExprs add_tc_joint(Model& m, std::size_t dim_in, std::size_t dim_out, const std::vector<std::size_t>& outcomes);
// Joint instrument into K_1 ⊗ ... ⊗ K_n; marginals by partial traces.
BranchExprs add_pc_joint(Model& m, std::size_t dim_in, const Dims& dims_out, const std::vector<std::size_t>& outcomes);
// Constrains POVM-valued expressions (one list per measurement) to admit a joint measurement.
void add_joint_measurement(Model& m, const std::vector<std::vector<HermExpr>>& povms);
// Heisenberg image Φ_J†(B) of a Choi expression as an expression on the input space.
HermExpr dual_image(const HermExpr& choi, std::size_t dim_in, std::size_t dim_out, const ComplexMatrix& b);

}  // namespace qirt
