#pragma once

#include <string>
#include <vector>

#include "qirt/classify.hpp"

namespace qirt {

enum class FreeClass { TP, EB_PPT, WEB_PPT, TC, PC, IB_Witness, WIB_Witness };
const char* to_string(FreeClass c);
// Accepts the class names above and the short CLI forms tp, eb, web, tc, pc, ib, wib.
FreeClass parse_free_class(const std::string& s);

// LowerBound: computed against a relaxed superset of the free set. UpperBound: an infimum
// truncated to finitely many candidates.
enum class BoundDirection { Exact, LowerBound, UpperBound };
const char* to_string(BoundDirection b);

struct FreeSetSpec {
  FreeClass tag = FreeClass::TP;
  WitnessFamily family;  // used by IB_Witness and WIB_Witness
  std::string note;
};

FreeSetSpec free_set(FreeClass tag);
FreeSetSpec free_set(FreeClass tag, WitnessFamily family);

struct MeasureResult {
  double value = 0.0;
  // Normalized free instruments attaining the optimum, as branch Choi matrices per index.
  std::vector<std::vector<ComplexMatrix>> optimizer;
  BoundDirection bound = BoundDirection::Exact;
  SdpStatus status = SdpStatus::Optimal;
  double gap = 0.0;
  int iterations = 0;
  std::string diagnostics;
};

// Adds free-cone branch expressions (conic hull of the free set) for instruments with the given
// outcome counts and dimensions. Every instrument in a TC set shares dim_out; PC allows distinct
// outputs.
BranchExprs add_free_cone(Model& m, const FreeSetSpec& free, std::size_t dim_in, const Dims& dims_out,
                          const std::vector<std::size_t>& outcomes);
BoundDirection bound_for(const FreeSetSpec& free, std::size_t dim_in, const Dims& dims_out);

MeasureResult robustness(const InstrumentSet& set, const FreeSetSpec& free);
// Free fractions below this are solver noise and give an infinite weight.
inline constexpr double kZeroWeightFraction = 1e-9;
MeasureResult weight(const InstrumentSet& set, const FreeSetSpec& free);
MeasureResult distance_measure(const InstrumentSet& set, const FreeSetSpec& free);
MeasureResult extended_measure(const InstrumentSet& set, const FreeSetSpec& free, std::size_t max_dim_b = 2);

struct HierarchyReport {
  double ip = 0.0;
  double ep = 0.0;
  double sep = 0.0;
  double mip = 0.0;
  double smip = 0.0;
  bool relaxed = false;  // outside the exact PPT regime
  double worst_slack = 0.0;  // most negative slack across both chains
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kChainSlack = 1e-6;
HierarchyReport hierarchy_report(const Instrument& inst, const WitnessFamily& family);

}  // namespace qirt
