#pragma once

#include <string>
#include <vector>

#include "qirt/qobjects.hpp"
#include "qirt/sdp.hpp"

namespace qirt {

enum class DistanceMethod { SDP, OracleLowerBound };
const char* to_string(DistanceMethod m);

struct DistanceResult {
  double value = 0.0;
  DistanceMethod method = DistanceMethod::SDP;
  // Optimal input marginal for SDP results, best sampled reference state (as a density
  // operator on the ancilla) for the oracle.
  ComplexMatrix achiever;
  std::string note;
  SdpStatus status = SdpStatus::Optimal;
  double gap = 0.0;
};

// Diamond norm of sum_a J_a ⊗ |a><a| for trace-annihilating Hermitian branch differences J_a.
// Solved as max sum_a <J_a, W_a> s.t. 0 ⪯ W_a ⪯ ρ ⊗ I, Tr ρ = 1, which is half the norm.
DistanceResult flagged_diamond_norm(std::size_t dim_in, std::size_t dim_out,
                                    const std::vector<ComplexMatrix>& deltas);

DistanceResult diamond_distance(const CpMap& a, const CpMap& b);
// Trace norm of (Id ⊗ Δ)(ψ) maximized over `samples` Haar-random pure states on ancilla ⊗ input,
// the maximally entangled state, and a see-saw refinement of the best candidates.
DistanceResult diamond_lower_bound(const CpMap& a, const CpMap& b, std::size_t samples,
                                   std::uint64_t seed = kDefaultSeed);
DistanceResult measurement_distance(const Povm& m, const Povm& n);
DistanceResult instrument_distance(const Instrument& a, const Instrument& b);
DistanceResult set_distance(const InstrumentSet& a, const InstrumentSet& b);
DistanceResult set_distance(const ChannelSet& a, const ChannelSet& b);
DistanceResult set_distance(const PovmSet& a, const PovmSet& b);

}  // namespace qirt
