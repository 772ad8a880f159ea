#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qirt/linalg.hpp"
#include "qirt/random.hpp"

namespace qirt {

inline constexpr double kValidityTol = 1e-9;

// Tag for constructors that skip eager validation. Used only where the result is valid by
// construction (compositions, tensor products, sums of valid branches).
struct Unchecked {};
inline constexpr Unchecked unchecked{};

std::vector<std::string> default_labels(std::size_t n);
std::string product_label(const std::string& a, const std::string& b);

class Povm {
 public:
  Povm() = default;
  explicit Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels = {});
  Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels, Unchecked);

  std::size_t dim() const { return dim_; }
  std::size_t outcomes() const { return elements_.size(); }
  const std::vector<ComplexMatrix>& elements() const { return elements_; }
  const ComplexMatrix& element(std::size_t x) const { return elements_.at(x); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::size_t dim_ = 0;
  std::vector<ComplexMatrix> elements_;
  std::vector<std::string> labels_;
};

// Completely positive map stored by its unnormalized Choi matrix
// J = sum_ij |i><j| ⊗ Φ(|i><j|), input factor first.
class CpMap {
 public:
  CpMap() = default;
  CpMap(std::size_t dim_in, std::size_t dim_out, ComplexMatrix choi);
  CpMap(std::size_t dim_in, std::size_t dim_out, ComplexMatrix choi, Unchecked);
  static CpMap from_kraus(const std::vector<ComplexMatrix>& kraus);

  std::size_t dim_in() const { return dim_in_; }
  std::size_t dim_out() const { return dim_out_; }
  const ComplexMatrix& choi() const { return choi_; }
  bool has_kraus() const { return kraus_.has_value(); }
  // Stored Kraus list, or one derived from the Choi eigendecomposition (rank cut 1e-10).
  std::vector<ComplexMatrix> kraus() const;
  bool is_trace_preserving(double tol = kValidityTol) const;

 private:
  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
  ComplexMatrix choi_;
  std::optional<std::vector<ComplexMatrix>> kraus_;
};

class Instrument {
 public:
  Instrument() = default;
  explicit Instrument(std::vector<CpMap> branches, std::vector<std::string> labels = {});
  Instrument(std::vector<CpMap> branches, std::vector<std::string> labels, Unchecked);
  static Instrument from_chois(std::size_t dim_in, std::size_t dim_out,
                               const std::vector<ComplexMatrix>& chois,
                               std::vector<std::string> labels = {});

  std::size_t dim_in() const { return dim_in_; }
  std::size_t dim_out() const { return dim_out_; }
  std::size_t outcomes() const { return branches_.size(); }
  const std::vector<CpMap>& branches() const { return branches_; }
  const CpMap& branch(std::size_t a) const { return branches_.at(a); }
  const std::vector<std::string>& labels() const { return labels_; }
  // The induced channel, sum of all branches.
  CpMap channel() const;

 private:
  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
  std::vector<CpMap> branches_;
  std::vector<std::string> labels_;
};

using InstrumentSet = std::vector<Instrument>;
using ChannelSet = std::vector<CpMap>;
using PovmSet = std::vector<Povm>;

// Validation helpers; throw Error with a reason.
void validate_choi(std::size_t dim_in, std::size_t dim_out, const ComplexMatrix& choi,
                   bool require_tp, double tol = kValidityTol);
void validate_set_alignment(const InstrumentSet& a, const InstrumentSet& b);

// Choi matrix of an arbitrary linear map given as a function on dim_in x dim_in matrices.
ComplexMatrix choi_of_linear_map(const std::function<ComplexMatrix(const ComplexMatrix&)>& f,
                                 std::size_t dim_in, std::size_t dim_out);
ComplexMatrix choi_from_kraus(const std::vector<ComplexMatrix>& kraus);
std::vector<ComplexMatrix> kraus_from_choi(const ComplexMatrix& choi, std::size_t dim_in,
                                           std::size_t dim_out, double cut = 1e-10);
// Φ(X) and Φ†(B) for a Choi matrix, valid for any (not necessarily Hermitian) argument.
ComplexMatrix apply_choi(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                         const ComplexMatrix& x);
ComplexMatrix dual_apply_choi(const ComplexMatrix& choi, std::size_t dim_in,
                              std::size_t dim_out, const ComplexMatrix& b);

CpMap depolarizing(std::size_t d, double t);
CpMap identity_channel(std::size_t d);
CpMap unitary_channel(const ComplexMatrix& u);
// ρ ↦ Tr[ρ] σ.
CpMap trash_and_prepare(std::size_t dim_in, const ComplexMatrix& sigma);
// Traces out the factors of `dims` not listed in `keep`.
CpMap partial_trace_channel(const Dims& dims, const std::vector<std::size_t>& keep);
// ρ ↦ σ ⊗ ρ (front) or ρ ⊗ σ (back).
CpMap append_state(std::size_t d, const ComplexMatrix& sigma, bool front);
CpMap permutation_channel(const Dims& dims, const std::vector<std::size_t>& perm);

ComplexMatrix apply(const CpMap& m, const ComplexMatrix& rho);
ComplexMatrix dual_apply(const CpMap& m, const ComplexMatrix& b);
CpMap compose(const CpMap& second, const CpMap& first);
// Φ ⊗ Ψ acting on H_Φ ⊗ H_Ψ.
CpMap tensor_maps(const CpMap& a, const CpMap& b);
CpMap scale(const CpMap& m, double s);
CpMap sum(const std::vector<CpMap>& maps);
CpMap mix(double p, const CpMap& a, const CpMap& b);

Povm trivial_povm(std::size_t d);
Povm pvm_from_basis(const ComplexMatrix& unitary);
Povm computational_pvm(std::size_t d);
Povm induced_povm(const Instrument& inst);
CpMap flag_channel(const Instrument& inst);
// Inverse of flag_channel: branch a is the compression of the output onto flag |a⟩.
Instrument instrument_from_flag(const CpMap& flag, std::size_t dim_out, std::size_t outcomes);
CpMap measure_prepare_channel(const Povm& m);
Instrument post_process(const Instrument& inst, const std::vector<Instrument>& processors);
Povm heisenberg_measurement(const Instrument& inst, const Povm& b);
Instrument enlarge_instrument(const Instrument& inst, std::size_t dim_b);
Instrument one_outcome(const CpMap& channel);
Instrument lueders_instrument(const Povm& m);
// A POVM viewed as an instrument with one-dimensional output, and back.
Instrument povm_as_instrument(const Povm& m);
Povm instrument_as_povm(const Instrument& inst);
// Classical post-processing M'(z) = sum_x table[x][z] M(x).
Povm classical_post_process(const Povm& m, const std::vector<std::vector<double>>& table);

Instrument mix(double p, const Instrument& a, const Instrument& b);
InstrumentSet mix(double p, const InstrumentSet& a, const InstrumentSet& b);

CpMap random_channel(std::size_t dim_in, std::size_t dim_out, Rng& rng, std::size_t kraus_rank = 0);
Instrument random_instrument(std::size_t dim_in, std::size_t dim_out, std::size_t outcomes,
                             Rng& rng, std::size_t kraus_rank = 1);
Povm random_povm(std::size_t d, std::size_t outcomes, Rng& rng);

}  // namespace qirt
