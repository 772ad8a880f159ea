#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qirt/linalg.hpp"

namespace qirt {

// Variables are laid out as the Hermitian coordinates (see herm_coords) of each complex PSD
// block in order, then nonnegative scalars, then free scalars.
//
//   minimize   c^T x
//   subject to a_i^T x = b_i   or   a_i^T x <= b_i
//              blocks PSD, nonnegative scalars >= 0
//
// Dual: maximize b^T y subject to c - sum_i y_i a_i in the dual cone, y_i <= 0 on rows with <=.

enum class SdpStatus { Optimal, Infeasible, Unbounded, MaxIter };
const char* to_string(SdpStatus s);

enum class Relation { Equal, LessEqual };

using SparseRow = std::vector<std::pair<std::size_t, double>>;

struct SdpConstraint {
  SparseRow coeffs;
  double rhs = 0.0;
  Relation rel = Relation::Equal;
};

struct SdpProblem {
  std::vector<std::size_t> blocks;
  std::size_t nonneg = 0;
  std::size_t free = 0;
  SparseRow objective;
  std::vector<SdpConstraint> constraints;

  std::size_t block_offset(std::size_t k) const;
  std::size_t nonneg_offset() const;
  std::size_t free_offset() const;
  std::size_t num_vars() const;
  void validate() const;
};

struct SdpSettings {
  // Acceptance thresholds for an Optimal status.
  double gap_tol = 1e-7;
  double residual_tol = 1e-8;
  // The iteration keeps going until these tighter targets are met or progress stalls.
  double target_gap = 1e-10;
  double target_residual = 1e-10;
  int max_iter = 200;
  double certificate_tol = 1e-8;
  std::string dump_path;  // writes the problem as sdp.v1 when non-empty
};

// Process-wide defaults, adjustable from the CLI configuration.
SdpSettings& default_sdp_settings();

struct SdpSolution {
  SdpStatus status = SdpStatus::MaxIter;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  RealVector x;  // primal point (coordinates)
  RealVector y;  // one multiplier per constraint; a Farkas ray when Infeasible
  // feasibility(): interior depth of the point when Optimal, certified value b^T y when Infeasible.
  double margin = 0.0;
  // Cone-condition violation of y when it is reported as an infeasibility certificate.
  double certificate_violation = 0.0;

  bool optimal() const { return status == SdpStatus::Optimal; }
  ComplexMatrix block(const SdpProblem& p, std::size_t k) const;
};

SdpSolution solve(const SdpProblem& p, const SdpSettings& s = default_sdp_settings());
// Phase-one feasibility: minimizes t subject to the constraints with every cone variable shifted
// by t times the identity (t >= -1). Reports Optimal with a cleaned feasible point, or Infeasible
// with a normalized Farkas certificate y (sum of traces of -A^T y at most one).
SdpSolution feasibility(const SdpProblem& p, const SdpSettings& s = default_sdp_settings());

double constraint_residual(const SdpProblem& p, const RealVector& x);
// Largest violation of: -A^T y in the dual cone, y_i <= 0 on inequality rows.
double infeasibility_violation(const SdpProblem& p, const RealVector& y);
double rhs_dot(const SdpProblem& p, const RealVector& y);

nlohmann::json sdp_to_json(const SdpProblem& p);
SdpProblem sdp_from_json(const nlohmann::json& j);

// Real symmetric embedding of a complex Hermitian matrix, scaled by 1/2 so that
// <embed(C), [[Re X, -Im X],[Im X, Re X]]> = Re Tr(C X).
Eigen::MatrixXd embed_hermitian(const ComplexMatrix& c, double scale = 0.5);
ComplexMatrix unembed_hermitian(const Eigen::MatrixXd& m);

}  // namespace qirt
