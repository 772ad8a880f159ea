#pragma once

#include <functional>
#include <map>
#include <vector>

#include "qirt/sdp.hpp"

namespace qirt {

// Affine Hermitian-matrix expression in the model's variables, stored in Hermitian
// coordinates: coords(expr) = constant + sum_c terms[c] * x_c.
struct HermExpr {
  std::size_t dim = 0;
  RealVector constant;
  std::map<std::size_t, RealVector> terms;

  static HermExpr zero(std::size_t d);
  static HermExpr constant_matrix(const ComplexMatrix& m);
  static HermExpr constant_scalar(double v);

  HermExpr& operator+=(const HermExpr& o);
  HermExpr& operator-=(const HermExpr& o);
  HermExpr& operator*=(double s);
};

HermExpr operator+(HermExpr a, const HermExpr& b);
HermExpr operator-(HermExpr a, const HermExpr& b);
HermExpr operator*(double s, HermExpr a);
HermExpr operator-(HermExpr a);

// Hermiticity-preserving linear map stored as a real matrix on Hermitian coordinates.
struct LinearMap {
  std::size_t din = 0;
  std::size_t dout = 0;
  Eigen::MatrixXd matrix;

  static LinearMap from_function(const std::function<ComplexMatrix(const ComplexMatrix&)>& f,
                                 std::size_t din, std::size_t dout);
  HermExpr operator()(const HermExpr& e) const;
};

HermExpr partial_trace(const HermExpr& e, const Dims& dims, const std::vector<std::size_t>& keep);
HermExpr partial_transpose(const HermExpr& e, const Dims& dims, std::size_t system);
// a ⊗ e and e ⊗ a for a constant Hermitian a.
HermExpr kron(const ComplexMatrix& a, const HermExpr& e);
HermExpr kron(const HermExpr& e, const ComplexMatrix& a);
// m * s for a scalar expression s.
HermExpr times(const ComplexMatrix& m, const HermExpr& s);
// Re Tr(c e) as a scalar expression.
HermExpr inner(const ComplexMatrix& c, const HermExpr& e);
HermExpr trace(const HermExpr& e);
HermExpr sum(const std::vector<HermExpr>& es);

class Model {
 public:
  HermExpr psd(std::size_t d);
  HermExpr nonneg();
  HermExpr free_scalar();

  // Each returns a handle to the constraint group, usable with dual_value.
  std::size_t equal(const HermExpr& lhs, const HermExpr& rhs);
  std::size_t psd_constraint(const HermExpr& e);  // e ⪰ 0 through a slack block
  std::size_t leq(const HermExpr& lhs, const HermExpr& rhs);  // scalar expressions
  void minimize(const HermExpr& objective);
  void maximize(const HermExpr& objective);

  SdpProblem build() const;
  SdpSolution solve(const SdpSettings& s = default_sdp_settings());
  SdpSolution feasibility(const SdpSettings& s = default_sdp_settings());

  // Valid after solve or feasibility.
  ComplexMatrix value(const HermExpr& e) const;
  double scalar_value(const HermExpr& e) const;
  // Multipliers of a constraint group as a Hermitian matrix (1x1 for scalar groups).
  ComplexMatrix dual_value(std::size_t handle) const;
  // Objective value of the original sense (maximize reports the maximum).
  double objective_value() const;
  const SdpSolution& solution() const { return solution_; }
  const SdpProblem& problem() const { return problem_; }

 private:
  enum class Kind { Psd, Nonneg, Free };
  struct Var {
    Kind kind;
    std::size_t dim;
    std::size_t first;  // model column
  };
  struct Group {
    HermExpr expr;  // expr = 0 or expr <= 0
    Relation rel;
    std::size_t first_row = 0;
  };

  std::vector<Var> vars_;
  std::size_t columns_ = 0;
  std::vector<Group> groups_;
  HermExpr objective_ = HermExpr::constant_scalar(0.0);
  bool maximize_ = false;

  SdpProblem problem_;
  SdpSolution solution_;
  std::vector<std::size_t> column_map_;
  RealVector model_x_;

  std::vector<std::size_t> map_columns() const;
  void finish(const SdpSolution& s);
};

}  // namespace qirt
