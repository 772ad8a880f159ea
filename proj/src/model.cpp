#include "qirt/model.hpp"

#include <cmath>

namespace qirt {

namespace {

constexpr double kDropTol = 1e-14;

HermExpr var_expr(std::size_t d, std::size_t first) {
  HermExpr e = HermExpr::zero(d);
  for (std::size_t k = 0; k < d * d; ++k) {
    RealVector v = RealVector::Zero(d * d);
    v(k) = 1.0;
    e.terms.emplace(first + k, std::move(v));
  }
  return e;
}

void add_terms(HermExpr& a, const HermExpr& b, double s) {
  if (a.dim != b.dim) throw Error("expression dimension mismatch");
  a.constant += s * b.constant;
  for (const auto& [c, v] : b.terms) {
    auto it = a.terms.find(c);
    if (it == a.terms.end()) a.terms.emplace(c, s * v);
    else it->second += s * v;
  }
}

}  // namespace

HermExpr HermExpr::zero(std::size_t d) {
  HermExpr e;
  e.dim = d;
  e.constant = RealVector::Zero(d * d);
  return e;
}

HermExpr HermExpr::constant_matrix(const ComplexMatrix& m) {
  HermExpr e = zero(static_cast<std::size_t>(m.rows()));
  e.constant = herm_coords(m);
  return e;
}

HermExpr HermExpr::constant_scalar(double v) {
  HermExpr e = zero(1);
  e.constant(0) = v;
  return e;
}

HermExpr& HermExpr::operator+=(const HermExpr& o) {
  add_terms(*this, o, 1.0);
  return *this;
}

HermExpr& HermExpr::operator-=(const HermExpr& o) {
  add_terms(*this, o, -1.0);
  return *this;
}

HermExpr& HermExpr::operator*=(double s) {
  constant *= s;
  for (auto& [c, v] : terms) v *= s;
  return *this;
}

HermExpr operator+(HermExpr a, const HermExpr& b) { return a += b; }
HermExpr operator-(HermExpr a, const HermExpr& b) { return a -= b; }
HermExpr operator*(double s, HermExpr a) { return a *= s; }
HermExpr operator-(HermExpr a) { return a *= -1.0; }

LinearMap LinearMap::from_function(const std::function<ComplexMatrix(const ComplexMatrix&)>& f,
                                   std::size_t din, std::size_t dout) {
  LinearMap l;
  l.din = din;
  l.dout = dout;
  l.matrix.resize(dout * dout, din * din);
  for (std::size_t k = 0; k < din * din; ++k) {
    const ComplexMatrix out = f(herm_basis(din, k));
    if (static_cast<std::size_t>(out.rows()) != dout) throw Error("linear map output dimension mismatch");
    l.matrix.col(k) = herm_coords(out);
  }
  return l;
}

HermExpr LinearMap::operator()(const HermExpr& e) const {
  if (e.dim != din) throw Error("linear map input dimension mismatch");
  HermExpr out = HermExpr::zero(dout);
  out.constant = matrix * e.constant;
  for (const auto& [c, v] : e.terms) {
    RealVector w = matrix * v;
    if (w.cwiseAbs().maxCoeff() > kDropTol) out.terms.emplace(c, std::move(w));
  }
  return out;
}

HermExpr partial_trace(const HermExpr& e, const Dims& dims, const std::vector<std::size_t>& keep) {
  std::size_t dout = 1;
  for (auto k : keep) dout *= dims.at(k);
  return LinearMap::from_function([&](const ComplexMatrix& m) { return partial_trace(m, dims, keep); }, e.dim,
                                  dout)(e);
}

HermExpr partial_transpose(const HermExpr& e, const Dims& dims, std::size_t system) {
  return LinearMap::from_function([&](const ComplexMatrix& m) { return partial_transpose(m, dims, system); },
                                  e.dim, e.dim)(e);
}

HermExpr kron(const ComplexMatrix& a, const HermExpr& e) {
  const std::size_t da = static_cast<std::size_t>(a.rows());
  return LinearMap::from_function([&](const ComplexMatrix& m) { return tensor(a, m); }, e.dim, da * e.dim)(e);
}

HermExpr kron(const HermExpr& e, const ComplexMatrix& a) {
  const std::size_t da = static_cast<std::size_t>(a.rows());
  return LinearMap::from_function([&](const ComplexMatrix& m) { return tensor(m, a); }, e.dim, da * e.dim)(e);
}

HermExpr times(const ComplexMatrix& m, const HermExpr& s) {
  if (s.dim != 1) throw Error("times expects a scalar expression");
  const RealVector c = herm_coords(m);
  HermExpr out = HermExpr::zero(static_cast<std::size_t>(m.rows()));
  out.constant = s.constant(0) * c;
  for (const auto& [col, v] : s.terms) out.terms.emplace(col, v(0) * c);
  return out;
}

HermExpr inner(const ComplexMatrix& c, const HermExpr& e) {
  if (static_cast<std::size_t>(c.rows()) != e.dim) throw Error("inner product dimension mismatch");
  const RealVector w = herm_coords(hermitian_part(c));
  HermExpr out = HermExpr::constant_scalar(w.dot(e.constant));
  for (const auto& [col, v] : e.terms) {
    const double s = w.dot(v);
    if (std::abs(s) > kDropTol) out.terms.emplace(col, RealVector::Constant(1, s));
  }
  return out;
}

HermExpr trace(const HermExpr& e) { return inner(identity(e.dim), e); }

HermExpr sum(const std::vector<HermExpr>& es) {
  if (es.empty()) throw Error("sum of an empty expression list");
  HermExpr out = es.front();
  for (std::size_t i = 1; i < es.size(); ++i) out += es[i];
  return out;
}

HermExpr Model::psd(std::size_t d) {
  vars_.push_back({Kind::Psd, d, columns_});
  HermExpr e = var_expr(d, columns_);
  columns_ += d * d;
  return e;
}

HermExpr Model::nonneg() {
  vars_.push_back({Kind::Nonneg, 1, columns_});
  return var_expr(1, columns_++);
}

HermExpr Model::free_scalar() {
  vars_.push_back({Kind::Free, 1, columns_});
  return var_expr(1, columns_++);
}

std::size_t Model::equal(const HermExpr& lhs, const HermExpr& rhs) {
  groups_.push_back({lhs - rhs, Relation::Equal});
  return groups_.size() - 1;
}

std::size_t Model::psd_constraint(const HermExpr& e) { return equal(e, psd(e.dim)); }

std::size_t Model::leq(const HermExpr& lhs, const HermExpr& rhs) {
  if (lhs.dim != 1 || rhs.dim != 1) throw Error("leq expects scalar expressions");
  groups_.push_back({lhs - rhs, Relation::LessEqual});
  return groups_.size() - 1;
}

void Model::minimize(const HermExpr& objective) {
  if (objective.dim != 1) throw Error("objective must be a scalar expression");
  objective_ = objective;
  maximize_ = false;
}

void Model::maximize(const HermExpr& objective) {
  if (objective.dim != 1) throw Error("objective must be a scalar expression");
  objective_ = -objective;
  maximize_ = true;
}

std::vector<std::size_t> Model::map_columns() const {
  std::vector<std::size_t> map(columns_);
  std::size_t next = 0;
  for (const auto& v : vars_)
    if (v.kind == Kind::Psd)
      for (std::size_t k = 0; k < v.dim * v.dim; ++k) map[v.first + k] = next++;
  for (const auto& v : vars_)
    if (v.kind == Kind::Nonneg) map[v.first] = next++;
  for (const auto& v : vars_)
    if (v.kind == Kind::Free) map[v.first] = next++;
  return map;
}

SdpProblem Model::build() const {
  SdpProblem p;
  std::size_t nn = 0, fr = 0;
  for (const auto& v : vars_) {
    if (v.kind == Kind::Psd) p.blocks.push_back(v.dim);
    else if (v.kind == Kind::Nonneg) ++nn;
    else ++fr;
  }
  p.nonneg = nn;
  p.free = fr;
  const auto map = map_columns();
  for (const auto& [c, v] : objective_.terms)
    if (std::abs(v(0)) > kDropTol) p.objective.emplace_back(map[c], v(0));
  for (const auto& g : groups_) {
    const std::size_t n = g.expr.dim * g.expr.dim;
    std::vector<SdpConstraint> rows(n);
    for (std::size_t r = 0; r < n; ++r) {
      rows[r].rhs = -g.expr.constant(r);
      rows[r].rel = g.rel;
    }
    for (const auto& [c, v] : g.expr.terms)
      for (std::size_t r = 0; r < n; ++r)
        if (std::abs(v(r)) > kDropTol) rows[r].coeffs.emplace_back(map[c], v(r));
    for (auto& r : rows) p.constraints.push_back(std::move(r));
  }
  return p;
}

void Model::finish(const SdpSolution& s) {
  solution_ = s;
  column_map_ = map_columns();
  model_x_ = RealVector::Zero(columns_);
  if (s.x.size() == static_cast<Eigen::Index>(problem_.num_vars()))
    for (std::size_t c = 0; c < columns_; ++c) model_x_(c) = s.x(column_map_[c]);
  std::size_t row = 0;
  for (auto& g : groups_) {
    g.first_row = row;
    row += g.expr.dim * g.expr.dim;
  }
}

SdpSolution Model::solve(const SdpSettings& s) {
  problem_ = build();
  finish(qirt::solve(problem_, s));
  return solution_;
}

SdpSolution Model::feasibility(const SdpSettings& s) {
  problem_ = build();
  finish(qirt::feasibility(problem_, s));
  return solution_;
}

ComplexMatrix Model::value(const HermExpr& e) const {
  RealVector v = e.constant;
  for (const auto& [c, t] : e.terms) v += model_x_(c) * t;
  return herm_from_coords(v, e.dim);
}

double Model::scalar_value(const HermExpr& e) const {
  if (e.dim != 1) throw Error("scalar_value expects a scalar expression");
  return value(e)(0, 0).real();
}

ComplexMatrix Model::dual_value(std::size_t handle) const {
  const Group& g = groups_.at(handle);
  const std::size_t n = g.expr.dim * g.expr.dim;
  if (solution_.y.size() < static_cast<Eigen::Index>(g.first_row + n)) throw Error("no dual solution available");
  return herm_from_coords(solution_.y.segment(g.first_row, n), g.expr.dim);
}

double Model::objective_value() const {
  const double v = scalar_value(objective_);
  return maximize_ ? -v : v;
}

}  // namespace qirt
