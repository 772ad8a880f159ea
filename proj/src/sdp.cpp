#include "qirt/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace qirt {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::Unbounded: return "Unbounded";
    case SdpStatus::MaxIter: return "MaxIter";
  }
  return "?";
}

SdpSettings& default_sdp_settings() {
  static SdpSettings s;
  return s;
}

std::size_t SdpProblem::block_offset(std::size_t k) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < k; ++i) off += blocks[i] * blocks[i];
  return off;
}

std::size_t SdpProblem::nonneg_offset() const { return block_offset(blocks.size()); }
std::size_t SdpProblem::free_offset() const { return nonneg_offset() + nonneg; }
std::size_t SdpProblem::num_vars() const { return free_offset() + free; }

void SdpProblem::validate() const {
  const std::size_t n = num_vars();
  for (auto& [i, v] : objective)
    if (i >= n || !std::isfinite(v)) throw Error("SDP objective refers to an invalid variable");
  for (const auto& c : constraints) {
    if (!std::isfinite(c.rhs)) throw Error("SDP constraint has a non-finite right-hand side");
    for (auto& [i, v] : c.coeffs)
      if (i >= n || !std::isfinite(v)) throw Error("SDP constraint refers to an invalid variable");
  }
  for (auto d : blocks)
    if (d == 0) throw Error("SDP block of dimension zero");
}

ComplexMatrix SdpSolution::block(const SdpProblem& p, std::size_t k) const {
  const std::size_t d = p.blocks.at(k);
  return herm_from_coords(x.segment(p.block_offset(k), d * d), d);
}

Eigen::MatrixXd embed_hermitian(const ComplexMatrix& c, double scale) {
  const Eigen::Index d = c.rows();
  Eigen::MatrixXd m(2 * d, 2 * d);
  const Eigen::MatrixXd re = c.real(), im = c.imag();
  m.topLeftCorner(d, d) = scale * re;
  m.bottomRightCorner(d, d) = scale * re;
  m.topRightCorner(d, d) = -scale * im;
  m.bottomLeftCorner(d, d) = scale * im;
  return m;
}

ComplexMatrix unembed_hermitian(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows() / 2;
  ComplexMatrix c(d, d);
  const Eigen::MatrixXd re = 0.5 * (m.topLeftCorner(d, d) + m.bottomRightCorner(d, d));
  const Eigen::MatrixXd im = 0.5 * (m.bottomLeftCorner(d, d) - m.topRightCorner(d, d));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) c(i, j) = cd(re(i, j), im(i, j));
  return hermitian_part(c);
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Entry {
  int p, q;
  double v;
};

struct RowPart {
  int row;
  std::vector<Entry> e;
};

struct Block {
  int d = 0;  // complex dimension
  int n = 0;  // real embedded dimension
  std::vector<RowPart> rows;
  MatrixXd c;
};

// Internal standard form over real symmetric blocks, an LP block (nonnegative scalars and
// inequality slacks) and free scalars. Rows are the independent subset of the input rows.
struct Standard {
  int m = 0;
  std::vector<Block> blocks;
  MatrixXd al;  // m x L
  VectorXd cl;
  MatrixXd af;  // m x F
  VectorXd cf;
  VectorXd b;
  std::vector<int> row_of;  // input row for each internal row
};

double apply_row(const std::vector<Entry>& e, const MatrixXd& h) {
  double s = 0;
  for (const auto& x : e) s += x.v * h(x.p, x.q);
  return s;
}

// Coordinate columns of a problem split by kind.
struct Layout {
  std::vector<std::size_t> offsets;
  std::size_t nn_off, free_off, total;
  int block_of(std::size_t col) const {
    auto it = std::upper_bound(offsets.begin(), offsets.end(), col);
    return static_cast<int>(it - offsets.begin()) - 1;
  }
};

Layout layout_of(const SdpProblem& p) {
  Layout l;
  std::size_t off = 0;
  for (auto d : p.blocks) {
    l.offsets.push_back(off);
    off += d * d;
  }
  l.nn_off = off;
  l.free_off = off + p.nonneg;
  l.total = l.free_off + p.free;
  return l;
}

std::vector<Entry> embed_entries(const ComplexMatrix& c) {
  const MatrixXd m = embed_hermitian(c);
  std::vector<Entry> e;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) e.push_back({i, j, m(i, j)});
  return e;
}

// Pivoted Cholesky on a Gram matrix; returns the pivots whose residual diagonal stays above
// tol times the largest initial diagonal.
std::vector<int> independent_rows(const MatrixXd& gram, double tol) {
  const int m = gram.rows();
  MatrixXd a = gram;
  std::vector<int> piv(m);
  for (int i = 0; i < m; ++i) piv[i] = i;
  double dmax = 0;
  for (int i = 0; i < m; ++i) dmax = std::max(dmax, a(i, i));
  std::vector<int> kept;
  if (dmax <= 0) return kept;
  VectorXd diag = a.diagonal();
  MatrixXd l = MatrixXd::Zero(m, m);
  std::vector<bool> used(m, false);
  for (int k = 0; k < m; ++k) {
    int best = -1;
    double bv = 0;
    for (int i = 0; i < m; ++i)
      if (!used[i] && diag(i) > bv) {
        bv = diag(i);
        best = i;
      }
    if (best < 0 || bv <= tol * dmax) break;
    used[best] = true;
    const int col = static_cast<int>(kept.size());
    kept.push_back(best);
    const double s = std::sqrt(bv);
    for (int i = 0; i < m; ++i) {
      if (used[i] && i != best) continue;
      double v = a(i, best);
      for (int j = 0; j < col; ++j) v -= l(i, j) * l(best, j);
      l(i, col) = (i == best) ? s : v / s;
    }
    for (int i = 0; i < m; ++i)
      if (!used[i]) diag(i) -= l(i, col) * l(i, col);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

struct Preprocessed {
  Standard s;
  bool inconsistent = false;
  VectorXd certificate;  // over input rows, when inconsistent
};

Preprocessed preprocess(const SdpProblem& p) {
  Preprocessed out;
  const Layout lay = layout_of(p);
  const int m_in = static_cast<int>(p.constraints.size());
  int n_slack = 0;
  for (const auto& c : p.constraints)
    if (c.rel == Relation::LessEqual) ++n_slack;
  const int lp = static_cast<int>(p.nonneg) + n_slack;
  const int nf = static_cast<int>(p.free);

  // Dense coordinate rows, augmented with slack columns, for the rank test.
  const std::size_t ncols = lay.total + n_slack;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(m_in);
  {
    int slack = 0;
    for (int i = 0; i < m_in; ++i) {
      std::vector<double> dense;
      auto& r = rows[i];
      std::vector<std::pair<std::size_t, double>> tmp = p.constraints[i].coeffs;
      std::sort(tmp.begin(), tmp.end());
      for (auto& [c, v] : tmp) {
        if (!r.empty() && r.back().first == c) r.back().second += v;
        else r.emplace_back(c, v);
      }
      if (p.constraints[i].rel == Relation::LessEqual) r.emplace_back(lay.total + slack++, 1.0);
    }
  }
  (void)ncols;
  MatrixXd gram = MatrixXd::Zero(m_in, m_in);
  {
    // Column-wise accumulation of the Gram matrix.
    std::vector<std::vector<std::pair<int, double>>> by_col(ncols);
    for (int i = 0; i < m_in; ++i)
      for (auto& [c, v] : rows[i])
        if (v != 0.0) by_col[c].emplace_back(i, v);
    for (const auto& col : by_col)
      for (std::size_t a = 0; a < col.size(); ++a)
        for (std::size_t b = 0; b < col.size(); ++b) gram(col[a].first, col[b].first) += col[a].second * col[b].second;
  }
  VectorXd b_in(m_in);
  for (int i = 0; i < m_in; ++i) b_in(i) = p.constraints[i].rhs;
  std::vector<int> kept = m_in ? independent_rows(gram, 1e-13) : std::vector<int>{};

  // Consistency of the dropped rows.
  if (static_cast<int>(kept.size()) < m_in) {
    const int r = static_cast<int>(kept.size());
    MatrixXd gkk(r, r);
    VectorXd bk(r);
    for (int a = 0; a < r; ++a) {
      bk(a) = b_in(kept[a]);
      for (int c = 0; c < r; ++c) gkk(a, c) = gram(kept[a], kept[c]);
    }
    Eigen::LDLT<MatrixXd> ldlt;
    if (r > 0) ldlt.compute(gkk);
    std::vector<bool> is_kept(m_in, false);
    for (int k : kept) is_kept[k] = true;
    const double bscale = 1.0 + b_in.cwiseAbs().maxCoeff();
    for (int d = 0; d < m_in; ++d) {
      if (is_kept[d]) continue;
      VectorXd lam = VectorXd::Zero(r);
      if (r > 0) {
        VectorXd g(r);
        for (int a = 0; a < r; ++a) g(a) = gram(kept[a], d);
        lam = ldlt.solve(g);
      }
      const double mismatch = b_in(d) - (r ? lam.dot(bk) : 0.0);
      if (std::abs(mismatch) > 1e-9 * bscale * (1.0 + lam.cwiseAbs().sum())) {
        out.inconsistent = true;
        out.certificate = VectorXd::Zero(m_in);
        const double sgn = mismatch > 0 ? 1.0 : -1.0;
        out.certificate(d) = sgn;
        for (int a = 0; a < r; ++a) out.certificate(kept[a]) = -sgn * lam(a);
        return out;
      }
    }
  }

  Standard& s = out.s;
  s.m = static_cast<int>(kept.size());
  s.row_of = kept;
  s.b.resize(s.m);
  for (int i = 0; i < s.m; ++i) s.b(i) = b_in(kept[i]);
  s.blocks.resize(p.blocks.size());
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    s.blocks[k].d = static_cast<int>(p.blocks[k]);
    s.blocks[k].n = 2 * static_cast<int>(p.blocks[k]);
    s.blocks[k].c = MatrixXd::Zero(s.blocks[k].n, s.blocks[k].n);
  }
  s.al = MatrixXd::Zero(s.m, lp);
  s.cl = VectorXd::Zero(lp);
  s.af = MatrixXd::Zero(s.m, nf);
  s.cf = VectorXd::Zero(nf);

  // Slack column index per input row.
  std::vector<int> slack_col(m_in, -1);
  {
    int sl = 0;
    for (int i = 0; i < m_in; ++i)
      if (p.constraints[i].rel == Relation::LessEqual) slack_col[i] = static_cast<int>(p.nonneg) + sl++;
  }

  auto scatter = [&](const SparseRow& coeffs, auto&& on_block, auto&& on_nonneg, auto&& on_free) {
    std::vector<RealVector> parts(p.blocks.size());
    std::vector<bool> touched(p.blocks.size(), false);
    for (auto& [c, v] : coeffs) {
      if (c < lay.nn_off) {
        const int k = lay.block_of(c);
        if (!touched[k]) {
          parts[k] = RealVector::Zero(p.blocks[k] * p.blocks[k]);
          touched[k] = true;
        }
        parts[k](c - lay.offsets[k]) += v;
      } else if (c < lay.free_off) {
        on_nonneg(static_cast<int>(c - lay.nn_off), v);
      } else {
        on_free(static_cast<int>(c - lay.free_off), v);
      }
    }
    for (std::size_t k = 0; k < p.blocks.size(); ++k)
      if (touched[k]) on_block(static_cast<int>(k), herm_from_coords(parts[k], p.blocks[k]));
  };

  for (int i = 0; i < s.m; ++i) {
    const auto& con = p.constraints[kept[i]];
    scatter(
        con.coeffs,
        [&](int k, const ComplexMatrix& c) {
          auto e = embed_entries(c);
          if (!e.empty()) s.blocks[k].rows.push_back({i, std::move(e)});
        },
        [&](int j, double v) { s.al(i, j) += v; }, [&](int j, double v) { s.af(i, j) += v; });
    if (slack_col[kept[i]] >= 0) s.al(i, slack_col[kept[i]]) = 1.0;
  }
  scatter(
      p.objective, [&](int k, const ComplexMatrix& c) { s.blocks[k].c = embed_hermitian(c); },
      [&](int j, double v) { s.cl(j) += v; }, [&](int j, double v) { s.cf(j) += v; });
  return out;
}

struct Iterate {
  std::vector<MatrixXd> X, Z;
  VectorXd x, z, u, y;
};

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Largest alpha with X + alpha dX PSD (infinity when unconstrained).
double max_step_psd(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i)
    if (dx(i) < 0) a = std::min(a, -x(i) / dx(i));
  return a;
}

class Solver {
 public:
  Solver(const Standard& s, const SdpSettings& set) : s_(s), set_(set) {}

  struct Result {
    SdpStatus status = SdpStatus::MaxIter;
    Iterate it;
    double pobj = 0, dobj = 0, pinf = 0, dinf = 0, gap = 0;
    int iters = 0;
  };

  Result run();

 private:
  const Standard& s_;
  const SdpSettings& set_;

  VectorXd apply_a(const std::vector<MatrixXd>& X, const VectorXd& x, const VectorXd& u) const {
    VectorXd r = VectorXd::Zero(s_.m);
    for (std::size_t k = 0; k < s_.blocks.size(); ++k)
      for (const auto& rp : s_.blocks[k].rows) r(rp.row) += apply_row(rp.e, X[k]);
    if (s_.al.cols()) r += s_.al * x;
    if (s_.af.cols()) r += s_.af * u;
    return r;
  }

  MatrixXd adjoint_block(std::size_t k, const VectorXd& y) const {
    const Block& b = s_.blocks[k];
    MatrixXd out = MatrixXd::Zero(b.n, b.n);
    for (const auto& rp : b.rows) {
      const double w = y(rp.row);
      if (w == 0.0) continue;
      for (const auto& e : rp.e) out(e.p, e.q) += w * e.v;
    }
    return out;
  }
};

Solver::Result Solver::run() {
  const int m = s_.m;
  const std::size_t K = s_.blocks.size();
  const int L = static_cast<int>(s_.cl.size());
  const int F = static_cast<int>(s_.cf.size());
  Result res;
  Iterate& it = res.it;

  // Initial point scaled to the data.
  const double bnorm = s_.b.size() ? s_.b.norm() : 0.0;
  double cnorm2 = s_.cl.squaredNorm() + s_.cf.squaredNorm();
  for (const auto& b : s_.blocks) cnorm2 += b.c.squaredNorm();
  const double cnorm = std::sqrt(cnorm2);
  int total_dim = L;
  for (const auto& b : s_.blocks) total_dim += b.n;
  std::vector<double> row_norm(m, 0.0);
  for (const auto& b : s_.blocks)
    for (const auto& rp : b.rows)
      for (const auto& e : rp.e) row_norm[rp.row] += e.v * e.v;
  for (int i = 0; i < m; ++i) {
    if (L) row_norm[i] += s_.al.row(i).squaredNorm();
    if (F) row_norm[i] += s_.af.row(i).squaredNorm();
    row_norm[i] = std::sqrt(row_norm[i]);
  }
  double xi = 1.0, eta = 1.0;
  for (int i = 0; i < m; ++i) {
    xi = std::max(xi, (1.0 + std::abs(s_.b(i))) / (1.0 + row_norm[i]));
    eta = std::max(eta, row_norm[i]);
  }
  xi = std::max(xi, std::sqrt(static_cast<double>(std::max(total_dim, 1))));
  eta = std::max({eta, cnorm, std::sqrt(static_cast<double>(std::max(total_dim, 1)))});
  it.X.resize(K);
  it.Z.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const int n = s_.blocks[k].n;
    it.X[k] = xi * MatrixXd::Identity(n, n);
    it.Z[k] = eta * MatrixXd::Identity(n, n);
  }
  it.x = VectorXd::Constant(L, xi);
  it.z = VectorXd::Constant(L, eta);
  it.u = VectorXd::Zero(F);
  it.y = VectorXd::Zero(m);

  Iterate best = it;
  double best_merit = std::numeric_limits<double>::infinity();
  double best_pobj = 0, best_dobj = 0, best_pinf = 0, best_dinf = 0, best_gap = 0;
  int stall = 0;

  std::vector<MatrixXd> Zinv(K), Rd(K), Rc(K), dX(K), dZ(K), dXa(K), dZa(K);
  VectorXd rdl, rc, dx, dz, du, dy, dxa, dza;

  for (int iter = 0; iter <= set_.max_iter; ++iter) {
    res.iters = iter;
    // Residuals and objectives.
    VectorXd rp = s_.b - apply_a(it.X, it.x, it.u);
    double dres2 = 0;
    double pobj = 0, xz = 0;
    for (std::size_t k = 0; k < K; ++k) {
      Rd[k] = s_.blocks[k].c - adjoint_block(k, it.y) - it.Z[k];
      dres2 += Rd[k].squaredNorm();
      pobj += (s_.blocks[k].c.cwiseProduct(it.X[k])).sum();
      xz += (it.X[k].cwiseProduct(it.Z[k])).sum();
    }
    rdl = s_.cl - (L ? VectorXd(s_.al.transpose() * it.y) : VectorXd::Zero(0)) - it.z;
    VectorXd rdf = s_.cf - (F ? VectorXd(s_.af.transpose() * it.y) : VectorXd::Zero(0));
    dres2 += rdl.squaredNorm() + rdf.squaredNorm();
    pobj += s_.cl.dot(it.x) + s_.cf.dot(it.u);
    xz += it.x.dot(it.z);
    const double dobj = s_.b.dot(it.y);
    const double pinf = rp.norm() / (1.0 + bnorm);
    const double dinf = std::sqrt(dres2) / (1.0 + cnorm);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = total_dim ? xz / total_dim : 0.0;

    const double merit = std::max({pinf / set_.residual_tol, dinf / set_.residual_tol, gap / set_.gap_tol});
    if (merit < best_merit * 0.999) {
      best_merit = merit;
      best = it;
      best_pobj = pobj;
      best_dobj = dobj;
      best_pinf = pinf;
      best_dinf = dinf;
      best_gap = gap;
      stall = 0;
    } else {
      ++stall;
    }

    if (pinf <= set_.target_residual && dinf <= set_.target_residual && gap <= set_.target_gap) break;
    if (stall >= 12 || iter == set_.max_iter) break;

    // Divergence of the dual multipliers signals primal infeasibility, and divergence of the
    // primal point with decreasing objective signals unboundedness.
    if (dobj > 1e8 * (1.0 + cnorm) && dinf * (1.0 + cnorm) < 1e-6 * dobj) {
      res.status = SdpStatus::Infeasible;
      res.it = it;
      res.pobj = pobj;
      res.dobj = dobj;
      res.pinf = pinf;
      res.dinf = dinf;
      res.gap = gap;
      return res;
    }
    if (-pobj > 1e8 * (1.0 + bnorm) && pinf * (1.0 + bnorm) < 1e-6 * -pobj) {
      res.status = SdpStatus::Unbounded;
      res.it = it;
      res.pobj = pobj;
      res.dobj = dobj;
      res.pinf = pinf;
      res.dinf = dinf;
      res.gap = gap;
      return res;
    }

    // Schur complement.
    MatrixXd M = MatrixXd::Zero(m, m);
    bool ok = true;
    for (std::size_t k = 0; k < K && ok; ++k) {
      Eigen::LLT<MatrixXd> llt(it.Z[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv[k] = llt.solve(MatrixXd::Identity(s_.blocks[k].n, s_.blocks[k].n));
      Zinv[k] = sym(Zinv[k]);
      const auto& rows = s_.blocks[k].rows;
      const MatrixXd& X = it.X[k];
      const int n = s_.blocks[k].n;
      MatrixXd G(n, n);
      for (const auto& rj : rows) {
        G.setZero();
        for (const auto& e : rj.e) G.noalias() += e.v * X.col(e.p) * Zinv[k].row(e.q);
        for (const auto& ri : rows) M(ri.row, rj.row) += apply_row(ri.e, G);
      }
    }
    if (!ok) break;
    if (L) M += s_.al * (it.x.array() / it.z.array()).matrix().asDiagonal() * s_.al.transpose();
    M = 0.5 * (M + M.transpose());

    Eigen::LLT<MatrixXd> mllt;
    {
      double reg = 0;
      const double dmax = m ? std::max(M.diagonal().maxCoeff(), 1e-300) : 1.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        MatrixXd Mr = M;
        if (reg > 0) Mr.diagonal().array() += reg;
        mllt.compute(Mr);
        if (mllt.info() == Eigen::Success) break;
        reg = reg == 0 ? 1e-14 * dmax : reg * 100;
      }
      if (mllt.info() != Eigen::Success) break;
    }
    MatrixXd MinvF;
    Eigen::LDLT<MatrixXd> fsys;
    if (F) {
      MinvF = mllt.solve(s_.af);
      MatrixXd S = s_.af.transpose() * MinvF;
      S.diagonal().array() += 1e-14 * (1.0 + S.diagonal().cwiseAbs().maxCoeff());
      fsys.compute(S);
    }

    auto direction = [&](const std::vector<MatrixXd>& rck, const VectorXd& rcl, std::vector<MatrixXd>& oX,
                         std::vector<MatrixXd>& oZ, VectorXd& ox, VectorXd& oz, VectorXd& ou, VectorXd& oy) {
      VectorXd h = rp;
      std::vector<MatrixXd> T(K);
      for (std::size_t k = 0; k < K; ++k) {
        T[k] = (rck[k] - it.X[k] * Rd[k]) * Zinv[k];
        for (const auto& r : s_.blocks[k].rows) h(r.row) -= apply_row(r.e, T[k]);
      }
      if (L) h -= s_.al * ((rcl.array() - it.x.array() * rdl.array()) / it.z.array()).matrix();
      VectorXd Minvh = mllt.solve(h);
      if (F) {
        ou = fsys.solve(s_.af.transpose() * Minvh - rdf);
        oy = Minvh - MinvF * ou;
      } else {
        ou = VectorXd::Zero(0);
        oy = Minvh;
      }
      for (std::size_t k = 0; k < K; ++k) {
        oZ[k] = Rd[k] - adjoint_block(k, oy);
        oX[k] = sym((rck[k] - it.X[k] * oZ[k]) * Zinv[k]);
      }
      if (L) {
        oz = rdl - s_.al.transpose() * oy;
        ox = ((rcl.array() - it.x.array() * oz.array()) / it.z.array()).matrix();
      } else {
        oz = VectorXd::Zero(0);
        ox = VectorXd::Zero(0);
      }
    };

    auto step_lengths = [&](const std::vector<MatrixXd>& ddX, const std::vector<MatrixXd>& ddZ, const VectorXd& ddx,
                            const VectorXd& ddz, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t k = 0; k < K; ++k) {
        ap = std::min(ap, max_step_psd(it.X[k], ddX[k]));
        ad = std::min(ad, max_step_psd(it.Z[k], ddZ[k]));
      }
      if (L) {
        ap = std::min(ap, max_step_lp(it.x, ddx));
        ad = std::min(ad, max_step_lp(it.z, ddz));
      }
    };

    // Predictor.
    for (std::size_t k = 0; k < K; ++k) Rc[k] = -it.X[k] * it.Z[k];
    rc = -(it.x.array() * it.z.array()).matrix();
    direction(Rc, rc, dXa, dZa, dxa, dza, du, dy);
    double ap, ad;
    step_lengths(dXa, dZa, dxa, dza, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0;
    for (std::size_t k = 0; k < K; ++k)
      xz_aff += ((it.X[k] + ap * dXa[k]).cwiseProduct(it.Z[k] + ad * dZa[k])).sum();
    if (L) xz_aff += (it.x + ap * dxa).dot(it.z + ad * dza);
    const double mu_aff = total_dim ? xz_aff / total_dim : 0.0;
    double sigma = mu > 0 ? std::pow(std::max(mu_aff, 0.0) / mu, 3) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);
    // Keep some centrality while the iterate is far from feasible.
    if (std::max(pinf, dinf) > 1e-3) sigma = std::max(sigma, 0.1);

    // Corrector.
    for (std::size_t k = 0; k < K; ++k) {
      const int n = s_.blocks[k].n;
      Rc[k] = sigma * mu * MatrixXd::Identity(n, n) - it.X[k] * it.Z[k] - dXa[k] * dZa[k];
    }
    if (L) rc = (sigma * mu - it.x.array() * it.z.array() - dxa.array() * dza.array()).matrix();
    direction(Rc, rc, dX, dZ, dx, dz, du, dy);
    step_lengths(dX, dZ, dx, dz, ap, ad);
    const double gamma = std::max(0.9, 1.0 - 10.0 * std::min(1.0, std::max(pinf, std::max(dinf, gap))));
    ap = std::min(1.0, std::min(0.995, gamma) * ap);
    ad = std::min(1.0, std::min(0.995, gamma) * ad);

    for (std::size_t k = 0; k < K; ++k) {
      it.X[k] = sym(it.X[k] + ap * dX[k]);
      it.Z[k] = sym(it.Z[k] + ad * dZ[k]);
    }
    if (L) {
      it.x += ap * dx;
      it.z += ad * dz;
    }
    if (F) it.u += ap * du;
    it.y += ad * dy;
  }

  res.it = best;
  res.pobj = best_pobj;
  res.dobj = best_dobj;
  res.pinf = best_pinf;
  res.dinf = best_dinf;
  res.gap = best_gap;
  res.status = best_merit <= 1.0 ? SdpStatus::Optimal : SdpStatus::MaxIter;
  return res;
}

RealVector coords_from_iterate(const SdpProblem& p, const Standard& s, const Iterate& it) {
  RealVector x = RealVector::Zero(p.num_vars());
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const std::size_t d = p.blocks[k];
    x.segment(p.block_offset(k), d * d) = herm_coords(unembed_hermitian(it.X[k]));
  }
  for (std::size_t j = 0; j < p.nonneg; ++j) x(p.nonneg_offset() + j) = it.x(j);
  for (std::size_t j = 0; j < p.free; ++j) x(p.free_offset() + j) = it.u(j);
  (void)s;
  return x;
}

RealVector full_y(const SdpProblem& p, const Standard& s, const VectorXd& y) {
  RealVector out = RealVector::Zero(p.constraints.size());
  for (int i = 0; i < s.m; ++i) out(s.row_of[i]) = y(i);
  return out;
}

double objective_value(const SdpProblem& p, const RealVector& x) {
  double v = 0;
  for (auto& [i, c] : p.objective) v += c * x(i);
  return v;
}

void maybe_dump(const SdpProblem& p, const SdpSettings& set) {
  if (set.dump_path.empty()) return;
  std::ofstream out(set.dump_path);
  if (out) out << sdp_to_json(p).dump() << "\n";
}

}  // namespace

double rhs_dot(const SdpProblem& p, const RealVector& y) {
  double v = 0;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) v += p.constraints[i].rhs * y(i);
  return v;
}

double constraint_residual(const SdpProblem& p, const RealVector& x) {
  double worst = 0;
  for (const auto& c : p.constraints) {
    double v = 0;
    for (auto& [i, a] : c.coeffs) v += a * x(i);
    const double r = v - c.rhs;
    worst = std::max(worst, c.rel == Relation::Equal ? std::abs(r) : std::max(r, 0.0));
  }
  for (std::size_t j = 0; j < p.nonneg; ++j) worst = std::max(worst, -x(p.nonneg_offset() + j));
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const std::size_t d = p.blocks[k];
    const ComplexMatrix b = herm_from_coords(x.segment(p.block_offset(k), d * d), d);
    worst = std::max(worst, -min_eigenvalue(b));
  }
  return worst;
}

double infeasibility_violation(const SdpProblem& p, const RealVector& y) {
  RealVector s = RealVector::Zero(p.num_vars());
  double worst = 0;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    for (auto& [c, a] : p.constraints[i].coeffs) s(c) -= y(i) * a;
    if (p.constraints[i].rel == Relation::LessEqual) worst = std::max(worst, y(i));
  }
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const std::size_t d = p.blocks[k];
    worst = std::max(worst, -min_eigenvalue(herm_from_coords(s.segment(p.block_offset(k), d * d), d)));
  }
  for (std::size_t j = 0; j < p.nonneg; ++j) worst = std::max(worst, -s(p.nonneg_offset() + j));
  for (std::size_t j = 0; j < p.free; ++j) worst = std::max(worst, std::abs(s(p.free_offset() + j)));
  return worst;
}

SdpSolution solve(const SdpProblem& p, const SdpSettings& set) {
  p.validate();
  maybe_dump(p, set);
  SdpSolution sol;
  Preprocessed pre = preprocess(p);
  if (pre.inconsistent) {
    sol.status = SdpStatus::Infeasible;
    sol.y = pre.certificate;
    sol.x = RealVector::Zero(p.num_vars());
    sol.margin = rhs_dot(p, sol.y);
    sol.certificate_violation = infeasibility_violation(p, sol.y);
    return sol;
  }
  Solver solver(pre.s, set);
  auto r = solver.run();
  sol.iterations = r.iters;
  sol.x = coords_from_iterate(p, pre.s, r.it);
  sol.y = full_y(p, pre.s, r.it.y);
  sol.primal_value = objective_value(p, sol.x);
  sol.dual_value = rhs_dot(p, sol.y);
  sol.gap = std::abs(sol.primal_value - sol.dual_value);
  sol.primal_residual = r.pinf;
  sol.dual_residual = r.dinf;
  sol.status = r.status;
  if (r.status == SdpStatus::Infeasible) {
    const double n = sol.y.norm();
    if (n > 0) sol.y /= n;
    sol.margin = rhs_dot(p, sol.y);
    sol.certificate_violation = infeasibility_violation(p, sol.y);
  }
  if (r.status == SdpStatus::Optimal && sol.gap > set.gap_tol * (1.0 + std::abs(sol.primal_value)))
    sol.status = SdpStatus::MaxIter;
  return sol;
}

namespace {

void project_cones(const SdpProblem& p, RealVector& x) {
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const std::size_t d = p.blocks[k];
    const ComplexMatrix b = herm_from_coords(x.segment(p.block_offset(k), d * d), d);
    x.segment(p.block_offset(k), d * d) = herm_coords(psd_projection(b));
  }
  for (std::size_t j = 0; j < p.nonneg; ++j) x(p.nonneg_offset() + j) = std::max(0.0, x(p.nonneg_offset() + j));
}

// Alternating projections between the equality constraints and the cones, for points that sit
// on the boundary of a feasible set without interior.
double polish(const SdpProblem& p, RealVector& x, double tol) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < p.constraints.size(); ++i)
    if (p.constraints[i].rel == Relation::Equal) rows.push_back(i);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows.size(), p.num_vars());
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (auto& [c, v] : p.constraints[rows[r]].coeffs) a(r, c) += v;
    b(r) = p.constraints[rows[r]].rhs;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  double best = constraint_residual(p, x);
  RealVector best_x = x;
  for (int it = 0; it < 200 && best > tol; ++it) {
    RealVector y = x + cod.solve(Eigen::VectorXd(b - a * x));
    project_cones(p, y);
    const double r = constraint_residual(p, y);
    x = y;
    if (r < best) {
      best = r;
      best_x = y;
    }
  }
  x = best_x;
  return best;
}

}  // namespace

SdpSolution feasibility(const SdpProblem& p, const SdpSettings& set) {
  p.validate();
  maybe_dump(p, set);
  SdpSolution sol;
  if (p.constraints.empty()) {
    sol.status = SdpStatus::Optimal;
    sol.x = RealVector::Zero(p.num_vars());
    sol.y = RealVector::Zero(0);
    sol.primal_value = sol.dual_value = sol.gap = 0.0;
    sol.primal_residual = sol.dual_residual = 0.0;
    sol.margin = 1.0;
    return sol;
  }
  // Shift direction E: identity on every block, one on every nonnegative scalar.
  RealVector e = RealVector::Zero(p.num_vars());
  for (std::size_t k = 0; k < p.blocks.size(); ++k)
    for (std::size_t i = 0; i < p.blocks[k]; ++i) e(p.block_offset(k) + i) = 1.0;
  for (std::size_t j = 0; j < p.nonneg; ++j) e(p.nonneg_offset() + j) = 1.0;

  SdpProblem q;
  q.blocks = p.blocks;
  q.nonneg = p.nonneg + 1;
  q.free = p.free;
  // Remap free columns past the extra nonnegative variable w.
  const std::size_t w = p.nonneg_offset() + p.nonneg;
  auto remap = [&](std::size_t c) { return c >= p.free_offset() ? c + 1 : c; };
  q.objective = {{w, 1.0}};
  for (const auto& c : p.constraints) {
    SdpConstraint qc;
    double ae = 0;
    for (auto& [i, a] : c.coeffs) {
      qc.coeffs.emplace_back(remap(i), a);
      ae += a * e(i);
    }
    if (ae != 0.0) qc.coeffs.emplace_back(w, -ae);
    qc.rhs = c.rhs - ae;
    qc.rel = c.rel;
    q.constraints.push_back(std::move(qc));
  }
  SdpSettings inner = set;
  inner.dump_path.clear();
  SdpSolution s1 = solve(q, inner);
  sol.iterations = s1.iterations;
  sol.primal_residual = s1.primal_residual;
  sol.dual_residual = s1.dual_residual;
  sol.gap = s1.gap;
  if (s1.status == SdpStatus::Infeasible) {
    // The shifted problem is always feasible, so this is a bookkeeping inconsistency in the
    // right-hand side; the ray is a certificate for the original problem as well.
    sol.status = SdpStatus::Infeasible;
    sol.y = s1.y;
    sol.x = RealVector::Zero(p.num_vars());
    sol.margin = rhs_dot(p, sol.y);
    sol.certificate_violation = infeasibility_violation(p, sol.y);
    return sol;
  }
  const double t = s1.x(w) - 1.0;
  // Candidate point X = X' - t E.
  RealVector x(p.num_vars());
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    const std::size_t qi = remap(i);
    x(i) = s1.x(qi) - t * e(i);
  }
  project_cones(p, x);
  double residual = constraint_residual(p, x);
  if (residual > set.residual_tol && t < 1e-6) residual = polish(p, x, set.residual_tol);
  sol.x = x;
  sol.y = s1.y;
  sol.primal_value = 0.0;
  sol.dual_value = rhs_dot(p, sol.y);
  const double cert = rhs_dot(p, s1.y);
  const double viol = infeasibility_violation(p, s1.y);
  if (t > 0 && cert >= set.certificate_tol && viol <= set.certificate_tol) {
    sol.status = SdpStatus::Infeasible;
    sol.margin = cert;
    sol.certificate_violation = viol;
  } else if (residual <= set.residual_tol) {
    sol.status = SdpStatus::Optimal;
    sol.margin = std::max(0.0, -t);
    sol.primal_residual = residual;
  } else {
    sol.status = SdpStatus::MaxIter;
    sol.margin = -t;
    sol.primal_residual = residual;
    sol.certificate_violation = viol;
  }
  return sol;
}

nlohmann::json sdp_to_json(const SdpProblem& p) {
  using nlohmann::json;
  auto row = [](const SparseRow& r) {
    json a = json::array();
    for (auto& [i, v] : r) a.push_back({i, v});
    return a;
  };
  json cons = json::array();
  for (const auto& c : p.constraints)
    cons.push_back({{"coeffs", row(c.coeffs)}, {"rhs", c.rhs}, {"rel", c.rel == Relation::Equal ? "=" : "<="}});
  return {{"format", "sdp.v1"},
          {"blocks", p.blocks},
          {"nonneg", p.nonneg},
          {"free", p.free},
          {"objective", row(p.objective)},
          {"constraints", cons}};
}

SdpProblem sdp_from_json(const nlohmann::json& j) {
  SdpProblem p;
  if (j.value("format", "") != "sdp.v1") throw Error("expected an sdp.v1 document");
  p.blocks = j.at("blocks").get<std::vector<std::size_t>>();
  p.nonneg = j.value("nonneg", std::size_t{0});
  p.free = j.value("free", std::size_t{0});
  auto row = [](const nlohmann::json& a) {
    SparseRow r;
    for (const auto& e : a) r.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<double>());
    return r;
  };
  p.objective = row(j.at("objective"));
  for (const auto& c : j.at("constraints")) {
    SdpConstraint sc;
    sc.coeffs = row(c.at("coeffs"));
    sc.rhs = c.at("rhs").get<double>();
    sc.rel = c.at("rel").get<std::string>() == "=" ? Relation::Equal : Relation::LessEqual;
    p.constraints.push_back(std::move(sc));
  }
  p.validate();
  return p;
}

}  // namespace qirt
