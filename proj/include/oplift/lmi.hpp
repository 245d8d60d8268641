#pragma once

// Hermitian front-end for the SDP engine.
//
// A Program has Hermitian matrix variables, linear Hermitian equality
// constraints and affine Hermitian PSD constraints. Constraint maps are
// plain callables; their coefficients are discovered by probing with the
// canonical basis of each variable space. Equalities are eliminated by a
// nullspace parametrization, after which the problem
//
//     maximize lambda  s.t.  F_b(vars) - lambda*I >= 0  (shifted blocks)
//                            F_b(vars) >= 0             (other blocks)
//
// is handed to sdp::solve with every block realified.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "oplift/matrix_kernel.hpp"
#include "oplift/sdp.hpp"

namespace oplift::lmi {

using Vars = std::vector<HermMatrix>;
using HermExpr = std::function<HermMatrix(const Vars&)>;

struct Program {
  std::vector<int> var_sizes;

  struct Equality {
    HermExpr lhs;  // linear
    HermMatrix rhs;
  };
  struct Psd {
    HermExpr expr;  // affine
    bool shifted = true;
  };
  std::vector<Equality> equalities;
  std::vector<Psd> psd;

  int add_var(int size) {
    var_sizes.push_back(size);
    return static_cast<int>(var_sizes.size()) - 1;
  }
  void add_equality(HermExpr lhs, HermMatrix rhs) { equalities.push_back({std::move(lhs), std::move(rhs)}); }
  void add_psd(HermExpr expr, bool shifted = true) { psd.push_back({std::move(expr), shifted}); }

  int num_params() const {
    int p = 0;
    for (int s : var_sizes) p += s * s;
    return p;
  }

  Vars unpack(const RVec& w) const {
    Vars v;
    int off = 0;
    for (int s : var_sizes) {
      v.push_back(herm_from_coords(s, w.segment(off, s * s)));
      off += s * s;
    }
    return v;
  }
};

struct Options {
  std::optional<double> cap;  // upper bound on lambda; keeps the problem bounded
  double rank_tol = 1e-10;
  sdp::Options solver;
};

struct Result {
  sdp::Status solver_status = sdp::Status::Inconclusive;
  bool equalities_consistent = true;
  double equality_residual = 0.0;
  bool lambda_unbounded = false;  // lambda could be made arbitrarily large
  double lambda = -std::numeric_limits<double>::infinity();
  Vars values;
  // Dual PSD matrices W_b, one per PSD block, with
  // sum_b 2 tr(W_b) [shifted blocks] + cap_weight = 1.
  std::vector<HermMatrix> duals;
  double cap_weight = 0.0;
  // Equality multipliers M_q: for every assignment of the variables,
  //   sum_b 2 Re tr(W_b (F_b(v) - F_b(0))) = sum_q tr(M_q (lhs_q(v) - lhs_q(0))).
  std::vector<HermMatrix> multipliers;
  double multiplier_residual = 0.0;
  int iterations = 0;
  std::string message;

  bool solved() const {
    return solver_status == sdp::Status::Optimal || solver_status == sdp::Status::Feasible;
  }
};

namespace detail {

inline Result solve_reduced(const Program& prog, const RVec& w0, const RMat& basis,
                            const std::vector<HermMatrix>& f0, const std::vector<std::vector<HermMatrix>>& dirs,
                            const Options& opt) {
  const int nblk = static_cast<int>(prog.psd.size());
  const int k = static_cast<int>(basis.cols());
  sdp::Problem p;
  for (int b = 0; b < nblk; ++b) {
    p.add_block(2 * f0[b].dim());
    p.c[b] = realify(f0[b]);
  }
  int cap_blk = -1;
  if (opt.cap) {
    cap_blk = p.add_block(1);
    p.c[cap_blk](0, 0) = *opt.cap;
  }
  for (int j = 0; j < k; ++j) {
    const int r = p.add_constraint(0.0);
    for (int b = 0; b < nblk; ++b) {
      if (dirs[b][j].norm() == 0.0) continue;
      p.a[r][b] = -realify(dirs[b][j]);
    }
  }
  const int rl = p.add_constraint(1.0);
  for (int b = 0; b < nblk; ++b)
    if (prog.psd[b].shifted) p.a[rl][b] = RMat::Identity(2 * f0[b].dim(), 2 * f0[b].dim());
  if (cap_blk >= 0) p.a[rl][cap_blk] = RMat::Constant(1, 1, 1.0);

  const sdp::Solution sol = sdp::solve(p, opt.solver);
  Result res;
  res.solver_status = sol.status;
  res.iterations = sol.iterations;
  res.message = sol.message;
  if (sol.status == sdp::Status::Infeasible) {
    res.lambda_unbounded = true;
    res.lambda = std::numeric_limits<double>::infinity();
    return res;
  }
  if (!(sol.status == sdp::Status::Optimal || sol.status == sdp::Status::Feasible)) return res;
  res.lambda = sol.y(k);
  const RVec w = w0 + basis * sol.y.head(k);
  res.values = prog.unpack(w);
  for (int b = 0; b < nblk; ++b) res.duals.push_back(derealify(sol.x[b]));
  if (cap_blk >= 0) res.cap_weight = sol.x[cap_blk](0, 0);
  return res;
}

}  // namespace detail

inline Result maximize_min_eig(const Program& prog, const Options& opt = {}) {
  if (prog.psd.empty()) throw InputError("lmi: program has no PSD constraints");
  const int np = prog.num_params();

  // Zero and unit probes.
  const Vars zero = prog.unpack(RVec::Zero(np));
  auto unit = [&](int idx) {
    RVec w = RVec::Zero(np);
    w(idx) = 1.0;
    return prog.unpack(w);
  };

  // Equalities E w = e.
  int nrows = 0;
  for (const auto& eq : prog.equalities) nrows += eq.rhs.dim() * eq.rhs.dim();
  RMat e_mat(nrows, np);
  RVec e_rhs(nrows);
  std::vector<RVec> eq_const;
  {
    int off = 0;
    for (const auto& eq : prog.equalities) {
      const int d = eq.rhs.dim();
      eq_const.push_back(herm_coords(eq.lhs(zero)));
      e_rhs.segment(off, d * d) = herm_coords(eq.rhs) - eq_const.back();
      off += d * d;
    }
    for (int j = 0; j < np; ++j) {
      const Vars u = unit(j);
      int o = 0;
      for (std::size_t q = 0; q < prog.equalities.size(); ++q) {
        const auto& eq = prog.equalities[q];
        const int d = eq.rhs.dim();
        const HermMatrix v = eq.lhs(u);
        if (v.dim() != d) throw ShapeError("lmi: equality lhs/rhs size mismatch");
        e_mat.block(o, j, d * d, 1) = herm_coords(v) - eq_const[q];
        o += d * d;
      }
    }
  }

  RVec w0 = RVec::Zero(np);
  RMat basis;
  Result early;
  if (nrows > 0) {
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(e_mat);
    cod.setThreshold(opt.rank_tol);
    w0 = cod.solve(e_rhs);
    const double resid = (e_mat * w0 - e_rhs).norm();
    early.equality_residual = resid;
    if (resid > 1e-9 * (1.0 + e_rhs.norm())) {
      early.equalities_consistent = false;
      early.solver_status = sdp::Status::Infeasible;
      early.message = "linear equality constraints are inconsistent";
      return early;
    }
    Eigen::ColPivHouseholderQR<RMat> qr(e_mat.transpose());
    qr.setThreshold(opt.rank_tol);
    const int rank = static_cast<int>(qr.rank());
    const RMat q = qr.householderQ();
    basis = q.rightCols(np - rank);
  } else {
    basis = RMat::Identity(np, np);
  }

  // PSD blocks: constant parts at w0 and directions along the nullspace basis.
  const int nblk = static_cast<int>(prog.psd.size());
  std::vector<HermMatrix> f0(nblk), c_zero(nblk);
  const Vars at_w0 = prog.unpack(w0);
  for (int b = 0; b < nblk; ++b) {
    f0[b] = prog.psd[b].expr(at_w0);
    c_zero[b] = prog.psd[b].expr(zero);
  }
  int kdir = static_cast<int>(basis.cols());
  std::vector<std::vector<HermMatrix>> dirs(nblk, std::vector<HermMatrix>(kdir));
  for (int j = 0; j < kdir; ++j) {
    const Vars v = prog.unpack(basis.col(j));
    for (int b = 0; b < nblk; ++b) dirs[b][j] = prog.psd[b].expr(v) - c_zero[b];
  }

  // Drop directions invisible to every PSD block.
  if (kdir > 0) {
    int rows = 0;
    for (int b = 0; b < nblk; ++b) rows += f0[b].dim() * f0[b].dim();
    RMat g(rows, kdir);
    for (int j = 0; j < kdir; ++j) {
      int o = 0;
      for (int b = 0; b < nblk; ++b) {
        const int d = f0[b].dim();
        g.block(o, j, d * d, 1) = herm_coords(dirs[b][j]);
        o += d * d;
      }
    }
    const RMat gram = g.transpose() * g;
    Eigen::SelfAdjointEigenSolver<RMat> es(gram);
    const RVec& ev = es.eigenvalues();
    const double top = ev.size() ? ev.maxCoeff() : 0.0;
    if (ev.size() && ev.minCoeff() <= opt.rank_tol * std::max(top, 1.0)) {
      std::vector<int> keep;
      for (int j = 0; j < ev.size(); ++j)
        if (ev(j) > opt.rank_tol * std::max(top, 1.0)) keep.push_back(j);
      RMat v(kdir, static_cast<int>(keep.size()));
      for (std::size_t j = 0; j < keep.size(); ++j) v.col(static_cast<int>(j)) = es.eigenvectors().col(keep[j]);
      std::vector<std::vector<HermMatrix>> nd(nblk, std::vector<HermMatrix>(keep.size()));
      for (int b = 0; b < nblk; ++b) {
        for (std::size_t j = 0; j < keep.size(); ++j) {
          CMat acc = CMat::Zero(f0[b].dim(), f0[b].dim());
          for (int i = 0; i < kdir; ++i) acc += v(i, static_cast<int>(j)) * dirs[b][i].mat();
          nd[b][j] = HermMatrix::from_trusted(acc);
        }
      }
      dirs = std::move(nd);
      basis = basis * v;
      kdir = static_cast<int>(keep.size());
    }
  }

  auto attach_multipliers = [&](Result& r) {
    if (!r.solved() || nrows == 0) return;
    RVec g(np);
    for (int j = 0; j < np; ++j) {
      const Vars u = unit(j);
      double acc = 0.0;
      for (int b = 0; b < nblk; ++b) acc += 2.0 * (prog.psd[b].expr(u) - c_zero[b]).inner(r.duals[b]);
      g(j) = acc;
    }
    const RMat et = e_mat.transpose();
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(et);
    cod.setThreshold(opt.rank_tol);
    const RVec mu = cod.solve(g);
    r.multiplier_residual = (et * mu - g).norm();
    int off = 0;
    for (const auto& eq : prog.equalities) {
      const int d = eq.rhs.dim();
      r.multipliers.push_back(herm_from_coords(d, mu.segment(off, d * d)));
      off += d * d;
    }
  };

  Result res = detail::solve_reduced(prog, w0, basis, f0, dirs, opt);
  res.equality_residual = early.equality_residual;
  if (res.lambda_unbounded && !opt.cap) {
    Options capped = opt;
    capped.cap = 1.0;
    Result again = detail::solve_reduced(prog, w0, basis, f0, dirs, capped);
    again.lambda_unbounded = true;
    again.equality_residual = early.equality_residual;
    again.message = "lambda unbounded; point taken from problem capped at 1";
    attach_multipliers(again);
    return again;
  }
  attach_multipliers(res);
  return res;
}

}  // namespace oplift::lmi
