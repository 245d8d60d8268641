#pragma once

// Small dense semidefinite programming engine.
//
// Standard form (block-diagonal, real symmetric blocks):
//   primal:  minimize <C, X>   s.t. <A_i, X> = b_i,  X >= 0
//   dual:    maximize b'y      s.t. S = C - sum_i y_i A_i >= 0
//
// Solved by a primal-dual interior point method on the homogeneous
// self-dual embedding with HKM search directions and Mehrotra
// predictor-corrector steps. Infeasibility is reported only together with
// a ray that has been re-verified by direct arithmetic.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "oplift/errors.hpp"
#include "oplift/matrix_kernel.hpp"

namespace oplift::sdp {

enum class Status {
  Optimal,       // primal-dual optimal pair found
  Feasible,      // optimal for a pure feasibility problem (C = 0)
  Infeasible,    // primal infeasible; ray_y certifies it
  Unbounded,     // dual infeasible; ray_x certifies it
  Inconclusive,  // iteration cap, stall or numerical breakdown
};

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Feasible: return "feasible";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Problem {
  std::vector<int> block_sizes;
  std::vector<RMat> c;               // c[blk]
  std::vector<std::vector<RMat>> a;  // a[i][blk]; an empty matrix means zero
  RVec b;

  int num_constraints() const { return static_cast<int>(a.size()); }
  int num_blocks() const { return static_cast<int>(block_sizes.size()); }

  /// Adds a constraint row with all blocks zero; returns its index.
  int add_constraint(double rhs) {
    a.emplace_back(block_sizes.size());
    b.conservativeResize(b.size() + 1);
    b(b.size() - 1) = rhs;
    return num_constraints() - 1;
  }

  int add_block(int size) {
    block_sizes.push_back(size);
    c.push_back(RMat::Zero(size, size));
    for (auto& row : a) row.emplace_back();
    return num_blocks() - 1;
  }

  void validate() const {
    if (block_sizes.empty()) throw InputError("sdp: problem has no blocks");
    if (c.size() != block_sizes.size()) throw ShapeError("sdp: C block count mismatch");
    if (static_cast<Eigen::Index>(a.size()) != b.size()) throw ShapeError("sdp: b length mismatch");
    for (std::size_t k = 0; k < block_sizes.size(); ++k) {
      const int n = block_sizes[k];
      if (n <= 0) throw InputError("sdp: block size must be positive");
      if (c[k].rows() != n || c[k].cols() != n) throw ShapeError("sdp: C block shape mismatch");
      if (!c[k].allFinite()) throw InputError("sdp: non-finite C entry");
    }
    for (const auto& row : a) {
      if (row.size() != block_sizes.size()) throw ShapeError("sdp: A row block count mismatch");
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k].size() == 0) continue;
        if (row[k].rows() != block_sizes[k] || row[k].cols() != block_sizes[k])
          throw ShapeError("sdp: A block shape mismatch");
        if (!row[k].allFinite()) throw InputError("sdp: non-finite A entry");
      }
    }
    if (!b.allFinite()) throw InputError("sdp: non-finite b entry");
  }
};

struct Options {
  int max_iter = 200;
  double tol_feas = 1e-10;   // relative residual target
  double tol_gap = 1e-10;    // relative gap target
  double tol_infeas = 1e-9;  // ray residual target
  double step_fraction = 0.95;
  // Acceptance thresholds used when the iteration ends without hitting targets.
  double accept_feas = 1e-8;
  double accept_gap = 1e-7;
};

struct Solution {
  Status status = Status::Inconclusive;
  std::vector<RMat> x;  // primal blocks
  RVec y;
  std::vector<RMat> s;  // dual slack blocks
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double rel_gap = 0.0;
  double primal_res = 0.0;  // ||A(X) - b|| / (1 + ||b||)
  double dual_res = 0.0;    // ||C - A*(y) - S|| / (1 + ||C||)
  // Infeasible: b'ray_y (= 1 after normalization) less the ray residual;
  // Unbounded: -<C, ray_x> less residual; otherwise min eigenvalue of X and S.
  double margin = 0.0;
  RVec ray_y;
  std::vector<RMat> ray_x;
  int iterations = 0;
  std::string message;
};

namespace detail {

inline double sym_min_eig(const RMat& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline RMat sym(const RMat& m) { return (m + m.transpose()) * 0.5; }

// Per-block constraint data in vectorized form.
struct BlockData {
  int n = 0;
  std::vector<int> active;  // constraint indices touching this block
  RMat avec;                // n^2 x |active|, column j = vec(A_active[j])
  RMat c;
};

// Largest step keeping x + alpha*dx PSD (infinity if unconstrained).
inline double max_step(const RMat& x, const RMat& dx) {
  if (x.rows() == 1) return dx(0, 0) < 0 ? -x(0, 0) / dx(0, 0) : std::numeric_limits<double>::infinity();
  Eigen::LLT<RMat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  RMat l_inv_dx = llt.matrixL().solve(dx);
  RMat w = llt.matrixL().solve(l_inv_dx.transpose());
  const double lmin = sym_min_eig(sym(w));
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Residual and eigenvalue re-check of a primal-dual point, computed
/// directly from the problem data.
struct Recheck {
  double primal_res = 0.0;
  double min_eig_x = 0.0;
  double min_eig_s = 0.0;
  double rel_gap = 0.0;
};

inline Recheck recheck(const Problem& p, const std::vector<RMat>& x, const RVec& y) {
  Recheck r;
  RVec ax = RVec::Zero(p.num_constraints());
  double cx = 0.0;
  r.min_eig_x = std::numeric_limits<double>::infinity();
  r.min_eig_s = std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.num_blocks(); ++k) {
    RMat s = p.c[k];
    for (int i = 0; i < p.num_constraints(); ++i) {
      if (p.a[i][k].size() == 0) continue;
      ax(i) += (p.a[i][k].cwiseProduct(x[k])).sum();
      s -= y(i) * p.a[i][k];
    }
    cx += (p.c[k].cwiseProduct(x[k])).sum();
    r.min_eig_x = std::min(r.min_eig_x, detail::sym_min_eig(detail::sym(x[k])));
    r.min_eig_s = std::min(r.min_eig_s, detail::sym_min_eig(detail::sym(s)));
  }
  r.primal_res = (ax - p.b).norm() / (1.0 + p.b.norm());
  const double by = p.b.dot(y);
  r.rel_gap = std::abs(cx - by) / (1.0 + std::abs(cx) + std::abs(by));
  return r;
}

/// Farkas check for primal infeasibility: -A*(y) >= 0 and b'y > 0.
/// Returns b'y / (1 + ||y||) minus the PSD violation of -A*(y), scaled the same way.
/// Positive means certified.
inline double verify_infeasibility_ray(const Problem& p, const RVec& y) {
  if (y.size() != p.num_constraints()) throw ShapeError("sdp: ray length mismatch");
  double viol = 0.0;
  for (int k = 0; k < p.num_blocks(); ++k) {
    RMat m = RMat::Zero(p.block_sizes[k], p.block_sizes[k]);
    for (int i = 0; i < p.num_constraints(); ++i)
      if (p.a[i][k].size() != 0) m -= y(i) * p.a[i][k];
    viol += std::max(0.0, -detail::sym_min_eig(detail::sym(m))) * p.block_sizes[k];
  }
  return (p.b.dot(y) - viol) / (1.0 + y.norm());
}

/// Check for dual infeasibility: X >= 0, A(X) = 0, <C, X> < 0.
/// Returns -<C,X>/(1+||X||) minus residual terms; positive means certified.
inline double verify_unbounded_ray(const Problem& p, const std::vector<RMat>& x) {
  RVec ax = RVec::Zero(p.num_constraints());
  double cx = 0.0, xnorm2 = 0.0, viol = 0.0;
  for (int k = 0; k < p.num_blocks(); ++k) {
    for (int i = 0; i < p.num_constraints(); ++i)
      if (p.a[i][k].size() != 0) ax(i) += (p.a[i][k].cwiseProduct(x[k])).sum();
    cx += (p.c[k].cwiseProduct(x[k])).sum();
    xnorm2 += x[k].squaredNorm();
    viol += std::max(0.0, -detail::sym_min_eig(detail::sym(x[k]))) * p.block_sizes[k];
  }
  // Residual A(X) can be absorbed only if it is tiny; charge it against the margin.
  return (-cx - viol - 1e3 * ax.norm()) / (1.0 + std::sqrt(xnorm2));
}

inline Solution solve(const Problem& prob, const Options& opt = {}) {
  prob.validate();
  const int m = prob.num_constraints();
  const int nb = prob.num_blocks();

  // Row scaling: each constraint normalized to unit Frobenius norm.
  RVec row_scale = RVec::Ones(m);
  std::vector<bool> zero_row(m, false);
  for (int i = 0; i < m; ++i) {
    double nrm2 = 0.0;
    for (int k = 0; k < nb; ++k)
      if (prob.a[i][k].size() != 0) nrm2 += prob.a[i][k].squaredNorm();
    if (nrm2 == 0.0) {
      zero_row[i] = true;
    } else {
      row_scale(i) = 1.0 / std::sqrt(nrm2);
    }
  }

  Solution sol;
  for (int i = 0; i < m; ++i) {
    if (zero_row[i] && prob.b(i) != 0.0) {
      // 0 = b_i with b_i != 0: ray y = e_i * sign(b_i).
      sol.status = Status::Infeasible;
      sol.ray_y = RVec::Zero(m);
      sol.ray_y(i) = prob.b(i) > 0 ? 1.0 / prob.b(i) : 1.0 / prob.b(i);
      sol.margin = verify_infeasibility_ray(prob, sol.ray_y);
      sol.message = "zero constraint row with nonzero right-hand side";
      return sol;
    }
  }

  RVec b = prob.b.cwiseProduct(row_scale);
  for (int i = 0; i < m; ++i)
    if (zero_row[i]) b(i) = 0.0;

  std::vector<detail::BlockData> blocks(nb);
  int ntot = 0;
  double cnorm = 0.0;
  for (int k = 0; k < nb; ++k) {
    auto& bd = blocks[k];
    bd.n = prob.block_sizes[k];
    bd.c = detail::sym(prob.c[k]);
    cnorm += bd.c.squaredNorm();
    ntot += bd.n;
    for (int i = 0; i < m; ++i)
      if (prob.a[i][k].size() != 0 && !zero_row[i] && prob.a[i][k].squaredNorm() > 0) bd.active.push_back(i);
    bd.avec.resize(static_cast<Eigen::Index>(bd.n) * bd.n, static_cast<Eigen::Index>(bd.active.size()));
    for (std::size_t j = 0; j < bd.active.size(); ++j) {
      const int i = bd.active[j];
      RMat ai = detail::sym(prob.a[i][k]) * row_scale(i);
      bd.avec.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const RVec>(ai.data(), ai.size());
    }
  }
  cnorm = std::sqrt(cnorm);
  const double bnorm = b.norm();

  auto apply_a = [&](const std::vector<RMat>& z) {
    RVec out = RVec::Zero(m);
    for (int k = 0; k < nb; ++k) {
      const auto& bd = blocks[k];
      if (bd.active.empty()) continue;
      RVec v = bd.avec.transpose() * Eigen::Map<const RVec>(z[k].data(), z[k].size());
      for (std::size_t j = 0; j < bd.active.size(); ++j) out(bd.active[j]) += v(static_cast<Eigen::Index>(j));
    }
    return out;
  };
  auto apply_at = [&](const RVec& yv) {
    std::vector<RMat> out(nb);
    for (int k = 0; k < nb; ++k) {
      const auto& bd = blocks[k];
      out[k] = RMat::Zero(bd.n, bd.n);
      if (bd.active.empty()) continue;
      RVec ysub(static_cast<Eigen::Index>(bd.active.size()));
      for (std::size_t j = 0; j < bd.active.size(); ++j) ysub(static_cast<Eigen::Index>(j)) = yv(bd.active[j]);
      RVec v = bd.avec * ysub;
      out[k] = Eigen::Map<RMat>(v.data(), bd.n, bd.n);
    }
    return out;
  };
  auto inner = [](const std::vector<RMat>& u, const std::vector<RMat>& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += (u[k].cwiseProduct(v[k])).sum();
    return s;
  };
  auto cinner = [&](const std::vector<RMat>& v) {
    double s = 0.0;
    for (int k = 0; k < nb; ++k) s += (blocks[k].c.cwiseProduct(v[k])).sum();
    return s;
  };

  std::vector<RMat> x(nb), s(nb);
  for (int k = 0; k < nb; ++k) {
    x[k] = RMat::Identity(blocks[k].n, blocks[k].n);
    s[k] = RMat::Identity(blocks[k].n, blocks[k].n);
  }
  RVec y = RVec::Zero(m);
  double tau = 1.0, kappa = 1.0;

  Status status = Status::Inconclusive;
  std::string message = "iteration limit reached";
  int it = 0;
  double last_pinf = 0, last_dinf = 0, last_gap = 0;

  for (; it < opt.max_iter; ++it) {
    const RVec ax = apply_a(x);
    const std::vector<RMat> aty = apply_at(y);
    const RVec rp = ax - b * tau;
    std::vector<RMat> rd(nb);
    double rd_norm2 = 0.0, aty_s_norm2 = 0.0;
    for (int k = 0; k < nb; ++k) {
      rd[k] = aty[k] + s[k] - blocks[k].c * tau;
      rd_norm2 += rd[k].squaredNorm();
      aty_s_norm2 += (aty[k] + s[k]).squaredNorm();
    }
    const double cx = cinner(x);
    const double by = b.dot(y);
    const double rg = cx - by + kappa;
    const double mu = (inner(x, s) + tau * kappa) / (ntot + 1);

    // Termination tests.
    const double pinf = (ax / tau - b).norm() / (1.0 + bnorm);
    const double dinf = std::sqrt(rd_norm2) / tau / (1.0 + cnorm);
    const double pobj = cx / tau, dobj = by / tau;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    last_pinf = pinf;
    last_dinf = dinf;
    last_gap = gap;
    if (pinf <= opt.tol_feas && dinf <= opt.tol_feas && gap <= opt.tol_gap) {
      status = Status::Optimal;
      message = "converged";
      break;
    }
    if (by > 0 && std::sqrt(aty_s_norm2) / by <= opt.tol_infeas) {
      status = Status::Infeasible;
      message = "primal infeasibility ray found";
      break;
    }
    if (cx < 0 && ax.norm() / (-cx) <= opt.tol_infeas) {
      status = Status::Unbounded;
      message = "dual infeasibility ray found";
      break;
    }

    // Factorizations.
    std::vector<RMat> sinv(nb);
    bool ok = true;
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<RMat> llt(s[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      sinv[k] = llt.solve(RMat::Identity(blocks[k].n, blocks[k].n));
      sinv[k] = detail::sym(sinv[k]);
    }
    if (!ok) {
      message = "slack matrix lost definiteness";
      break;
    }

    RMat mm = RMat::Zero(m, m);
    RVec g = RVec::Zero(m);
    double c0 = 0.0;
    for (int k = 0; k < nb; ++k) {
      const auto& bd = blocks[k];
      const RMat xcs = x[k] * bd.c * sinv[k];
      c0 += (bd.c.cwiseProduct(xcs)).sum();
      if (bd.active.empty()) continue;
      const Eigen::Index na = static_cast<Eigen::Index>(bd.active.size());
      RMat gvec(static_cast<Eigen::Index>(bd.n) * bd.n, na);
      for (Eigen::Index j = 0; j < na; ++j) {
        Eigen::Map<const RMat> aj(bd.avec.col(j).data(), bd.n, bd.n);
        RMat gj = x[k] * aj * sinv[k];
        gvec.col(j) = Eigen::Map<const RVec>(gj.data(), gj.size());
      }
      const RMat mk = bd.avec.transpose() * gvec;
      const RVec gk = bd.avec.transpose() * Eigen::Map<const RVec>(xcs.data(), xcs.size());
      for (Eigen::Index p = 0; p < na; ++p) {
        g(bd.active[p]) += gk(p);
        for (Eigen::Index q = 0; q < na; ++q) mm(bd.active[p], bd.active[q]) += mk(p, q);
      }
    }
    mm = detail::sym(mm);
    const double diag_max = m > 0 ? mm.diagonal().cwiseAbs().maxCoeff() : 1.0;
    for (int i = 0; i < m; ++i) mm(i, i) += 1e-14 * diag_max + (zero_row[i] ? 1.0 : 0.0);
    Eigen::LDLT<RMat> mfac(mm);
    if (mfac.info() != Eigen::Success) {
      message = "Schur complement factorization failed";
      break;
    }

    struct Dir {
      std::vector<RMat> dx, ds;
      RVec dy;
      double dtau = 0, dkappa = 0;
    };
    const RVec gpb = g + b;
    const RVec gmb = g - b;
    const RVec v = m > 0 ? RVec(mfac.solve(gpb)) : RVec();
    const double gmb_v = m > 0 ? gmb.dot(v) : 0.0;

    auto direction = [&](double sigma, double eta, const std::vector<RMat>* corr, double corr_tk) {
      Dir d;
      std::vector<RMat> rc(nb), xrs(nb);
      for (int k = 0; k < nb; ++k) {
        rc[k] = sigma * mu * sinv[k] - x[k];
        if (corr) rc[k] -= (*corr)[k];
        xrs[k] = x[k] * rd[k] * sinv[k];
      }
      const RVec r1 = -eta * rp - apply_a(rc) - eta * apply_a(xrs);
      const double rk = (sigma * mu - tau * kappa - corr_tk) / tau;
      const double r2 = -eta * rg - cinner(rc) - eta * cinner(xrs) - rk;
      const RVec u = m > 0 ? RVec(mfac.solve(r1)) : RVec();
      const double denom = gmb_v - c0 - kappa / tau;
      d.dtau = (r2 - (m > 0 ? gmb.dot(u) : 0.0)) / denom;
      d.dy = m > 0 ? RVec(u + v * d.dtau) : RVec();
      const std::vector<RMat> atdy = apply_at(d.dy);
      d.ds.resize(nb);
      d.dx.resize(nb);
      for (int k = 0; k < nb; ++k) {
        d.ds[k] = detail::sym(-eta * rd[k] - atdy[k] + blocks[k].c * d.dtau);
        d.dx[k] = detail::sym(rc[k] - detail::sym(x[k] * d.ds[k] * sinv[k]));
      }
      d.dkappa = rk - (kappa / tau) * d.dtau;
      return d;
    };
    auto step_len = [&](const Dir& d) {
      double a = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k) {
        a = std::min(a, detail::max_step(x[k], d.dx[k]));
        a = std::min(a, detail::max_step(s[k], d.ds[k]));
      }
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Dir aff = direction(0.0, 1.0, nullptr, 0.0);
    const double a_aff = std::min(1.0, step_len(aff));
    double mu_aff = (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa);
    for (int k = 0; k < nb; ++k)
      mu_aff += ((x[k] + a_aff * aff.dx[k]).cwiseProduct(s[k] + a_aff * aff.ds[k])).sum();
    mu_aff /= (ntot + 1);
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    std::vector<RMat> corr(nb);
    for (int k = 0; k < nb; ++k) corr[k] = detail::sym(aff.dx[k] * aff.ds[k] * sinv[k]);
    const Dir d = direction(sigma, 1.0 - sigma, &corr, aff.dtau * aff.dkappa);
    const double a_max = step_len(d);
    const double alpha = std::min(1.0, opt.step_fraction * a_max);
    if (!(alpha > 1e-12)) {
      message = "step length collapsed";
      break;
    }
    for (int k = 0; k < nb; ++k) {
      x[k] = detail::sym(x[k] + alpha * d.dx[k]);
      s[k] = detail::sym(s[k] + alpha * d.ds[k]);
    }
    if (m > 0) y += alpha * d.dy;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
    if (!(tau > 0) || !(kappa > 0) || !y.allFinite()) {
      message = "numerical breakdown";
      break;
    }
  }

  sol.iterations = it;
  sol.message = message;

  auto unscale_y = [&](const RVec& yy) {
    RVec out = yy.cwiseProduct(row_scale);
    for (int i = 0; i < m; ++i)
      if (zero_row[i]) out(i) = 0.0;
    return out;
  };

  if (status == Status::Inconclusive && tau > 0 && last_pinf <= opt.accept_feas && last_dinf <= opt.accept_feas &&
      last_gap <= opt.accept_gap) {
    status = Status::Optimal;
    sol.message += "; accepted at relaxed tolerance";
  }

  if (status == Status::Optimal) {
    sol.x.resize(nb);
    for (int k = 0; k < nb; ++k) sol.x[k] = x[k] / tau;
    sol.y = unscale_y(y / tau);
    sol.s.resize(nb);
    for (int k = 0; k < nb; ++k) {
      sol.s[k] = detail::sym(prob.c[k]);
      for (int i = 0; i < m; ++i)
        if (prob.a[i][k].size() != 0) sol.s[k] -= sol.y(i) * prob.a[i][k];
    }
    const Recheck rc = recheck(prob, sol.x, sol.y);
    sol.primal_res = rc.primal_res;
    sol.dual_res = last_dinf;
    sol.rel_gap = rc.rel_gap;
    sol.primal_obj = 0.0;
    for (int k = 0; k < nb; ++k) sol.primal_obj += (prob.c[k].cwiseProduct(sol.x[k])).sum();
    sol.dual_obj = prob.b.dot(sol.y);
    sol.margin = std::min(rc.min_eig_x, rc.min_eig_s);
    const bool pure_feas = cnorm == 0.0;
    if (rc.primal_res > opt.accept_feas || rc.min_eig_x < -opt.accept_feas ||
        rc.min_eig_s < -1e-8 * (1.0 + cnorm)) {
      // Independent re-check disagrees with the loop's verdict.
      sol.status = Status::Inconclusive;
      sol.message = "re-check failed after convergence";
    } else {
      sol.status = pure_feas ? Status::Feasible : Status::Optimal;
    }
    return sol;
  }
  if (status == Status::Infeasible) {
    RVec ray = unscale_y(y);
    const double by = prob.b.dot(ray);
    sol.ray_y = ray / by;
    sol.margin = verify_infeasibility_ray(prob, sol.ray_y);
    sol.status = sol.margin > 0 ? Status::Infeasible : Status::Inconclusive;
    if (sol.margin <= 0) sol.message = "infeasibility ray failed re-verification";
    return sol;
  }
  if (status == Status::Unbounded) {
    double cx = 0.0;
    for (int k = 0; k < nb; ++k) cx += (prob.c[k].cwiseProduct(x[k])).sum();
    sol.ray_x.resize(nb);
    for (int k = 0; k < nb; ++k) sol.ray_x[k] = x[k] / (-cx);
    sol.margin = verify_unbounded_ray(prob, sol.ray_x);
    sol.status = sol.margin > 0 ? Status::Unbounded : Status::Inconclusive;
    if (sol.margin <= 0) sol.message = "unboundedness ray failed re-verification";
    return sol;
  }
  sol.status = Status::Inconclusive;
  sol.primal_res = last_pinf;
  sol.dual_res = last_dinf;
  sol.rel_gap = last_gap;
  return sol;
}

/// Linear program path: every block must be 1x1.
inline Solution lp_solve(const Problem& prob, const Options& opt = {}) {
  for (int n : prob.block_sizes)
    if (n != 1) throw InputError("lp_solve: all blocks must be 1x1");
  return solve(prob, opt);
}

/// SDPA sparse format dump for cross-checking with external solvers.
/// Mapping: SDPA c = b, F0 = -C, F_i = A_i.
inline void write_sdpa(std::ostream& os, const Problem& p) {
  os.precision(17);
  os << p.num_constraints() << "\n" << p.num_blocks() << "\n";
  for (int n : p.block_sizes) os << n << " ";
  os << "\n";
  for (int i = 0; i < p.num_constraints(); ++i) os << p.b(i) << " ";
  os << "\n";
  auto dump = [&](int mat, int blk, const RMat& m, double sign) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = i; j < m.cols(); ++j)
        if (m(i, j) != 0.0) os << mat << " " << blk + 1 << " " << i + 1 << " " << j + 1 << " " << sign * m(i, j) << "\n";
  };
  for (int k = 0; k < p.num_blocks(); ++k) dump(0, k, p.c[k], -1.0);
  for (int i = 0; i < p.num_constraints(); ++i)
    for (int k = 0; k < p.num_blocks(); ++k)
      if (p.a[i][k].size() != 0) dump(i + 1, k, p.a[i][k], 1.0);
}

}  // namespace oplift::sdp
