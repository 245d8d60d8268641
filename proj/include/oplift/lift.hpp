#pragma once

// Lifts from factorizations, factorizations from proper lifts, realizations
// from linear factorizations, and the simplex / polyhedral constructions.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "oplift/cones.hpp"
#include "oplift/cpmaps.hpp"
#include "oplift/errors.hpp"
#include "oplift/opsys.hpp"
#include "oplift/slack.hpp"

namespace oplift {

struct LiftData {
  RMat z_basis;  // columns span Z inside R^n (+) R^k
  LinearMap pi;
  LinearMap gamma;
  SystemPtr target;
  int stable_level = 1;               // smallest dual level at which Z already had its final dimension
  std::vector<int> dim_by_level;      // dim Z using dual generators up to level t

  int zdim() const { return static_cast<int>(z_basis.cols()); }
  SystemPtr system() const { return OperatorSystem::lifted(pi, gamma, target); }
};

namespace detail {

// Orthonormal basis of ker(m), relative rank threshold.
inline RMat nullspace(const RMat& m, double rel = 1e-9) {
  const int cols = static_cast<int>(m.cols());
  if (m.rows() == 0) return RMat::Identity(cols, cols);
  Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeFullV);
  const RVec sv = svd.singularValues();
  const double thresh = rel * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

inline int rank_of(const RMat& m, double rel = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<RMat> svd(m);
  const RVec sv = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel * std::max(1.0, sv(0))) ++r;
  return r;
}

// Rows of (x, y) -> phi(x) - beta(phi)(y) in herm_coords.
inline RMat slack_rows(const CPMap& phi, const TargetMap& beta, int n, int k) {
  const int t = phi.t();
  RMat rows(t * t, n + k);
  for (int i = 0; i < n; ++i) rows.col(i) = herm_coords(phi.coordinate_values()[i]);
  for (int j = 0; j < k; ++j) rows.col(n + j) = -herm_coords(beta[j]);
  return rows;
}

// Level-1 description of the target as a pencil y -> sum_j y_j B_j; minimal
// targets use the diagonal of their facet functionals.
inline std::vector<HermMatrix> level1_pencil(const OperatorSystem& target) {
  if (auto p = as_pencil(target)) return *p;
  if (const auto* ms = std::get_if<MinimalSystem>(&target.variant())) {
    const auto dd = dual_generators(ms->cone);
    std::vector<HermMatrix> out;
    for (int j = 0; j < ms->cone.dim(); ++j) {
      std::vector<double> diag;
      for (const auto& l : dd.facets) diag.push_back(l(j));
      out.push_back(HermMatrix::diag(diag));
    }
    return out;
  }
  throw CapabilityError("target must be a free spectrahedron, an inverse image of one, or minimal");
}

inline std::vector<HermMatrix> compose_pencil(const std::vector<HermMatrix>& b, const RMat& gamma) {
  const int d = b[0].dim();
  std::vector<HermMatrix> g;
  for (Eigen::Index k = 0; k < gamma.cols(); ++k) {
    CMat acc = CMat::Zero(d, d);
    for (Eigen::Index j = 0; j < gamma.rows(); ++j)
      if (gamma(j, k) != 0.0) acc += gamma(j, k) * b[j].mat();
    g.push_back(HermMatrix::from_trusted(acc));
  }
  return g;
}

}  // namespace detail

/// Z = {(x, y) : phi(x) = beta(phi)(y) for all dual generators phi up to t_max}.
inline LiftData lift_from_factorization(const PolyhedralCone& c, const Factorization& f, int t_max = 2,
                                        double tol = 1e-8) {
  if (!is_proper(c).proper()) throw InputError("lift_from_factorization: cone is not proper");
  if (t_max < 1 || t_max > kMaxLevel) throw CapabilityError("lift_from_factorization: t_max out of range");
  const int n = c.dim();
  const int k = f.target->ambient();
  const auto dd = dual_generators(c);

  LiftData out;
  out.target = f.target;
  std::vector<RMat> blocks;
  std::vector<CPMap> all_duals;
  for (int t = 1; t <= t_max; ++t) {
    for (const auto& phi : dual_generators_at(c, dd, t)) {
      const TargetMap b = f.beta(phi);
      if (static_cast<int>(b.size()) != k)
        throw IncompleteFactorization("lift_from_factorization: beta value missing or of wrong size");
      blocks.push_back(detail::slack_rows(phi, b, n, k));
      all_duals.push_back(phi);
    }
    Eigen::Index rows = 0;
    for (const auto& b : blocks) rows += b.rows();
    RMat stacked(rows, n + k);
    Eigen::Index r = 0;
    for (const auto& b : blocks) {
      stacked.middleRows(r, b.rows()) = b;
      r += b.rows();
    }
    out.z_basis = detail::nullspace(stacked);
    out.dim_by_level.push_back(out.zdim());
  }
  out.stable_level = t_max;
  while (out.stable_level > 1 && out.dim_by_level[out.stable_level - 2] == out.zdim()) --out.stable_level;

  const auto rep = verify_factorization(f, all_duals, tol);
  if (!rep.pass)
    throw ConstructionError("lift_from_factorization: factorization fails at generator " +
                            std::to_string(rep.worst_pair.first) + ", dual " + std::to_string(rep.worst_pair.second) +
                            " (deviation " + std::to_string(rep.max_dev) + ")");

  out.pi = LinearMap(RMat(out.z_basis.topRows(n)));
  out.gamma = LinearMap(RMat(out.z_basis.bottomRows(k)));
  if (detail::rank_of(out.gamma.m) < out.zdim())
    throw ConstructionError("lift_from_factorization: gamma is not injective on Z");
  return out;
}

/// Alpha from max-min-eigenvalue fiber points, beta by extending phi o pi^{-1}
/// from gamma(Z) to a completely positive map on the target.
inline Factorization factorization_from_lift(const LiftData& l, const PolyhedralCone& c, double tol = kDefaultTol) {
  if (l.pi.codomain() != c.dim()) throw ShapeError("factorization_from_lift: pi codomain differs from the cone");
  const auto b = detail::level1_pencil(*l.target);
  const auto g = detail::compose_pencil(b, l.gamma.m);
  const double margin = detail::pencil_interior_margin(g);
  if (margin <= 1e-9)
    throw ConstructionError("factorization_from_lift: lift is not proper (gamma(Z) misses the interior, margin " +
                            std::to_string(margin) + ")");

  Factorization f{c, l.target, {}, {}, std::nullopt};
  const auto sys = l.system();
  for (int j = 0; j < c.size(); ++j) {
    const auto r = membership(*sys, MatrixElement::from_vector(c.generator(j)), tol);
    if (r.verdict != Verdict::Member || !r.fiber)
      throw ConstructionError("factorization_from_lift: no fiber over generator " + std::to_string(j) +
                              "; not a lift of the minimal system");
    f.alpha.push_back(l.gamma.m * r.fiber->vector());
  }

  const auto* minimal = std::get_if<MinimalSystem>(&l.target->variant());
  std::vector<RVec> gz;
  for (int k = 0; k < l.zdim(); ++k) gz.push_back(l.gamma.m.col(k));
  const RMat pi = l.pi.m;
  const int kdim = l.target->ambient();
  std::optional<PolyhedralCone> dcone;
  if (minimal) dcone = minimal->cone;
  f.beta = [g, b, gz, pi, dcone, kdim, tol](const CPMap& phi) {
    std::vector<HermMatrix> vals;
    for (Eigen::Index k = 0; k < pi.cols(); ++k) vals.push_back(phi(RVec(pi.col(k))));
    const CpExtension ext = dcone ? cp_extend_cone(*dcone, gz, vals, tol) : cp_extend(g, vals, tol);
    if (ext.status != ExtendStatus::Extended || !ext.map)
      throw ConstructionError("factorization_from_lift: no completely positive extension (properness violation)");
    TargetMap out;
    if (dcone) {
      out = ext.map->coordinate_values();
    } else {
      for (int j = 0; j < kdim; ++j) out.push_back((*ext.map)(b[j]));
    }
    return out;
  };
  return f;
}

/// psi^{-1}[T] after checking that psi carries a linear factorization.
inline SystemPtr realization_from_linear_factorization(const Factorization& f, const std::vector<CPMap>& duals,
                                                       double tol = 1e-8) {
  if (!f.linear_alpha) throw InputError("realization: factorization has no linear alpha");
  if (verify_linear(f, tol) != Linearity::Linear)
    throw ConstructionError("realization: alpha is not the given linear map on generators");
  const auto rep = verify_factorization(f, duals, tol);
  if (!rep.pass)
    throw ConstructionError("realization: factorization fails at generator " + std::to_string(rep.worst_pair.first) +
                            ", dual " + std::to_string(rep.worst_pair.second));
  return OperatorSystem::inverse_image(*f.linear_alpha, f.target);
}

/// Same, with beta recovered from the graph lift (pi = id, gamma = psi).
inline SystemPtr realization_from_linear_factorization(const LinearMap& psi, const SystemPtr& target,
                                                       const PolyhedralCone& c, double tol = 1e-8) {
  if (psi.domain() != c.dim() || psi.codomain() != target->ambient())
    throw ShapeError("realization: psi has the wrong shape");
  if (detail::rank_of(psi.m) < c.dim()) throw ConstructionError("realization: psi is not injective");
  LiftData l;
  l.z_basis = RMat(c.dim() + psi.codomain(), c.dim());
  l.z_basis << RMat::Identity(c.dim(), c.dim()), psi.m;
  l.pi = LinearMap::identity(c.dim());
  l.gamma = psi;
  l.target = target;
  Factorization f = factorization_from_lift(l, c, tol);
  f.linear_alpha = psi;
  for (int j = 0; j < c.size(); ++j) f.alpha[j] = psi.m * c.generator(j);
  std::vector<CPMap> duals;
  try {
    duals = dual_generator_set(c, 2);
    return realization_from_linear_factorization(f, duals, tol);
  } catch (const ConstructionError& e) {
    throw ConstructionError(std::string("realization: psi does not give a linear factorization: ") + e.what());
  }
}

namespace detail {

// X -> sum_l X_ll P_l on the herm_basis coordinates of Her_m, assembled from
// Kraus operators V_(l,k) = e_l q_lk^* with P_l = sum_k q_lk q_lk^*.
inline TargetMap diagonal_beta(const std::vector<HermMatrix>& p, int m) {
  const int t = p[0].dim();
  std::vector<CMat> kraus;
  for (int l = 0; l < m; ++l) {
    for (const auto& q : rank1_decompose(p[l], 1e-12)) {
      CMat v = CMat::Zero(m, t);
      v.row(l) = q.adjoint();
      kraus.push_back(v);
    }
  }
  TargetMap out;
  for (const auto& x : herm_basis(m)) {
    CMat acc = CMat::Zero(t, t);
    for (const auto& v : kraus) acc += v.adjoint() * x.mat() * v;
    out.push_back(HermMatrix::from_trusted((acc + acc.adjoint()) * 0.5));
  }
  return out;
}

}  // namespace detail

/// alpha(e_i) = E_ii in Psd_n, linear.
inline Factorization simplex_factorization(int n) {
  if (n < 1) throw InputError("simplex_factorization: n must be positive");
  Factorization f{PolyhedralCone::orthant(n), OperatorSystem::psd(n), {}, {}, std::nullopt};
  RMat psi(n * n, n);
  for (int l = 0; l < n; ++l) {
    f.alpha.push_back(herm_coords(HermMatrix::unit(n, l)));
    psi.col(l) = f.alpha.back();
  }
  f.linear_alpha = LinearMap(psi);
  f.beta = [n](const CPMap& phi) {
    if (phi.kind() != SourceKind::Cone || phi.d() != n) throw ShapeError("simplex beta: phi must live on R^n");
    return detail::diagonal_beta(phi.coordinate_values(), n);
  };
  return f;
}

/// alpha(c_i) = E_ii in Psd_m for the m generators of C (not linear when m > n).
inline Factorization polyhedral_factorization(const PolyhedralCone& c) {
  if (!is_proper(c).proper()) throw InputError("polyhedral_factorization: cone is not proper");
  const int m = c.size();
  Factorization f{c, OperatorSystem::psd(m), {}, {}, std::nullopt};
  for (int i = 0; i < m; ++i) f.alpha.push_back(herm_coords(HermMatrix::unit(m, i)));
  f.beta = [m, c](const CPMap& phi) {
    if (phi.kind() != SourceKind::Cone || phi.d() != c.dim())
      throw ShapeError("polyhedral beta: phi must live on the cone");
    std::vector<HermMatrix> p;
    for (int i = 0; i < m; ++i) p.push_back(phi(c.generator(i)));
    return detail::diagonal_beta(p, m);
  };
  return f;
}

}  // namespace oplift
