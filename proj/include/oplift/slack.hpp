#pragma once

// The slack pairing (a, phi) -> phi[a] and verification of T-factorizations
// of minimal systems C^min on generator pairs.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oplift/cones.hpp"
#include "oplift/cpmaps.hpp"
#include "oplift/errors.hpp"
#include "oplift/opsys.hpp"

namespace oplift {

/// A linear functional-like map Y -> Her_t on the target space, stored by its
/// values on the coordinate vectors e_j of Y = R^k.
using TargetMap = std::vector<HermMatrix>;

using BetaRule = std::function<TargetMap(const CPMap&)>;

struct Factorization {
  PolyhedralCone source;
  SystemPtr target;
  std::vector<RVec> alpha;  // alpha(c_j) in T_1, one per source generator
  BetaRule beta;            // dual generator phi in Pos(C, Psd_t) -> beta(phi)
  std::optional<LinearMap> linear_alpha;
};

/// phi[a] in Her_{ts} for phi in Pos(C, Psd_t) and a over R^n.
inline HermMatrix slack_eval(const MatrixElement& a, const CPMap& phi) {
  if (phi.kind() != SourceKind::Cone) throw CapabilityError("slack_eval: phi must be defined on a cone");
  if (phi.d() != a.ambient()) throw ShapeError("slack_eval: dimension mismatch");
  return phi.apply(a);
}

/// beta[y] = sum_j beta(e_j) (x) Y_j for y over the target space.
inline HermMatrix target_slack(const MatrixElement& y, const TargetMap& beta) { return pair_levelwise(beta, y); }

inline HermMatrix target_slack(const RVec& y, const TargetMap& beta) {
  if (static_cast<Eigen::Index>(beta.size()) != y.size()) throw ShapeError("target_slack: dimension mismatch");
  HermMatrix acc = HermMatrix::zero(beta.empty() ? 0 : beta[0].dim());
  for (Eigen::Index j = 0; j < y.size(); ++j)
    if (y(j) != 0.0) acc += beta[j] * y(j);
  return acc;
}

/// Complete positivity of a target map with respect to the target system.
inline CpCheck target_cp_check(const OperatorSystem& target, const TargetMap& beta, double tol = kDefaultTol) {
  if (static_cast<int>(beta.size()) != target.ambient()) throw ShapeError("target_cp_check: dimension mismatch");
  if (const auto* ms = std::get_if<MinimalSystem>(&target.variant())) {
    std::vector<HermMatrix> vals;
    for (const auto& g : ms->cone.generators()) vals.push_back(target_slack(g, beta));
    return cp_check(CPMap::on_cone(ms->cone, std::move(vals), 1e-7), tol);
  }
  if (const auto* fs = std::get_if<FreeSpectrahedron>(&target.variant())) {
    const int d = fs->d();
    if (static_cast<int>(fs->a.size()) == d * d) {
      // Pencil spans Her_d: the map is determined on all of Her_d.
      const CPMap m = CPMap::on_subspace(fs->a, beta, 1e-7);
      std::vector<HermMatrix> v;
      for (const auto& b : herm_basis(d)) v.push_back(m(b));
      return cp_check(CPMap::on_matrix_algebra(d, std::move(v)), tol);
    }
    return cp_check(CPMap::on_subspace(fs->a, beta, 1e-7), tol);
  }
  throw CapabilityError("target_cp_check: target must be minimal or a free spectrahedron");
}

struct FactorizationReport {
  bool pass = false;
  double max_dev = 0.0;
  std::pair<int, int> worst_pair{-1, -1};  // (generator index, dual index)
  int pairs = 0;
  bool alpha_in_target = true;
  bool beta_cp = true;
  std::vector<std::string> warnings;
};

/// Checks phi(c) = beta(phi)[alpha(c)] for every generator c and every dual
/// generator phi; deviations are Frobenius norms relative to 1 + ||phi(c)||.
inline FactorizationReport verify_factorization(const Factorization& f, const std::vector<CPMap>& duals,
                                                double tol = 1e-9) {
  const int m = f.source.size();
  if (m == 0) throw InputError("verify_factorization: source has no generators");
  if (static_cast<int>(f.alpha.size()) < m)
    throw IncompleteFactorization("verify_factorization: no alpha value for generator " +
                                  std::to_string(f.alpha.size()));
  const int k = f.target->ambient();
  FactorizationReport rep;
  for (int j = 0; j < m; ++j) {
    if (f.alpha[j].size() != k) throw ShapeError("verify_factorization: alpha value has wrong dimension");
    const auto r = membership(*f.target, MatrixElement::from_vector(f.alpha[j]), kDefaultTol);
    if (r.verdict != Verdict::Member) rep.alpha_in_target = false;
  }
  if (!rep.alpha_in_target) rep.warnings.push_back("some alpha value is not in the target cone");
  if (duals.empty()) rep.warnings.push_back("empty dual generator list; verification is vacuous");
  for (std::size_t q = 0; q < duals.size(); ++q) {
    const CPMap& phi = duals[q];
    if (!f.beta) throw IncompleteFactorization("verify_factorization: no beta rule");
    const TargetMap b = f.beta(phi);
    if (b.empty()) throw IncompleteFactorization("verify_factorization: no beta value for dual generator " + std::to_string(q));
    if (static_cast<int>(b.size()) != k) throw ShapeError("verify_factorization: beta value has wrong dimension");
    if (target_cp_check(*f.target, b).status != CpStatus::CompletelyPositive) rep.beta_cp = false;
    for (int j = 0; j < m; ++j) {
      const HermMatrix lhs = phi.values()[j];
      const HermMatrix rhs = target_slack(f.alpha[j], b);
      const double dev = (lhs - rhs).norm() / (1.0 + lhs.norm());
      ++rep.pairs;
      if (dev > rep.max_dev || rep.worst_pair.first < 0) {
        rep.max_dev = dev;
        rep.worst_pair = {j, static_cast<int>(q)};
      }
    }
  }
  if (!rep.beta_cp) rep.warnings.push_back("some beta value is not completely positive on the target");
  rep.pass = rep.max_dev <= tol && rep.alpha_in_target && rep.beta_cp;
  return rep;
}

enum class Linearity { Linear, NotLinear, NotApplicable };

inline const char* to_string(Linearity l) {
  switch (l) {
    case Linearity::Linear: return "linear";
    case Linearity::NotLinear: return "not_linear";
    default: return "not_applicable";
  }
}

/// With psi given: psi maps every generator into T_1 and alpha = psi on generators.
inline Linearity verify_linear(const Factorization& f, double tol = 1e-9) {
  if (!f.linear_alpha) return Linearity::NotApplicable;
  const LinearMap& psi = *f.linear_alpha;
  if (psi.domain() != f.source.dim() || psi.codomain() != f.target->ambient())
    throw ShapeError("verify_linear: psi has the wrong shape");
  for (int j = 0; j < f.source.size(); ++j) {
    const RVec y = psi.m * f.source.generator(j);
    if ((y - f.alpha.at(j)).norm() > tol * (1.0 + y.norm())) return Linearity::NotLinear;
    if (membership(*f.target, MatrixElement::from_vector(y), kDefaultTol).verdict != Verdict::Member)
      return Linearity::NotLinear;
  }
  return Linearity::Linear;
}

/// Least-squares psi with psi(c_j) = alpha(c_j); NotLinear when no linear map
/// reproduces alpha on the generators.
inline std::pair<Linearity, std::optional<LinearMap>> fit_linear_alpha(const Factorization& f, double tol = 1e-9) {
  const RMat c = f.source.matrix();
  RMat a(f.target->ambient(), f.source.size());
  for (int j = 0; j < f.source.size(); ++j) a.col(j) = f.alpha.at(j);
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(c.transpose());
  const RMat psi_t = cod.solve(a.transpose());
  if ((c.transpose() * psi_t - a.transpose()).norm() > tol * (1.0 + a.norm())) return {Linearity::NotLinear, std::nullopt};
  Factorization g = f;
  g.linear_alpha = LinearMap(RMat(psi_t.transpose()));
  return {verify_linear(g, tol), g.linear_alpha};
}

/// Rank-one PSD matrices q q* spanning Her_t: e_i, e_i + e_j, e_i + i e_j.
inline std::vector<HermMatrix> rank1_templates(int t) {
  std::vector<HermMatrix> out;
  for (int i = 0; i < t; ++i) {
    for (int j = i; j < t; ++j) {
      CVec q = CVec::Zero(t);
      q(i) = 1;
      if (i == j) {
        out.push_back(HermMatrix::outer(q));
        continue;
      }
      q(j) = 1;
      out.push_back(HermMatrix::outer(q));
      q(j) = cplx(0, 1);
      out.push_back(HermMatrix::outer(q));
    }
  }
  return out;
}

/// Dual generators of C^min at level t: c -> l(c) q q* for facets l of C^dual.
inline std::vector<CPMap> dual_generators_at(const PolyhedralCone& c, const DualDescription& dd, int t) {
  std::vector<CPMap> out;
  for (const auto& l : dd.facets) {
    for (const auto& qq : rank1_templates(t)) {
      std::vector<HermMatrix> vals;
      for (const auto& g : c.generators()) vals.push_back(qq * l.dot(g));
      out.push_back(CPMap::on_cone(c, std::move(vals)));
    }
  }
  return out;
}

inline std::vector<CPMap> dual_generator_set(const PolyhedralCone& c, int t_max) {
  const DualDescription dd = dual_generators(c);
  std::vector<CPMap> out;
  for (int t = 1; t <= t_max; ++t) {
    auto level = dual_generators_at(c, dd, t);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

/// Random element of Pos(C, Psd_t): a separable interior part plus a random
/// Hermitian direction pushed towards the boundary, so non-separable maps occur.
inline CPMap random_positive_map(const PolyhedralCone& c, int t, std::mt19937& rng) {
  const DualDescription dd = dual_generators(c);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> frac(0.3, 1.0);
  auto rand_cmat = [&](int r, int s) {
    CMat m(r, s);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < s; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
  };
  std::vector<HermMatrix> coord(c.dim(), HermMatrix::zero(t));
  for (const auto& l : dd.facets) {
    const CMat g = rand_cmat(t, t);
    const HermMatrix r = HermMatrix::from_trusted(g * g.adjoint());
    for (int i = 0; i < c.dim(); ++i) coord[i] += r * l(i);
  }
  std::vector<HermMatrix> dir;
  for (int i = 0; i < c.dim(); ++i) {
    const CMat g = rand_cmat(t, t);
    dir.push_back(HermMatrix::from_trusted((g + g.adjoint()) * 0.5));
  }
  auto at = [&](const std::vector<HermMatrix>& v, const RVec& x) {
    HermMatrix acc = HermMatrix::zero(t);
    for (int i = 0; i < c.dim(); ++i) acc += v[i] * x(i);
    return acc;
  };
  // Largest eps keeping every S(c_j) + eps R(c_j) PSD.
  double eps = 1e6;
  for (const auto& g : c.generators()) {
    const HermMatrix s = at(coord, g), r = at(dir, g);
    Eigen::SelfAdjointEigenSolver<CMat> es(s.mat());
    const RVec ev = es.eigenvalues().cwiseMax(1e-14);
    const CMat w = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal();
    const double lo = min_eig(HermMatrix::from_trusted(w.adjoint() * r.mat() * w));
    if (lo < 0) eps = std::min(eps, -1.0 / lo);
  }
  eps *= frac(rng);
  std::vector<HermMatrix> vals;
  for (const auto& g : c.generators()) {
    HermMatrix v = at(coord, g) + at(dir, g) * eps;
    vals.push_back(v);
  }
  return CPMap::on_cone(c, std::move(vals), 1e-7);
}

}  // namespace oplift
