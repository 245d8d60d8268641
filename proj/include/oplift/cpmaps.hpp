#pragma once

// Completely positive maps into Her_t: generator-value storage, Choi
// matrices, Kraus decompositions and finite-dimensional CP extension.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oplift/cones.hpp"
#include "oplift/errors.hpp"
#include "oplift/lmi.hpp"
#include "oplift/matrix_kernel.hpp"
#include "oplift/opsys.hpp"

namespace oplift {

enum class SourceKind { Cone, MatrixAlgebra, Subspace };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::Cone: return "cone";
    case SourceKind::MatrixAlgebra: return "matrix_algebra";
    default: return "subspace";
  }
}

namespace detail {

inline RMat coords_matrix(const std::vector<HermMatrix>& hs, int dim) {
  RMat m(dim * dim, static_cast<int>(hs.size()));
  for (std::size_t k = 0; k < hs.size(); ++k) {
    if (hs[k].dim() != dim) throw ShapeError("CPMap: matrix size mismatch");
    m.col(static_cast<int>(k)) = herm_coords(hs[k]);
  }
  return m;
}

inline int common_dim(const std::vector<HermMatrix>& hs, const char* what) {
  if (hs.empty()) throw InputError(std::string(what) + ": empty list");
  for (const auto& h : hs)
    if (h.dim() != hs[0].dim()) throw ShapeError(std::string(what) + ": sizes differ");
  return hs[0].dim();
}

}  // namespace detail

/// A linear map into Her_t, stored by its values on source generators:
/// cone generators, the canonical basis of Her_d, or a spanning list of a
/// subspace of Her_d.
class CPMap {
 public:
  /// Values phi(c_j), one per cone generator; must respect linear relations.
  static CPMap on_cone(const PolyhedralCone& c, std::vector<HermMatrix> values, double tol = 1e-9) {
    if (static_cast<int>(values.size()) != c.size()) throw ShapeError("CPMap::on_cone: one value per generator");
    CPMap out;
    out.kind_ = SourceKind::Cone;
    out.t_ = detail::common_dim(values, "CPMap::on_cone");
    out.cone_ = c;
    out.values_ = std::move(values);
    // Coordinate values phi(e_i) from C^T Phi = P.
    const RMat ct = c.matrix().transpose();
    const RMat p = detail::coords_matrix(out.values_, out.t_).transpose();
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(ct);
    const RMat phi = cod.solve(p);
    const double resid = (ct * phi - p).norm();
    if (resid > tol * (1.0 + p.norm()))
      throw InputError("CPMap::on_cone: values violate a linear relation among generators (residual " +
                       std::to_string(resid) + ")");
    for (int i = 0; i < c.dim(); ++i) out.coord_.push_back(herm_from_coords(out.t_, phi.row(i).transpose()));
    return out;
  }

  /// Values phi(B_k) on herm_basis(d).
  static CPMap on_matrix_algebra(int d, std::vector<HermMatrix> basis_values) {
    if (static_cast<int>(basis_values.size()) != d * d) throw ShapeError("CPMap::on_matrix_algebra: need d^2 values");
    CPMap out;
    out.kind_ = SourceKind::MatrixAlgebra;
    out.d_ = d;
    out.t_ = detail::common_dim(basis_values, "CPMap::on_matrix_algebra");
    out.values_ = std::move(basis_values);
    out.span_ = herm_basis(d);
    out.fit_subspace_map();
    return out;
  }

  static CPMap from_function(int d, const std::function<HermMatrix(const HermMatrix&)>& f) {
    std::vector<HermMatrix> v;
    for (const auto& b : herm_basis(d)) v.push_back(f(b));
    return on_matrix_algebra(d, std::move(v));
  }

  /// X -> sum_k V_k* X V_k with V_k in Mat_{d,t}.
  static CPMap from_kraus(const std::vector<CMat>& ops) {
    if (ops.empty()) throw InputError("CPMap::from_kraus: no operators");
    const int d = static_cast<int>(ops[0].rows());
    return from_function(d, [&ops](const HermMatrix& x) {
      HermMatrix acc = HermMatrix::zero(static_cast<int>(ops[0].cols()));
      for (const auto& v : ops) acc += conjugate(v, x);
      return acc;
    });
  }

  /// Map with Choi matrix j = sum_ij E_ij (x) phi(E_ij).
  static CPMap from_choi(const HermMatrix& j, int d, int t);

  /// Values on a spanning list of a subspace of Her_d.
  static CPMap on_subspace(std::vector<HermMatrix> span, std::vector<HermMatrix> values, double tol = 1e-9) {
    if (span.size() != values.size()) throw ShapeError("CPMap::on_subspace: one value per spanning element");
    CPMap out;
    out.kind_ = SourceKind::Subspace;
    out.d_ = detail::common_dim(span, "CPMap::on_subspace");
    out.t_ = detail::common_dim(values, "CPMap::on_subspace");
    out.span_ = std::move(span);
    out.values_ = std::move(values);
    out.fit_subspace_map();
    if (out.fit_residual_ > tol * (1.0 + detail::coords_matrix(out.values_, out.t_).norm()))
      throw InputError("CPMap::on_subspace: values violate a linear relation among spanning elements");
    return out;
  }

  SourceKind kind() const { return kind_; }
  int t() const { return t_; }
  /// Source dimension: n for cone sources, d for Her_d sources.
  int d() const { return kind_ == SourceKind::Cone ? cone_->dim() : d_; }
  const std::vector<HermMatrix>& values() const { return values_; }
  const std::optional<PolyhedralCone>& cone() const { return cone_; }
  const std::vector<HermMatrix>& span() const { return span_; }

  /// phi(e_i) for cone sources.
  const std::vector<HermMatrix>& coordinate_values() const {
    if (kind_ != SourceKind::Cone) throw CapabilityError("CPMap: coordinate values need a cone source");
    return coord_;
  }

  HermMatrix operator()(const RVec& x) const {
    const auto& cv = coordinate_values();
    if (x.size() != static_cast<Eigen::Index>(cv.size())) throw ShapeError("CPMap: argument dimension mismatch");
    HermMatrix acc = HermMatrix::zero(t_);
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += cv[i] * x(i);
    return acc;
  }

  /// Evaluation on Her_d (matrix algebra, or subspace sources via the fitted map).
  HermMatrix operator()(const HermMatrix& x) const {
    if (kind_ == SourceKind::Cone) throw CapabilityError("CPMap: cone source takes vectors");
    if (x.dim() != d_) throw ShapeError("CPMap: argument size mismatch");
    return herm_from_coords(t_, lin_ * herm_coords(x));
  }

  /// phi[a] = sum_i phi(e_i) (x) A_i for cone sources.
  HermMatrix apply(const MatrixElement& a) const { return pair_levelwise(coordinate_values(), a); }

  /// Linear map Her_d -> Her_t in herm coordinates (t^2 x d^2).
  const RMat& coordinate_matrix() const { return lin_; }

 private:
  void fit_subspace_map() {
    const RMat h = detail::coords_matrix(span_, d_);
    const RMat p = detail::coords_matrix(values_, t_);
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(h.transpose());
    lin_ = cod.solve(p.transpose()).transpose();
    fit_residual_ = (lin_ * h - p).norm();
  }

  SourceKind kind_ = SourceKind::Cone;
  int t_ = 0;
  int d_ = 0;
  std::optional<PolyhedralCone> cone_;
  std::vector<HermMatrix> values_;
  std::vector<HermMatrix> coord_;
  std::vector<HermMatrix> span_;
  RMat lin_;
  double fit_residual_ = 0.0;
};

/// tr_1((X^T (x) I) J) = sum_ij X_ij J_(i,j), the map encoded by a Choi matrix.
inline HermMatrix choi_apply(const HermMatrix& j, int d, int t, const HermMatrix& x) {
  if (j.dim() != d * t || x.dim() != d) throw ShapeError("choi_apply: size mismatch");
  CMat acc = CMat::Zero(t, t);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (x(r, c) != cplx(0)) acc += x(r, c) * j.mat().block(r * t, c * t, t, t);
  return HermMatrix::from_trusted(acc);
}

inline CPMap CPMap::from_choi(const HermMatrix& j, int d, int t) {
  return from_function(d, [&](const HermMatrix& x) { return choi_apply(j, d, t, x); });
}

/// sum_ij E_ij (x) phi(E_ij), phi extended complex-linearly.
inline HermMatrix choi_matrix(const CPMap& phi) {
  if (phi.kind() != SourceKind::MatrixAlgebra) throw CapabilityError("choi_matrix: source is not a full matrix algebra");
  const int d = phi.d(), t = phi.t();
  const auto& v = phi.values();  // on herm_basis(d)
  CMat j = CMat::Zero(d * t, d * t);
  const double r = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      if (a == b) {
        j.block(a * t, a * t, t, t) = v[k++].mat();
        continue;
      }
      // E_ab = (S - iA)/sqrt2, E_ba = (S + iA)/sqrt2.
      const CMat& s = v[k++].mat();
      const CMat& as = v[k++].mat();
      j.block(a * t, b * t, t, t) = (s - cplx(0, 1) * as) * r;
      j.block(b * t, a * t, t, t) = (s + cplx(0, 1) * as) * r;
    }
  }
  return HermMatrix::from_trusted(j);
}

struct KrausDecomposition {
  std::vector<CMat> ops;  // d x t

  HermMatrix operator()(const HermMatrix& x) const {
    if (ops.empty()) throw InputError("KrausDecomposition: no operators");
    HermMatrix acc = HermMatrix::zero(static_cast<int>(ops[0].cols()));
    for (const auto& v : ops) acc += conjugate(v, x);
    return acc;
  }
};

/// Kraus operators from the eigendecomposition of the Choi matrix; one per
/// eigenvalue above tol * ||J||.
inline KrausDecomposition choi_kraus(const CPMap& phi, double tol = kDefaultTol) {
  const HermMatrix j = choi_matrix(phi);
  const int d = phi.d(), t = phi.t();
  Eigen::SelfAdjointEigenSolver<CMat> es(j.mat());
  const RVec& ev = es.eigenvalues();
  const double scale = std::max(1.0, j.norm());
  if (ev(0) < -tol * scale) throw NotCompletelyPositive("choi_kraus: Choi matrix is not PSD", ev(0));
  KrausDecomposition out;
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k) {
    if (ev(k) <= tol * scale) break;
    const CVec w = es.eigenvectors().col(k) * std::sqrt(ev(k));
    CMat v(d, t);
    for (int i = 0; i < d; ++i) v.row(i) = w.segment(i * t, t).adjoint();
    out.ops.push_back(std::move(v));
  }
  if (out.ops.empty()) out.ops.push_back(CMat::Zero(d, t));
  return out;
}

enum class CpStatus { CompletelyPositive, NotCompletelyPositive, Inconclusive };

inline const char* to_string(CpStatus s) {
  switch (s) {
    case CpStatus::CompletelyPositive: return "cp";
    case CpStatus::NotCompletelyPositive: return "not_cp";
    default: return "inconclusive";
  }
}

struct CpCheck {
  CpStatus status = CpStatus::Inconclusive;
  double margin = 0.0;  // smallest relevant eigenvalue
};

enum class ExtendStatus { Extended, Infeasible, Inconclusive };

inline const char* to_string(ExtendStatus s) {
  switch (s) {
    case ExtendStatus::Extended: return "extended";
    case ExtendStatus::Infeasible: return "infeasible";
    default: return "inconclusive";
  }
}

struct CpExtension {
  ExtendStatus status = ExtendStatus::Inconclusive;
  std::optional<CPMap> map;
  std::optional<HermMatrix> choi;  // matrix-algebra targets only
  double lambda = 0.0;             // optimal min-eigenvalue slack
  double restriction_error = 0.0;  // max_k ||phi_hat(H_k) - P_k||_F
  double min_eig = 0.0;            // Choi (or generator-value) minimum eigenvalue
  bool proper = true;
  std::string warning;
  std::vector<HermMatrix> certificate;  // multipliers when infeasible
  int iterations = 0;
};

namespace detail {

// max lambda <= 1 with sum_k x_k H_k - lambda I >= 0.
inline double span_interior_margin(const std::vector<HermMatrix>& span) { return pencil_interior_margin(span); }

inline void classify_extension(CpExtension& out, const lmi::Result& res, double tol) {
  out.iterations = res.iterations;
  if (!res.equalities_consistent) {
    out.status = ExtendStatus::Infeasible;
    out.lambda = -std::numeric_limits<double>::infinity();
    return;
  }
  if (!res.solved()) return;
  out.lambda = res.lambda;
  if (res.lambda >= -tol) {
    out.status = ExtendStatus::Extended;
  } else {
    out.status = ExtendStatus::Infeasible;
    out.certificate = res.multipliers;
  }
}

}  // namespace detail

/// CP extension of phi: H -> Her_t (H = span of `span` in Her_d) to all of
/// Her_d, maximizing the minimum Choi eigenvalue.
inline CpExtension cp_extend(const std::vector<HermMatrix>& span, const std::vector<HermMatrix>& values,
                             double tol = kDefaultTol) {
  if (span.size() != values.size()) throw ShapeError("cp_extend: one value per spanning element");
  const int d = detail::common_dim(span, "cp_extend");
  const int t = detail::common_dim(values, "cp_extend");
  CpExtension out;
  if (detail::span_interior_margin(span) <= 1e-9) {
    out.proper = false;
    out.warning = "subspace contains no positive definite element; extension may fail";
  }
  lmi::Program prog;
  prog.add_var(d * t);
  for (std::size_t k = 0; k < span.size(); ++k) {
    const HermMatrix h = span[k];
    prog.add_equality([h, d, t](const lmi::Vars& v) { return choi_apply(v[0], d, t, h); }, values[k]);
  }
  prog.add_psd([](const lmi::Vars& v) { return v[0]; });
  const auto res = lmi::maximize_min_eig(prog);
  detail::classify_extension(out, res, tol);
  if (out.status != ExtendStatus::Extended) return out;
  const HermMatrix& j = res.values[0];
  out.choi = j;
  out.min_eig = min_eig(j);
  for (std::size_t k = 0; k < span.size(); ++k)
    out.restriction_error = std::max(out.restriction_error, (choi_apply(j, d, t, span[k]) - values[k]).norm());
  out.map = CPMap::from_choi(j, d, t);
  return out;
}

inline CpExtension cp_extend(const CPMap& phi, double tol = kDefaultTol) {
  if (phi.kind() == SourceKind::Cone) throw CapabilityError("cp_extend: source must be a subspace of Her_d");
  return cp_extend(phi.span(), phi.values(), tol);
}

/// Extension for a minimal target: given values P_k on vectors z_k spanning a
/// subspace of R^k, find phi: R^k -> Her_t with phi(z_k) = P_k and phi(d_l) PSD
/// on every generator of D.
inline CpExtension cp_extend_cone(const PolyhedralCone& dcone, const std::vector<RVec>& span,
                                  const std::vector<HermMatrix>& values, double tol = kDefaultTol) {
  if (span.size() != values.size()) throw ShapeError("cp_extend_cone: one value per spanning vector");
  const int k = dcone.dim();
  const int t = detail::common_dim(values, "cp_extend_cone");
  for (const auto& z : span)
    if (z.size() != k) throw ShapeError("cp_extend_cone: vector dimension mismatch");
  CpExtension out;
  {
    // Properness: some combination of the span lies in the interior of D.
    lmi::Program p;
    const int m = dcone.size();
    const int ns = static_cast<int>(span.size());
    for (int j = 0; j < ns + m; ++j) p.add_var(1);
    const RMat dm = dcone.matrix();
    for (int r = 0; r < k; ++r) {
      p.add_equality(
          [&span, &dm, r, ns, m](const lmi::Vars& v) {
            double acc = 0;
            for (int j = 0; j < ns; ++j) acc += span[j](r) * v[j](0, 0).real();
            for (int l = 0; l < m; ++l) acc -= dm(r, l) * v[ns + l](0, 0).real();
            return HermMatrix::diag({acc});
          },
          HermMatrix::diag({0.0}));
    }
    for (int l = 0; l < m; ++l) p.add_psd([l, ns](const lmi::Vars& v) { return v[ns + l]; });
    lmi::Options o;
    o.cap = 1.0;
    const auto r = lmi::maximize_min_eig(p, o);
    if (!r.solved() || r.lambda <= 1e-9) {
      out.proper = false;
      out.warning = "subspace misses the interior of the target cone; extension may fail";
    }
  }
  lmi::Program prog;
  for (int i = 0; i < k; ++i) prog.add_var(t);
  auto eval = [k, t](const RVec& x, const lmi::Vars& v) {
    CMat acc = CMat::Zero(t, t);
    for (int i = 0; i < k; ++i)
      if (x(i) != 0.0) acc += x(i) * v[i].mat();
    return HermMatrix::from_trusted(acc);
  };
  for (std::size_t j = 0; j < span.size(); ++j) {
    const RVec z = span[j];
    prog.add_equality([eval, z](const lmi::Vars& v) { return eval(z, v); }, values[j]);
  }
  for (int l = 0; l < dcone.size(); ++l) {
    const RVec g = dcone.generator(l);
    prog.add_psd([eval, g](const lmi::Vars& v) { return eval(g, v); });
  }
  const auto res = lmi::maximize_min_eig(prog);
  detail::classify_extension(out, res, tol);
  if (out.status != ExtendStatus::Extended) return out;
  std::vector<HermMatrix> gen_values;
  out.min_eig = std::numeric_limits<double>::infinity();
  for (int l = 0; l < dcone.size(); ++l) {
    gen_values.push_back(eval(dcone.generator(l), res.values));
    out.min_eig = std::min(out.min_eig, min_eig(gen_values.back()));
  }
  for (std::size_t j = 0; j < span.size(); ++j)
    out.restriction_error = std::max(out.restriction_error, (eval(span[j], res.values) - values[j]).norm());
  out.map = CPMap::on_cone(dcone, std::move(gen_values), 1e-7);
  return out;
}

/// Complete positivity: Choi test for matrix algebras, generator values for
/// cone sources, extension feasibility for subspaces.
inline CpCheck cp_check(const CPMap& phi, double tol = kDefaultTol) {
  CpCheck out;
  switch (phi.kind()) {
    case SourceKind::MatrixAlgebra: {
      out.margin = min_eig(choi_matrix(phi));
      break;
    }
    case SourceKind::Cone: {
      out.margin = std::numeric_limits<double>::infinity();
      for (const auto& v : phi.values()) out.margin = std::min(out.margin, min_eig(v));
      break;
    }
    case SourceKind::Subspace: {
      const CpExtension ext = cp_extend(phi, tol);
      out.margin = ext.lambda;
      if (ext.status == ExtendStatus::Inconclusive) return out;
      out.status = ext.status == ExtendStatus::Extended ? CpStatus::CompletelyPositive : CpStatus::NotCompletelyPositive;
      return out;
    }
  }
  out.status = out.margin >= -tol ? CpStatus::CompletelyPositive : CpStatus::NotCompletelyPositive;
  return out;
}

}  // namespace oplift
