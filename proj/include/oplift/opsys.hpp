#pragma once

// Operator systems on R^n, represented by their levelwise membership oracles.

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oplift/cones.hpp"
#include "oplift/errors.hpp"
#include "oplift/lmi.hpp"
#include "oplift/matrix_kernel.hpp"

namespace oplift {

inline constexpr int kMaxLevel = 6;

/// a = sum_i e_i (x) A_i in R^n (x) Her_s.
class MatrixElement {
 public:
  MatrixElement() = default;

  explicit MatrixElement(std::vector<HermMatrix> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw InputError("MatrixElement: need at least one coefficient");
    for (const auto& c : coeffs_)
      if (c.dim() != coeffs_[0].dim()) throw ShapeError("MatrixElement: coefficient sizes differ");
  }

  static MatrixElement zero(int n, int s) { return MatrixElement(std::vector<HermMatrix>(n, HermMatrix::zero(s))); }

  /// Level-1 element x.
  static MatrixElement from_vector(const RVec& x) {
    std::vector<HermMatrix> c;
    for (Eigen::Index i = 0; i < x.size(); ++i) c.push_back(HermMatrix::diag({x(i)}));
    return MatrixElement(std::move(c));
  }

  /// x (x) Q
  static MatrixElement tensor(const RVec& x, const HermMatrix& q) {
    std::vector<HermMatrix> c;
    for (Eigen::Index i = 0; i < x.size(); ++i) c.push_back(q * x(i));
    return MatrixElement(std::move(c));
  }

  int ambient() const { return static_cast<int>(coeffs_.size()); }
  int level() const { return coeffs_.empty() ? 0 : coeffs_[0].dim(); }
  const HermMatrix& coeff(int i) const { return coeffs_.at(i); }
  const std::vector<HermMatrix>& coeffs() const { return coeffs_; }

  /// Level-1 coordinates; requires level 1.
  RVec vector() const {
    if (level() != 1) throw ShapeError("MatrixElement::vector: level is not 1");
    RVec v(ambient());
    for (int i = 0; i < ambient(); ++i) v(i) = coeffs_[i](0, 0).real();
    return v;
  }

  double norm() const {
    double s = 0;
    for (const auto& c : coeffs_) s += c.norm() * c.norm();
    return std::sqrt(s);
  }

  MatrixElement operator+(const MatrixElement& o) const {
    check_same(o);
    std::vector<HermMatrix> c;
    for (int i = 0; i < ambient(); ++i) c.push_back(coeffs_[i] + o.coeffs_[i]);
    return MatrixElement(std::move(c));
  }
  MatrixElement operator-(const MatrixElement& o) const { return *this + o * -1.0; }
  MatrixElement operator*(double a) const {
    std::vector<HermMatrix> c;
    for (const auto& x : coeffs_) c.push_back(x * a);
    return MatrixElement(std::move(c));
  }

 private:
  void check_same(const MatrixElement& o) const {
    if (o.ambient() != ambient() || o.level() != level()) throw ShapeError("MatrixElement: shape mismatch");
  }
  std::vector<HermMatrix> coeffs_;
};

/// id (x) (V* . V): coefficients become V* A_i V.
inline MatrixElement compression(const MatrixElement& a, const CMat& v) {
  if (v.rows() != a.level()) throw ShapeError("compression: V must have s rows");
  std::vector<HermMatrix> c;
  for (const auto& x : a.coeffs()) c.push_back(conjugate(v, x));
  return MatrixElement(std::move(c));
}

/// Block-diagonal element diag(a, b) at level s+t.
inline MatrixElement direct_sum(const MatrixElement& a, const MatrixElement& b) {
  if (a.ambient() != b.ambient()) throw ShapeError("direct_sum: ambient dimensions differ");
  std::vector<HermMatrix> c;
  for (int i = 0; i < a.ambient(); ++i) c.push_back(direct_sum(a.coeff(i), b.coeff(i)));
  return MatrixElement(std::move(c));
}

/// Linear map R^n -> R^k stored as a k x n matrix. When herm_dim > 0 the
/// codomain is Her_d, identified with R^{d^2} through herm_coords.
struct LinearMap {
  RMat m;
  int herm_dim = 0;

  LinearMap() = default;
  explicit LinearMap(RMat mat) : m(std::move(mat)) {}

  static LinearMap identity(int n) { return LinearMap(RMat::Identity(n, n)); }

  /// phi(e_i) = images[i] in Her_d.
  static LinearMap into_herm(const std::vector<HermMatrix>& images) {
    if (images.empty()) throw InputError("LinearMap::into_herm: no images");
    const int d = images[0].dim();
    RMat mat(d * d, static_cast<int>(images.size()));
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].dim() != d) throw ShapeError("LinearMap::into_herm: image sizes differ");
      mat.col(static_cast<int>(i)) = herm_coords(images[i]);
    }
    LinearMap out(mat);
    out.herm_dim = d;
    return out;
  }

  int domain() const { return static_cast<int>(m.cols()); }
  int codomain() const { return static_cast<int>(m.rows()); }

  HermMatrix image_herm(int i) const {
    if (herm_dim == 0) throw CapabilityError("LinearMap: codomain is not a Hermitian matrix space");
    return herm_from_coords(herm_dim, m.col(i));
  }
};

/// phi[a] as an element over the codomain: coefficients sum_i m_ji A_i.
inline MatrixElement apply_levelwise(const LinearMap& phi, const MatrixElement& a) {
  if (phi.domain() != a.ambient()) throw ShapeError("apply_levelwise: domain dimension mismatch");
  const int s = a.level();
  std::vector<HermMatrix> out;
  for (int j = 0; j < phi.codomain(); ++j) {
    CMat acc = CMat::Zero(s, s);
    for (int i = 0; i < a.ambient(); ++i)
      if (phi.m(j, i) != 0.0) acc += phi.m(j, i) * a.coeff(i).mat();
    out.push_back(HermMatrix::from_trusted(acc));
  }
  return MatrixElement(std::move(out));
}

/// sum_i images[i] (x) A_i in Her_{ts}.
inline HermMatrix pair_levelwise(const std::vector<HermMatrix>& images, const MatrixElement& a) {
  if (static_cast<int>(images.size()) != a.ambient()) throw ShapeError("pair_levelwise: dimension mismatch");
  const int t = images.empty() ? 0 : images[0].dim();
  CMat acc = CMat::Zero(t * a.level(), t * a.level());
  for (int i = 0; i < a.ambient(); ++i) acc += kron(images[i].mat(), a.coeff(i).mat());
  return HermMatrix::from_trusted(acc);
}

/// phi[a] in Her_{ts} for phi into Her_t.
inline HermMatrix apply_to_herm(const LinearMap& phi, const MatrixElement& a) {
  if (phi.domain() != a.ambient()) throw ShapeError("apply_to_herm: domain dimension mismatch");
  std::vector<HermMatrix> images;
  for (int i = 0; i < phi.domain(); ++i) images.push_back(phi.image_herm(i));
  return pair_levelwise(images, a);
}

class OperatorSystem;
using SystemPtr = std::shared_ptr<const OperatorSystem>;

struct MinimalSystem {
  PolyhedralCone cone;
};

struct FreeSpectrahedron {
  std::vector<HermMatrix> a;  // one per coordinate of R^n
  int d() const { return a.empty() ? 0 : a[0].dim(); }
};

struct InverseImageSystem {
  LinearMap psi;
  SystemPtr target;
};

struct LiftedSystem {
  LinearMap pi;
  LinearMap gamma;
  SystemPtr target;
};

namespace detail {

// max lambda with sum_i x_i A_i - lambda I >= 0 and lambda <= 1.
inline double pencil_interior_margin(const std::vector<HermMatrix>& a) {
  lmi::Program prog;
  const int n = static_cast<int>(a.size());
  for (int i = 0; i < n; ++i) prog.add_var(1);
  prog.add_psd([&a, n](const lmi::Vars& v) {
    HermMatrix acc = HermMatrix::zero(a[0].dim());
    for (int i = 0; i < n; ++i) acc += a[i] * v[i](0, 0).real();
    return acc;
  });
  lmi::Options opt;
  opt.cap = 1.0;
  const auto res = lmi::maximize_min_eig(prog, opt);
  return res.solved() ? res.lambda : -1.0;
}

}  // namespace detail

class OperatorSystem {
 public:
  using Variant = std::variant<MinimalSystem, FreeSpectrahedron, InverseImageSystem, LiftedSystem>;

  static SystemPtr minimal(const PolyhedralCone& c) {
    if (!is_proper(c).proper()) throw InputError("minimal system: cone is not proper");
    return std::make_shared<OperatorSystem>(Variant(MinimalSystem{c}), c.dim());
  }

  static SystemPtr free_spectrahedron(std::vector<HermMatrix> a) {
    if (a.empty()) throw InputError("free spectrahedron: empty pencil");
    for (const auto& x : a)
      if (x.dim() != a[0].dim()) throw ShapeError("free spectrahedron: pencil sizes differ");
    if (detail::pencil_interior_margin(a) <= 1e-9)
      throw InputError("free spectrahedron: no positive definite combination (level-1 cone not proper)");
    const int n = static_cast<int>(a.size());
    return std::make_shared<OperatorSystem>(Variant(FreeSpectrahedron{std::move(a)}), n);
  }

  /// P^d on Her_d, in the coordinates of herm_basis(d).
  static SystemPtr psd(int d) { return free_spectrahedron(herm_basis(d)); }

  static SystemPtr inverse_image(LinearMap psi, SystemPtr target) {
    if (psi.codomain() != target->ambient()) throw ShapeError("inverse image: codomain mismatch");
    const int n = psi.domain();
    return std::make_shared<OperatorSystem>(Variant(InverseImageSystem{std::move(psi), std::move(target)}), n);
  }

  static SystemPtr lifted(LinearMap pi, LinearMap gamma, SystemPtr target) {
    if (pi.domain() != gamma.domain()) throw ShapeError("lifted system: pi and gamma domains differ");
    if (gamma.codomain() != target->ambient()) throw ShapeError("lifted system: gamma codomain mismatch");
    Eigen::ColPivHouseholderQR<RMat> qr(gamma.m);
    qr.setThreshold(1e-10);
    if (qr.rank() != gamma.domain()) throw ConstructionError("lifted system: gamma is not injective");
    const int n = pi.codomain();
    return std::make_shared<OperatorSystem>(Variant(LiftedSystem{std::move(pi), std::move(gamma), std::move(target)}),
                                            n);
  }

  OperatorSystem(Variant v, int n) : v_(std::move(v)), n_(n) {}

  int ambient() const { return n_; }
  const Variant& variant() const { return v_; }
  std::string kind() const {
    switch (v_.index()) {
      case 0: return "minimal";
      case 1: return "free_spectrahedron";
      case 2: return "inverse_image";
      default: return "lifted";
    }
  }

 private:
  Variant v_;
  int n_;
};

enum class Verdict { Member, NotMember, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Member: return "member";
    case Verdict::NotMember: return "not_member";
    default: return "inconclusive";
  }
}

struct MembershipResult {
  Verdict verdict = Verdict::Inconclusive;
  double margin = 0.0;  // min-eigenvalue slack of the certificate problem
  // Member certificates: Q_j per cone generator (minimal systems) or the
  // fiber element over Z (lifted systems).
  std::vector<HermMatrix> q;
  std::optional<MatrixElement> fiber;
  // NotMember certificate: values phi(e_i) in Her_s of a map in the dual
  // system with phi[a] not PSD.
  std::vector<HermMatrix> witness;
  std::string message;
};

/// <w, phi[a] w> for the unnormalized maximally entangled vector
/// w = sum_k e_k (x) e_k (phi into Her_s, a at level s). Negative values
/// prove phi[a] is not PSD.
inline double witness_pairing(const std::vector<HermMatrix>& phi, const MatrixElement& a) {
  if (static_cast<int>(phi.size()) != a.ambient()) throw ShapeError("witness_pairing: dimension mismatch");
  double acc = 0;
  for (int i = 0; i < a.ambient(); ++i) acc += phi[i].mat().cwiseProduct(a.coeff(i).mat()).sum().real();
  return acc;
}

namespace detail {

inline double scale_of(const MatrixElement& a) { return 1.0 + a.norm(); }

// Witness phi(e_i) = conj(M_i) from equality multipliers, normalized.
inline std::vector<HermMatrix> witness_from_multipliers(const std::vector<HermMatrix>& m, int count) {
  std::vector<HermMatrix> out;
  double nrm = 0;
  for (int i = 0; i < count; ++i) nrm += m[i].norm() * m[i].norm();
  nrm = std::sqrt(nrm);
  if (nrm == 0) nrm = 1;
  for (int i = 0; i < count; ++i) out.push_back(HermMatrix::from_trusted(m[i].mat().conjugate() / nrm));
  return out;
}

inline void check_level(const MatrixElement& a, int n) {
  if (a.ambient() != n) throw ShapeError("membership: ambient dimension mismatch");
  if (a.level() > kMaxLevel) throw CapabilityError("membership: level above " + std::to_string(kMaxLevel));
}

}  // namespace detail

/// Pencil membership: sum_i A_i (x) a_i PSD.
struct FsResult {
  bool member = false;
  double min_eig = 0.0;
  std::vector<HermMatrix> witness;  // filled when not a member
};

inline FsResult fs_membership(const FreeSpectrahedron& fs, const MatrixElement& a, double tol = kDefaultTol) {
  if (static_cast<int>(fs.a.size()) != a.ambient()) throw ShapeError("fs_membership: dimension mismatch");
  const HermMatrix m = pair_levelwise(fs.a, a);
  Eigen::SelfAdjointEigenSolver<CMat> es(m.mat());
  FsResult out;
  out.min_eig = es.eigenvalues()(0);
  out.member = out.min_eig >= -tol * detail::scale_of(a);
  if (!out.member) {
    // u = vec of V (d x s); phi(x) = V* (sum x_i A_i) V.
    const CVec u = es.eigenvectors().col(0);
    const int d = fs.d(), s = a.level();
    CMat v(d, s);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < s; ++q) v(p, q) = u(p * s + q);
    for (const auto& ai : fs.a) out.witness.push_back(conjugate(v, ai));
  }
  return out;
}

/// a in C^min_s: a = sum_j c_j (x) Q_j with Q_j PSD.
inline MembershipResult min_membership(const PolyhedralCone& c, const MatrixElement& a, double tol = kDefaultTol) {
  detail::check_level(a, c.dim());
  MembershipResult out;
  const int s = a.level(), m = c.size(), n = c.dim();

  if (s == 1) {
    const RVec x = a.vector();
    if (membership(c, x, tol)) {
      out.verdict = Verdict::Member;
      return out;
    }
    if (n <= kMaxDualDim) {
      out.verdict = Verdict::NotMember;
      const auto dd = dual_generators(c);
      const RVec* best = &dd.facets.front();
      for (const auto& f : dd.facets)
        if (f.dot(x) < best->dot(x)) best = &f;
      out.margin = best->dot(x);
      for (int i = 0; i < n; ++i) out.witness.push_back(HermMatrix::diag({(*best)(i)}));
      return out;
    }
  }

  lmi::Program prog;
  for (int j = 0; j < m; ++j) prog.add_var(s);
  for (int i = 0; i < n; ++i) {
    prog.add_equality(
        [&c, i, m, s](const lmi::Vars& v) {
          CMat acc = CMat::Zero(s, s);
          for (int j = 0; j < m; ++j)
            if (c.generator(j)(i) != 0.0) acc += c.generator(j)(i) * v[j].mat();
          return HermMatrix::from_trusted(acc);
        },
        a.coeff(i));
  }
  for (int j = 0; j < m; ++j) prog.add_psd([j](const lmi::Vars& v) { return v[j]; });
  const auto res = lmi::maximize_min_eig(prog);
  out.message = res.message;
  if (!res.equalities_consistent) {
    // a lies outside span(C) (x) Her_s; cannot happen for proper cones.
    out.verdict = Verdict::NotMember;
    out.margin = -res.equality_residual;
    return out;
  }
  if (!res.solved()) return out;
  out.margin = res.lambda;
  const double scale = detail::scale_of(a);
  if (res.lambda >= -tol * scale) {
    out.verdict = Verdict::Member;
    out.q = res.values;
    return out;
  }
  std::vector<HermMatrix> w = detail::witness_from_multipliers(res.multipliers, n);
  // phi(c_j) must be PSD and phi[a] must pair negatively.
  double worst = 0;
  for (int j = 0; j < m; ++j) {
    CMat acc = CMat::Zero(s, s);
    for (int i = 0; i < n; ++i) acc += c.generator(j)(i) * w[i].mat();
    worst = std::min(worst, min_eig(HermMatrix::from_trusted(acc)) / c.generator(j).norm());
  }
  const double pairing = witness_pairing(w, a);
  if (worst >= -1e-7 && pairing < -tol) {
    out.verdict = Verdict::NotMember;
    out.witness = std::move(w);
  } else {
    out.message = "negative margin without a verified separating map";
  }
  return out;
}

inline MembershipResult membership(const OperatorSystem& sys, const MatrixElement& a, double tol = kDefaultTol);

namespace detail {

// Flattens a target into a pencil when possible (free spectrahedra and
// inverse images of pencils).
inline std::optional<std::vector<HermMatrix>> as_pencil(const OperatorSystem& t) {
  if (const auto* fs = std::get_if<FreeSpectrahedron>(&t.variant())) return fs->a;
  if (const auto* ii = std::get_if<InverseImageSystem>(&t.variant())) {
    auto inner = as_pencil(*ii->target);
    if (!inner) return std::nullopt;
    std::vector<HermMatrix> out;
    const int d = (*inner)[0].dim();
    for (int i = 0; i < ii->psi.domain(); ++i) {
      CMat acc = CMat::Zero(d, d);
      for (int j = 0; j < ii->psi.codomain(); ++j)
        if (ii->psi.m(j, i) != 0.0) acc += ii->psi.m(j, i) * (*inner)[j].mat();
      out.push_back(HermMatrix::from_trusted(acc));
    }
    return out;
  }
  return std::nullopt;
}

inline MembershipResult lifted_membership(const LiftedSystem& l, const MatrixElement& a, double tol) {
  MembershipResult out;
  const int s = a.level();
  const int zdim = l.pi.domain();
  const int n = l.pi.codomain();
  const auto pencil = as_pencil(*l.target);
  const auto* minimal = std::get_if<MinimalSystem>(&l.target->variant());
  if (!pencil && !minimal) throw CapabilityError("lifted membership: target must be a free spectrahedron or minimal");

  lmi::Program prog;
  for (int k = 0; k < zdim; ++k) prog.add_var(s);
  auto lin = [s](const RMat& mat, int row, const lmi::Vars& v, int off, int count) {
    CMat acc = CMat::Zero(s, s);
    for (int k = 0; k < count; ++k)
      if (mat(row, k) != 0.0) acc += mat(row, k) * v[off + k].mat();
    return HermMatrix::from_trusted(acc);
  };
  for (int i = 0; i < n; ++i)
    prog.add_equality([&l, lin, i, zdim](const lmi::Vars& v) { return lin(l.pi.m, i, v, 0, zdim); }, a.coeff(i));

  if (pencil) {
    std::vector<HermMatrix> g;  // G_k = sum_j gamma_jk B_j
    const int d = (*pencil)[0].dim();
    for (int k = 0; k < zdim; ++k) {
      CMat acc = CMat::Zero(d, d);
      for (int j = 0; j < l.gamma.codomain(); ++j)
        if (l.gamma.m(j, k) != 0.0) acc += l.gamma.m(j, k) * (*pencil)[j].mat();
      g.push_back(HermMatrix::from_trusted(acc));
    }
    prog.add_psd([g, zdim](const lmi::Vars& v) {
      std::vector<HermMatrix> z(v.begin(), v.begin() + zdim);
      return pair_levelwise(g, MatrixElement(z));
    });
  } else {
    const PolyhedralCone& dcone = minimal->cone;
    const int mq = dcone.size();
    for (int j = 0; j < mq; ++j) prog.add_var(s);
    const RMat dm = dcone.matrix();
    const int k = dcone.dim();
    for (int r = 0; r < k; ++r) {
      prog.add_equality(
          [&l, lin, dm, r, zdim, mq](const lmi::Vars& v) {
            return lin(l.gamma.m, r, v, 0, zdim) - lin(dm, r, v, zdim, mq);
          },
          HermMatrix::zero(s));
    }
    for (int j = 0; j < mq; ++j) prog.add_psd([j, zdim](const lmi::Vars& v) { return v[zdim + j]; });
  }

  const auto res = lmi::maximize_min_eig(prog);
  out.message = res.message;
  if (!res.equalities_consistent) {
    out.verdict = Verdict::NotMember;
    out.margin = -res.equality_residual;
    out.message = "no fiber element over a";
    return out;
  }
  if (!res.solved()) return out;
  out.margin = res.lambda;
  if (res.lambda >= -tol * scale_of(a)) {
    out.verdict = Verdict::Member;
    out.fiber = MatrixElement(std::vector<HermMatrix>(res.values.begin(), res.values.begin() + zdim));
    return out;
  }
  out.witness = witness_from_multipliers(res.multipliers, n);
  if (witness_pairing(out.witness, a) < -tol) {
    out.verdict = Verdict::NotMember;
  } else {
    out.witness.clear();
    out.message = "negative margin without a separating pairing";
  }
  return out;
}

}  // namespace detail

/// Dispatches on the system variant; returns a three-valued verdict.
inline MembershipResult membership(const OperatorSystem& sys, const MatrixElement& a, double tol) {
  detail::check_level(a, sys.ambient());
  if (const auto* ms = std::get_if<MinimalSystem>(&sys.variant())) return min_membership(ms->cone, a, tol);
  if (const auto* fs = std::get_if<FreeSpectrahedron>(&sys.variant())) {
    const FsResult r = fs_membership(*fs, a, tol);
    MembershipResult out;
    out.verdict = r.member ? Verdict::Member : Verdict::NotMember;
    out.margin = r.min_eig;
    out.witness = r.witness;
    return out;
  }
  if (const auto* ii = std::get_if<InverseImageSystem>(&sys.variant())) {
    MembershipResult inner = membership(*ii->target, apply_levelwise(ii->psi, a), tol);
    if (!inner.witness.empty()) {
      // Pull back: phi(e_i) = sum_j psi_ji phi_T(e_j).
      std::vector<HermMatrix> pulled;
      const int t = inner.witness[0].dim();
      for (int i = 0; i < ii->psi.domain(); ++i) {
        CMat acc = CMat::Zero(t, t);
        for (int j = 0; j < ii->psi.codomain(); ++j)
          if (ii->psi.m(j, i) != 0.0) acc += ii->psi.m(j, i) * inner.witness[j].mat();
        pulled.push_back(HermMatrix::from_trusted(acc));
      }
      inner.witness = std::move(pulled);
    }
    inner.q.clear();
    return inner;
  }
  return detail::lifted_membership(std::get<LiftedSystem>(sys.variant()), a, tol);
}

}  // namespace oplift
