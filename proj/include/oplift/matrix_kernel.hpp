#pragma once

// Dense complex Hermitian linear algebra shared by every other module.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "oplift/errors.hpp"

namespace oplift {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-8;

/// Complex Hermitian matrix. The stored entries are exactly Hermitian:
/// construction symmetrizes (H + H*)/2 and rejects inputs whose asymmetry
/// exceeds 1e-6 * ||H||_F.
class HermMatrix {
 public:
  HermMatrix() = default;

  explicit HermMatrix(const CMat& m) : m_(m) {
    if (m.rows() != m.cols()) throw ShapeError("HermMatrix: matrix is not square");
    if (!m.allFinite()) throw InputError("HermMatrix: non-finite entry");
    const double asym = (m - m.adjoint()).norm();
    if (asym > 1e-6 * m.norm()) {
      throw InputError("HermMatrix: asymmetry " + std::to_string(asym) + " exceeds 1e-6*||H||");
    }
    m_ = (m + m.adjoint()) * 0.5;
    for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) = m_(i, i).real();
  }

  explicit HermMatrix(const RMat& m) : HermMatrix(CMat(m.cast<cplx>())) {}

  static HermMatrix zero(int dim) { return from_trusted(CMat::Zero(dim, dim)); }
  static HermMatrix identity(int dim) { return from_trusted(CMat::Identity(dim, dim)); }
  static HermMatrix diag(const std::vector<double>& d) {
    CMat m = CMat::Zero(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return from_trusted(m);
  }
  /// E_ii
  static HermMatrix unit(int dim, int i) {
    CMat m = CMat::Zero(dim, dim);
    m(i, i) = 1.0;
    return from_trusted(m);
  }
  /// q q*
  static HermMatrix outer(const CVec& q) { return from_trusted(q * q.adjoint()); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& mat() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  double norm() const { return m_.norm(); }
  double trace() const { return m_.trace().real(); }

  HermMatrix operator+(const HermMatrix& o) const {
    check_same(o);
    return from_trusted(m_ + o.m_);
  }
  HermMatrix operator-(const HermMatrix& o) const {
    check_same(o);
    return from_trusted(m_ - o.m_);
  }
  HermMatrix operator-() const { return from_trusted(-m_); }
  HermMatrix operator*(double a) const { return from_trusted(m_ * a); }
  friend HermMatrix operator*(double a, const HermMatrix& h) { return h * a; }
  HermMatrix& operator+=(const HermMatrix& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }

  /// Re tr(this * o), the real trace inner product.
  double inner(const HermMatrix& o) const {
    check_same(o);
    return (m_.conjugate().cwiseProduct(o.m_)).sum().real();
  }

  /// Skips validation; callers guarantee m is Hermitian up to round-off.
  static HermMatrix from_trusted(const CMat& m) {
    HermMatrix h;
    h.m_ = (m + m.adjoint()) * 0.5;
    return h;
  }

 private:
  void check_same(const HermMatrix& o) const {
    if (o.dim() != dim()) throw ShapeError("HermMatrix: dimension mismatch");
  }

  CMat m_;
};

/// Canonical trace-orthonormal basis of Her_s: for each i, E_ii, and for each
/// i<j, (E_ij+E_ji)/sqrt2 followed by (iE_ij-iE_ji)/sqrt2, in row order.
inline std::vector<HermMatrix> herm_basis(int s) {
  std::vector<HermMatrix> out;
  out.reserve(static_cast<std::size_t>(s) * s);
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < s; ++i) {
    for (int j = i; j < s; ++j) {
      CMat m = CMat::Zero(s, s);
      if (i == j) {
        m(i, i) = 1.0;
        out.push_back(HermMatrix::from_trusted(m));
        continue;
      }
      m(i, j) = r;
      m(j, i) = r;
      out.push_back(HermMatrix::from_trusted(m));
      m(i, j) = cplx(0, r);
      m(j, i) = cplx(0, -r);
      out.push_back(HermMatrix::from_trusted(m));
    }
  }
  return out;
}

/// Coordinates of H in herm_basis(dim): coords[k] = tr(B_k H).
inline RVec herm_coords(const HermMatrix& h) {
  const int s = h.dim();
  RVec v(s * s);
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (int i = 0; i < s; ++i) {
    for (int j = i; j < s; ++j) {
      if (i == j) {
        v(k++) = h(i, i).real();
      } else {
        v(k++) = r2 * h(i, j).real();
        v(k++) = r2 * h(i, j).imag();
      }
    }
  }
  return v;
}

inline HermMatrix herm_from_coords(int s, const RVec& v) {
  if (v.size() != s * s) throw ShapeError("herm_from_coords: expected s^2 coordinates");
  CMat m = CMat::Zero(s, s);
  const double r = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int i = 0; i < s; ++i) {
    for (int j = i; j < s; ++j) {
      if (i == j) {
        m(i, i) = v(k++);
      } else {
        const double re = v(k++);
        const double im = v(k++);
        m(i, j) = cplx(re * r, im * r);
        m(j, i) = std::conj(m(i, j));
      }
    }
  }
  return HermMatrix::from_trusted(m);
}

struct PsdCheck {
  bool is_psd = false;
  double min_eig = 0.0;
};

inline RVec eigenvalues(const HermMatrix& h) {
  if (h.dim() == 0) return RVec();
  Eigen::SelfAdjointEigenSolver<CMat> es(h.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eig(const HermMatrix& h) {
  if (h.dim() == 0) return 0.0;
  return eigenvalues(h).minCoeff();
}

inline PsdCheck psd_check(const HermMatrix& h, double tol = kDefaultTol) {
  if (tol < 0) throw InputError("psd_check: negative tolerance");
  const double m = min_eig(h);
  return {m >= -tol, m};
}

/// Unique PSD square root; eigenvalues in [-tol, 0) are clipped to zero.
inline HermMatrix psd_sqrt(const HermMatrix& h, double tol = kDefaultTol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h.mat());
  const RVec& ev = es.eigenvalues();
  if (h.dim() > 0 && ev.minCoeff() < -tol) {
    throw DomainError("psd_sqrt: matrix is not PSD", ev.minCoeff());
  }
  RVec root = ev.cwiseMax(0.0).cwiseSqrt();
  const CMat& u = es.eigenvectors();
  return HermMatrix::from_trusted(u * root.cast<cplx>().asDiagonal() * u.adjoint());
}

/// P = sum_k q_k q_k*, one vector per eigenvalue above tol.
inline std::vector<CVec> rank1_decompose(const HermMatrix& p, double tol = kDefaultTol) {
  std::vector<CVec> out;
  if (p.dim() == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMat> es(p.mat());
  const RVec& ev = es.eigenvalues();
  if (ev.minCoeff() < -tol) throw DomainError("rank1_decompose: matrix is not PSD", ev.minCoeff());
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k) {
    if (ev(k) > tol) out.emplace_back(es.eigenvectors().col(k) * std::sqrt(ev(k)));
  }
  return out;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline HermMatrix kron(const HermMatrix& a, const HermMatrix& b) {
  return HermMatrix::from_trusted(kron(a.mat(), b.mat()));
}

/// V* X V for rectangular V (s x t) and X in Her_s.
inline HermMatrix conjugate(const CMat& v, const HermMatrix& x) {
  if (v.rows() != x.dim()) throw ShapeError("conjugate: V must have dim(X) rows");
  return HermMatrix::from_trusted(v.adjoint() * x.mat() * v);
}

/// Real symmetric embedding [[A, -B], [B, A]] of H = A + iB.
inline RMat realify(const HermMatrix& h) {
  const int s = h.dim();
  const RMat a = h.mat().real();
  const RMat b = h.mat().imag();
  RMat out(2 * s, 2 * s);
  out << a, -b, b, a;
  return out;
}

/// Left inverse of realify on the symmetric matrices: returns W with
/// <realify(F), X> = 2 Re tr(F W) for every Hermitian F. W is PSD when X is.
inline HermMatrix derealify(const RMat& x) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0) throw ShapeError("derealify: need even square matrix");
  const Eigen::Index s = x.rows() / 2;
  const RMat p = x.topLeftCorner(s, s);
  const RMat q = x.topRightCorner(s, s);
  const RMat t = x.bottomRightCorner(s, s);
  CMat w(s, s);
  w.real() = (p + t) * 0.5;
  w.imag() = -(q - q.transpose()) * 0.5;
  return HermMatrix::from_trusted(w);
}

/// Block-diagonal direct sum.
inline HermMatrix direct_sum(const HermMatrix& a, const HermMatrix& b) {
  CMat m = CMat::Zero(a.dim() + b.dim(), a.dim() + b.dim());
  m.topLeftCorner(a.dim(), a.dim()) = a.mat();
  m.bottomRightCorner(b.dim(), b.dim()) = b.mat();
  return HermMatrix::from_trusted(m);
}

}  // namespace oplift
