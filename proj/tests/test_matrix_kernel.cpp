#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "oplift/matrix_kernel.hpp"

using namespace oplift;

namespace {

CMat random_cmat(std::mt19937& rng, int r, int c) {
  std::normal_distribution<double> nd;
  CMat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

HermMatrix random_herm(std::mt19937& rng, int s) {
  const CMat g = random_cmat(rng, s, s);
  return HermMatrix::from_trusted(g + g.adjoint());
}

HermMatrix random_psd(std::mt19937& rng, int s, int rank) {
  const CMat g = random_cmat(rng, s, rank);
  return HermMatrix::from_trusted(g * g.adjoint());
}

// Largest eigenvalue of sigma*I - H by power iteration with Rayleigh quotients.
double power_min_eig(const HermMatrix& h) {
  const int s = h.dim();
  const double sigma = h.mat().cwiseAbs().rowwise().sum().maxCoeff();
  const CMat b = sigma * CMat::Identity(s, s) - h.mat();
  CVec v = CVec::Ones(s);
  for (int k = 0; k < s; ++k) v(k) += cplx(0.1 * k, 0.01 * k * k);
  v.normalize();
  double rq = 0;
  for (int it = 0; it < 200000; ++it) {
    CVec w = b * v;
    const double next = v.dot(w).real();
    v = w.normalized();
    if (it > 50 && std::abs(next - rq) <= 1e-15 * (1 + std::abs(next))) {
      rq = next;
      break;
    }
    rq = next;
  }
  return sigma - rq;
}

}  // namespace

TEST(MatrixKernel, PsdCheckExamples) {
  auto r = psd_check(HermMatrix::identity(3), 1e-9);
  EXPECT_TRUE(r.is_psd);
  EXPECT_NEAR(r.min_eig, 1.0, 1e-12);
  r = psd_check(HermMatrix::diag({1, -1}), 1e-9);
  EXPECT_FALSE(r.is_psd);
  EXPECT_NEAR(r.min_eig, -1.0, 1e-12);
  r = psd_check(HermMatrix::diag({1, 2, 0}), 1e-9);
  EXPECT_TRUE(r.is_psd);
  EXPECT_NEAR(r.min_eig, 0.0, 1e-12);
}

TEST(MatrixKernel, ConstructionValidates) {
  CMat bad(2, 2);
  bad << 1, 2, 0, 1;
  EXPECT_THROW(HermMatrix{bad}, InputError);
  CMat nan = CMat::Zero(2, 2);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(HermMatrix{nan}, InputError);
  EXPECT_THROW(HermMatrix(CMat(CMat::Zero(2, 3))), ShapeError);
  CMat tiny(2, 2);
  tiny << 1, cplx(1, 1e-9), cplx(1, 0), 2;
  const HermMatrix h(tiny);
  EXPECT_EQ(h(0, 1), std::conj(h(1, 0)));
}

TEST(MatrixKernel, BasisIsOrthonormalAndCoordinatesRoundTrip) {
  std::mt19937 rng(1);
  for (int s = 1; s <= 4; ++s) {
    const auto b = herm_basis(s);
    ASSERT_EQ(static_cast<int>(b.size()), s * s);
    for (int i = 0; i < s * s; ++i)
      for (int j = 0; j < s * s; ++j) EXPECT_NEAR(b[i].inner(b[j]), i == j ? 1.0 : 0.0, 1e-14);
    const HermMatrix h = random_herm(rng, s);
    const RVec c = herm_coords(h);
    for (int i = 0; i < s * s; ++i) EXPECT_NEAR(c(i), b[i].inner(h), 1e-12);
    EXPECT_NEAR((herm_from_coords(s, c) - h).norm(), 0.0, 1e-12);
  }
}

TEST(MatrixKernel, MinEigMatchesPowerIteration) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int s = 1 + trial % 6;
    const HermMatrix h = random_herm(rng, s);
    const double oracle = power_min_eig(h);
    EXPECT_NEAR(psd_check(h).min_eig, oracle, 1e-8 * (1 + std::abs(oracle))) << "trial " << trial;
  }
}

TEST(MatrixKernel, PsdSqrt) {
  EXPECT_NEAR((psd_sqrt(HermMatrix::identity(3)) - HermMatrix::identity(3)).norm(), 0.0, 1e-14);
  EXPECT_NEAR((psd_sqrt(HermMatrix::diag({4, 9})) - HermMatrix::diag({2, 3})).norm(), 0.0, 1e-12);
  std::mt19937 rng(3);
  const CVec q = random_cmat(rng, 3, 1).col(0);
  const HermMatrix p = HermMatrix::outer(q);
  const HermMatrix r = psd_sqrt(p);
  EXPECT_NEAR((r - p * (1.0 / q.norm())).norm(), 0.0, 1e-10);
  EXPECT_LE(HermMatrix::from_trusted(r.mat() * r.mat()).operator-(p).norm(), 10 * kDefaultTol * p.norm());
  try {
    psd_sqrt(HermMatrix::diag({1, -2}));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NEAR(e.min_eig(), -2.0, 1e-12);
  }
}

TEST(MatrixKernel, PsdSqrtFixedPoint) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 1 + trial % 5;
    const HermMatrix q = random_psd(rng, s, s);
    const HermMatrix qq = HermMatrix::from_trusted(q.mat() * q.mat());
    EXPECT_NEAR((psd_sqrt(qq) - q).norm(), 0.0, 1e-8 * (1 + q.norm()));
  }
}

TEST(MatrixKernel, Rank1Decompose) {
  auto v = rank1_decompose(HermMatrix::diag({1, 0}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NEAR(std::abs(v[0](0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(v[0](1)), 0.0, 1e-12);
  v = rank1_decompose(HermMatrix::identity(2));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(std::abs(v[0].dot(v[1])), 0.0, 1e-12);
  RMat p(2, 2);
  p << 2, 1, 1, 1;
  const HermMatrix h(p);
  v = rank1_decompose(h);
  ASSERT_EQ(v.size(), 2u);
  CMat sum = CMat::Zero(2, 2);
  for (const auto& q : v) sum += q * q.adjoint();
  EXPECT_NEAR((sum - h.mat()).norm(), 0.0, 10 * kDefaultTol * h.norm());
  EXPECT_THROW(rank1_decompose(HermMatrix::diag({1, -1})), DomainError);

  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 2 + trial % 4;
    const int rank = 1 + trial % s;
    const HermMatrix x = random_psd(rng, s, rank);
    const auto qs = rank1_decompose(x);
    EXPECT_EQ(static_cast<int>(qs.size()), rank);
    CMat acc = CMat::Zero(s, s);
    for (const auto& q : qs) acc += q * q.adjoint();
    EXPECT_NEAR((acc - x.mat()).norm(), 0.0, 10 * kDefaultTol * x.norm());
  }
}

TEST(MatrixKernel, KronAndConjugate) {
  EXPECT_NEAR((kron(HermMatrix::identity(2), HermMatrix::identity(3)) - HermMatrix::identity(6)).norm(), 0.0, 0);
  CMat e1 = CMat::Zero(2, 1);
  e1(0, 0) = 1;
  const HermMatrix c = conjugate(e1, HermMatrix::identity(2));
  ASSERT_EQ(c.dim(), 1);
  EXPECT_EQ(c(0, 0), cplx(1, 0));
  EXPECT_THROW(conjugate(CMat::Zero(3, 1), HermMatrix::identity(2)), ShapeError);

  std::mt19937 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const int s = 1 + trial % 4;
    const int t = 1 + (trial / 4) % 4;
    const HermMatrix x = random_psd(rng, s, 1 + trial % s);
    const HermMatrix y = conjugate(random_cmat(rng, s, t), x);
    EXPECT_TRUE(psd_check(y, 1e-9 * (1 + y.norm())).is_psd);
    const HermMatrix a = random_herm(rng, 2), b = random_herm(rng, s);
    // (A (x) B)(C (x) D) = AC (x) BD
    const CMat lhs = kron(a.mat(), b.mat()) * kron(a.mat(), x.mat());
    const CMat rhs = kron(a.mat() * a.mat(), b.mat() * x.mat());
    EXPECT_NEAR((lhs - rhs).norm(), 0.0, 1e-10 * (1 + lhs.norm()));
  }
}

TEST(MatrixKernel, Realify) {
  RMat a(2, 2);
  a << 1, 2, 2, 5;
  const RMat r = realify(HermMatrix(a));
  EXPECT_EQ(r.topLeftCorner(2, 2), a);
  EXPECT_EQ(r.bottomRightCorner(2, 2), a);
  EXPECT_TRUE(r.topRightCorner(2, 2).isZero(0));

  CMat m(2, 2);
  m << 0, cplx(0, 1), cplx(0, -1), 0;
  Eigen::SelfAdjointEigenSolver<RMat> es(realify(HermMatrix(m)));
  const RVec ev = es.eigenvalues();
  EXPECT_NEAR(ev(0), -1, 1e-12);
  EXPECT_NEAR(ev(1), -1, 1e-12);
  EXPECT_NEAR(ev(2), 1, 1e-12);
  EXPECT_NEAR(ev(3), 1, 1e-12);

  std::mt19937 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int s = 1 + trial % 5;
    const HermMatrix h1 = random_herm(rng, s), h2 = random_herm(rng, s);
    Eigen::SelfAdjointEigenSolver<RMat> rs(realify(h1), Eigen::EigenvaluesOnly);
    EXPECT_NEAR(rs.eigenvalues().minCoeff(), min_eig(h1), 1e-10 * (1 + h1.norm()));
    // Order isomorphism: H1 <= H1 + P for PSD P, and the realified difference agrees.
    const HermMatrix p = random_psd(rng, s, 1 + trial % s);
    Eigen::SelfAdjointEigenSolver<RMat> d(realify(h1 + p) - realify(h1), Eigen::EigenvaluesOnly);
    EXPECT_GE(d.eigenvalues().minCoeff(), -1e-10);
    Eigen::SelfAdjointEigenSolver<RMat> d2(realify(h2) - realify(h1), Eigen::EigenvaluesOnly);
    EXPECT_NEAR(d2.eigenvalues().minCoeff(), min_eig(h2 - h1), 1e-10 * (1 + (h2 - h1).norm()));
    // derealify inverts realify and pairs correctly.
    EXPECT_NEAR((derealify(realify(h1)) - h1).norm(), 0.0, 1e-12);
    const RMat x = realify(p);
    EXPECT_NEAR((realify(h2).cwiseProduct(x)).sum(), 2 * h2.inner(derealify(x)), 1e-9 * (1 + x.norm() * h2.norm()));
  }
}
