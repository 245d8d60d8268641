#include <gtest/gtest.h>

#include <random>

#include "oplift/opsys.hpp"

using namespace oplift;

namespace {

RVec vec(std::initializer_list<double> v) {
  RVec out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

CMat random_cmat(std::mt19937& rng, int r, int c) {
  std::normal_distribution<double> nd;
  CMat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

HermMatrix random_herm(std::mt19937& rng, int s) {
  const CMat g = random_cmat(rng, s, s);
  return HermMatrix::from_trusted((g + g.adjoint()) * 0.5);
}

HermMatrix random_psd(std::mt19937& rng, int s) {
  const CMat g = random_cmat(rng, s, s);
  return HermMatrix::from_trusted(g * g.adjoint());
}

// sum_j c_j (x) Q_j with Q_j = random PSD + mix * random Hermitian.
MatrixElement random_element(std::mt19937& rng, const PolyhedralCone& c, int s, double mix) {
  MatrixElement a = MatrixElement::zero(c.dim(), s);
  for (int j = 0; j < c.size(); ++j)
    a = a + MatrixElement::tensor(c.generator(j), random_psd(rng, s) + random_herm(rng, s) * mix);
  return a;
}

MatrixElement random_member(std::mt19937& rng, const PolyhedralCone& c, int s) { return random_element(rng, c, s, 0.0); }

PolyhedralCone square_cone() {
  return PolyhedralCone(3, {vec({1, 1, 1}), vec({1, -1, 1}), vec({-1, -1, 1}), vec({-1, 1, 1})});
}

std::vector<HermMatrix> diagonal_units(int n) {
  std::vector<HermMatrix> out;
  for (int i = 0; i < n; ++i) out.push_back(HermMatrix::unit(n, i));
  return out;
}

}  // namespace

TEST(Opsys, ApplyLevelwise) {
  const MatrixElement a({HermMatrix::identity(2), HermMatrix::diag({1, -1})});
  const LinearMap proj(RMat::Identity(1, 2));
  const MatrixElement b = apply_levelwise(proj, a);
  ASSERT_EQ(b.ambient(), 1);
  EXPECT_NEAR((b.coeff(0) - HermMatrix::identity(2)).norm(), 0.0, 0.0);

  const MatrixElement c = apply_levelwise(LinearMap::identity(2), a);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR((c.coeff(i) - a.coeff(i)).norm(), 0.0, 0.0);

  const LinearMap phi = LinearMap::into_herm({HermMatrix::unit(2, 0), HermMatrix::unit(2, 1)});
  const MatrixElement e1i2({HermMatrix::identity(2), HermMatrix::zero(2)});
  const HermMatrix out = apply_to_herm(phi, e1i2);
  EXPECT_NEAR((out - kron(HermMatrix::unit(2, 0), HermMatrix::identity(2))).norm(), 0.0, 1e-15);
  EXPECT_THROW(apply_levelwise(LinearMap::identity(3), a), ShapeError);
}

TEST(Opsys, MinMembershipExamples) {
  const auto c = PolyhedralCone::orthant(2);
  auto r = min_membership(c, MatrixElement({HermMatrix::identity(2), HermMatrix::identity(2)}));
  EXPECT_EQ(r.verdict, Verdict::Member);
  ASSERT_EQ(r.q.size(), 2u);
  for (const auto& q : r.q) EXPECT_NEAR((q - HermMatrix::identity(2)).norm(), 0.0, 1e-7);

  const MatrixElement bad({HermMatrix::diag({1, -1}), HermMatrix::zero(2)});
  r = min_membership(c, bad);
  EXPECT_EQ(r.verdict, Verdict::NotMember);
  ASSERT_EQ(r.witness.size(), 2u);
  EXPECT_LT(witness_pairing(r.witness, bad), 0.0);
  EXPECT_LT(min_eig(pair_levelwise(r.witness, bad)), 0.0);
  for (const auto& w : r.witness) EXPECT_GE(min_eig(w), -1e-7);

  r = min_membership(c, MatrixElement::zero(2, 2));
  EXPECT_EQ(r.verdict, Verdict::Member);
}

TEST(Opsys, FsMembershipExamples) {
  const FreeSpectrahedron fs{diagonal_units(2)};
  auto r = fs_membership(fs, MatrixElement({HermMatrix::identity(2), HermMatrix::identity(2)}));
  EXPECT_TRUE(r.member);
  EXPECT_NEAR(r.min_eig, 1.0, 1e-12);
  r = fs_membership(fs, MatrixElement::zero(2, 2));
  EXPECT_TRUE(r.member);
  EXPECT_NEAR(r.min_eig, 0.0, 1e-12);
  const MatrixElement bad({HermMatrix::diag({1, -1}), HermMatrix::zero(2)});
  r = fs_membership(fs, bad);
  EXPECT_FALSE(r.member);
  EXPECT_NEAR(r.min_eig, -1.0, 1e-12);
  EXPECT_NEAR(witness_pairing(r.witness, bad), -1.0, 1e-12);
}

TEST(Opsys, ConstructionChecks) {
  EXPECT_THROW(OperatorSystem::minimal(PolyhedralCone(2, {vec({1, 0}), vec({-1, 0})})), InputError);
  EXPECT_THROW(OperatorSystem::free_spectrahedron({HermMatrix::unit(2, 0)}), InputError);
  EXPECT_NO_THROW(OperatorSystem::psd(2));
  const auto t = OperatorSystem::psd(2);
  EXPECT_THROW(OperatorSystem::lifted(LinearMap(RMat::Identity(2, 4)), LinearMap(RMat::Zero(4, 4)), t),
               ConstructionError);
}

TEST(Opsys, MembershipPerVariant) {
  const MatrixElement good({HermMatrix::identity(2), HermMatrix::identity(2)});
  const MatrixElement bad({HermMatrix::diag({1, -1}), HermMatrix::zero(2)});
  const auto minimal = OperatorSystem::minimal(PolyhedralCone::orthant(2));
  const auto fs = OperatorSystem::free_spectrahedron(diagonal_units(2));
  const auto inv = OperatorSystem::inverse_image(LinearMap::into_herm(diagonal_units(2)), OperatorSystem::psd(2));
  const auto lifted =
      OperatorSystem::lifted(LinearMap::identity(2), LinearMap::into_herm(diagonal_units(2)), OperatorSystem::psd(2));
  const auto lifted_min = OperatorSystem::lifted(LinearMap::identity(2), LinearMap::identity(2), minimal);
  for (const auto& sys : {minimal, fs, inv, lifted, lifted_min}) {
    EXPECT_EQ(membership(*sys, good).verdict, Verdict::Member) << sys->kind();
    const auto r = membership(*sys, bad);
    EXPECT_EQ(r.verdict, Verdict::NotMember) << sys->kind();
    ASSERT_EQ(r.witness.size(), 2u) << sys->kind();
    EXPECT_LT(witness_pairing(r.witness, bad), 0.0) << sys->kind();
  }
  EXPECT_THROW(membership(*minimal, MatrixElement::zero(2, 7)), CapabilityError);
  EXPECT_THROW(membership(*minimal, MatrixElement::zero(3, 2)), ShapeError);
}

TEST(Opsys, Compression) {
  const MatrixElement a({HermMatrix(RMat((RMat(2, 2) << 1, 2, 2, 3).finished())), HermMatrix::diag({4, 5})});
  const MatrixElement same = compression(a, CMat::Identity(2, 2));
  for (int i = 0; i < 2; ++i) EXPECT_NEAR((same.coeff(i) - a.coeff(i)).norm(), 0.0, 0.0);
  CMat e1 = CMat::Zero(2, 1);
  e1(0, 0) = 1;
  const MatrixElement corner = compression(a, e1);
  EXPECT_EQ(corner.level(), 1);
  EXPECT_EQ(corner.vector(), vec({1, 4}));
  EXPECT_THROW(compression(a, CMat::Identity(3, 3)), ShapeError);
}

TEST(Opsys, CompressionAxiomAndDirectSums) {
  std::mt19937 rng(21);
  const PolyhedralCone sq = square_cone();
  const auto minimal = OperatorSystem::minimal(sq);
  const auto fs = OperatorSystem::free_spectrahedron(
      {HermMatrix::diag({1, 0, 1}), HermMatrix::diag({0, 1, 2}), HermMatrix::identity(3) * 3.0});
  for (int trial = 0; trial < 12; ++trial) {
    const int s = 1 + trial % 3, t = 1 + (trial / 3) % 3;
    const CMat v = random_cmat(rng, s, t);
    const MatrixElement a = random_member(rng, sq, s);
    EXPECT_EQ(membership(*minimal, a).verdict, Verdict::Member);
    EXPECT_EQ(membership(*minimal, compression(a, v)).verdict, Verdict::Member);
    const MatrixElement b = random_member(rng, sq, t);
    EXPECT_EQ(membership(*minimal, direct_sum(a, b)).verdict, Verdict::Member);

    // Pencil members: project a random element into the system by adding a multiple of the interior point.
    MatrixElement f({random_herm(rng, s), random_herm(rng, s), random_herm(rng, s)});
    const double lam = fs_membership(std::get<FreeSpectrahedron>(fs->variant()), f).min_eig;
    f = f + MatrixElement::tensor(vec({0, 0, 1}), HermMatrix::identity(s)) * (std::max(0.0, -lam) / 3.0 + 0.01);
    EXPECT_EQ(membership(*fs, f).verdict, Verdict::Member);
    EXPECT_EQ(membership(*fs, compression(f, v)).verdict, Verdict::Member);
    EXPECT_EQ(membership(*fs, direct_sum(f, compression(f, v))).verdict, Verdict::Member);
  }
}

TEST(Opsys, LevelOneAgreesWithConeMembership) {
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> u(-1, 1);
  const PolyhedralCone sq = square_cone();
  for (int trial = 0; trial < 40; ++trial) {
    const RVec x = vec({u(rng), u(rng), u(rng)});
    const bool expected = membership(sq, x);
    const auto r = min_membership(sq, MatrixElement::from_vector(x));
    EXPECT_EQ(r.verdict, expected ? Verdict::Member : Verdict::NotMember);
  }
}

TEST(Opsys, SimplexMinimalEqualsDiagonalSpectrahedron) {
  std::mt19937 rng(23);
  for (int n = 2; n <= 3; ++n) {
    const auto c = PolyhedralCone::orthant(n);
    const FreeSpectrahedron fs{diagonal_units(n)};
    for (int s = 1; s <= 3; ++s) {
      for (int trial = 0; trial < 8; ++trial) {
        const MatrixElement a = random_element(rng, c, s, trial % 2 ? 0.7 : 0.0);
        const auto r = min_membership(c, a);
        ASSERT_NE(r.verdict, Verdict::Inconclusive);
        EXPECT_EQ(r.verdict == Verdict::Member, fs_membership(fs, a).member) << "n=" << n << " s=" << s;
      }
    }
  }
}

TEST(Opsys, WitnessesSeparate) {
  std::mt19937 rng(24);
  const PolyhedralCone sq = square_cone();
  int rejected = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const int s = 2 + trial % 2;
    const MatrixElement a = random_element(rng, sq, s, 1.5);
    const auto r = min_membership(sq, a);
    ASSERT_NE(r.verdict, Verdict::Inconclusive);
    if (r.verdict != Verdict::NotMember) continue;
    ++rejected;
    EXPECT_LT(min_eig(pair_levelwise(r.witness, a)), 0.0);
    for (int k = 0; k < 20; ++k) {
      const MatrixElement b = random_member(rng, sq, s);
      const HermMatrix v = pair_levelwise(r.witness, b);
      EXPECT_GE(min_eig(v), -1e-7 * (1 + v.norm()));
    }
  }
  EXPECT_GT(rejected, 3);
}
