#include <gtest/gtest.h>

#include <random>

#include "oplift/sos.hpp"

namespace {

using namespace oplift;

HermMatrix sym3(std::initializer_list<double> v) {
  CMat m(3, 3);
  auto it = v.begin();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = *it++;
  return HermMatrix(m);
}

HermMatrixPoly rank1_square() {
  HermMatrixPoly h(2, 2);
  CMat a = CMat::Zero(2, 2);
  a(0, 0) = 1;
  h.add({2, 0}, HermMatrix::from_trusted(a));
  a = CMat::Zero(2, 2);
  a(1, 1) = 1;
  h.add({0, 2}, HermMatrix::from_trusted(a));
  a = CMat::Zero(2, 2);
  a(0, 1) = a(1, 0) = 1;
  h.add({1, 1}, HermMatrix::from_trusted(a));
  return h;
}

// H(x) = L(x)^* L(x) with L(x) = sum_i x_i L_i of shape 3 x 2.
HermMatrixPoly gram_square(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  std::vector<CMat> l(3, CMat(3, 2));
  for (auto& m : l)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  HermMatrixPoly p(3, 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Exponent e(3, 0);
      e[i]++;
      e[j]++;
      CMat c = l[i].adjoint() * l[j];
      if (i != j) c += l[j].adjoint() * l[i];
      p.add(e, HermMatrix::from_trusted((c + c.adjoint()) * 0.5));
    }
  }
  return p;
}

std::vector<Exponent> bilinear_basis(int n, int aux) {
  std::vector<Exponent> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < aux; ++j) {
      Exponent e(static_cast<std::size_t>(n + aux), 0);
      e[i] = 1;
      e[n + j] = 1;
      out.push_back(e);
    }
  return out;
}

TEST(Sos, ChoiEvaluation) {
  const auto h = choi_example();
  RVec p(3);
  p << 1, 0, 0;
  EXPECT_LT((eval_poly(h, p) - HermMatrix::diag({1, 2, 0})).norm(), 1e-15);
  p << 1, 1, 1;
  EXPECT_LT((eval_poly(h, p) - sym3({3, -1, -1, -1, 3, -1, -1, -1, 3})).norm(), 1e-15);
  EXPECT_LT(eval_poly(h, RVec::Zero(3)).norm(), 1e-15);
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    RVec x(3);
    for (int i = 0; i < 3; ++i) x(i) = nd(rng);
    EXPECT_LT((eval_poly(h, x) - eval_poly(h, RVec(-x))).norm(), 1e-13);
  }
}

TEST(Sos, ChoiCoefficients) {
  const auto h = choi_example();
  EXPECT_LT((h.coeff({2, 0, 0}) - HermMatrix::diag({1, 2, 0})).norm(), 1e-15);
  EXPECT_LT((h.coeff({1, 1, 0}) - sym3({0, -1, 0, -1, 0, 0, 0, 0, 0})).norm(), 1e-15);
  EXPECT_LT((h.coeff({0, 0, 2}) - HermMatrix::diag({2, 0, 1})).norm(), 1e-15);
  EXPECT_TRUE(h.is_homogeneous());
  EXPECT_EQ(h.degree(), 2);
  EXPECT_TRUE(h.is_real());
}

TEST(Sos, PolyValidation) {
  HermMatrixPoly h(2, 2);
  EXPECT_THROW(h.add({1, 0, 0}, HermMatrix::identity(2)), ShapeError);
  EXPECT_THROW(h.add({1, 0}, HermMatrix::identity(3)), ShapeError);
  EXPECT_THROW(h.add({-1, 0}, HermMatrix::identity(2)), InputError);
  EXPECT_THROW(HermMatrixPoly(1, 0), InputError);
  EXPECT_THROW(eval_poly(h, RVec::Zero(3)), ShapeError);
}

TEST(Sos, MonomialBases) {
  EXPECT_EQ(monomials_of_degree(3, 2).size(), 6u);
  EXPECT_EQ(monomials_up_to(3, 2).size(), 10u);
  EXPECT_EQ(default_sos_basis(choi_example()).size(), 3u);
  HermMatrixPoly inhom(1, 1);
  inhom.add({0}, HermMatrix::identity(1)).add({3}, HermMatrix::identity(1));
  EXPECT_EQ(default_sos_basis(inhom).size(), 3u);
}

TEST(Sos, RankOneSquare) {
  const auto h = rank1_square();
  const auto r = sos_certify(h);
  ASSERT_EQ(r.status, SosStatus::Certified) << r.message;
  ASSERT_EQ(r.factors.size(), 1u);
  EXPECT_LT(r.reassembly_error, 1e-7);
  // The factor is [x y] up to a unit phase.
  const auto& f = r.factors[0];
  const CMat px = f.terms.at({1, 0}), py = f.terms.at({0, 1});
  EXPECT_NEAR(std::abs(px(0, 0)), 1.0, 1e-6);
  EXPECT_NEAR(std::abs(px(0, 1)), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(py(0, 1)), 1.0, 1e-6);
  EXPECT_NEAR(std::abs(py(0, 0)), 0.0, 1e-6);
}

TEST(Sos, ConstructThenCertify) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    const auto h = gram_square(rng);
    const auto r = sos_certify(h);
    ASSERT_EQ(r.status, SosStatus::Certified) << r.message;
    EXPECT_LT(r.reassembly_error, 1e-7);
    ASSERT_TRUE(r.gram);
    EXPECT_GE(min_eig(*r.gram), -1e-8);
    for (int k = 0; k < 5; ++k) {
      RVec x(3);
      for (int i = 0; i < 3; ++i) x(i) = nd(rng);
      CMat acc = CMat::Zero(2, 2);
      for (const auto& f : r.factors) acc += f.eval(x).adjoint() * f.eval(x);
      EXPECT_LT((acc - eval_poly(h, x).mat()).norm(), 1e-7 * (1.0 + eval_poly(h, x).norm()));
    }
  }
}

TEST(Sos, ChoiIsNotSos) {
  const auto h = choi_example();
  const auto r = sos_certify(h);
  ASSERT_EQ(r.status, SosStatus::NotSos) << r.message;
  EXPECT_FALSE(r.structural);
  EXPECT_LT(r.lambda, -1e-3);
  // Independent check of the witness: PSD moment matrix, negative pairing.
  std::map<Exponent, HermMatrix> w(r.witness.begin(), r.witness.end());
  const int nb = static_cast<int>(r.basis.size()), t = 3;
  CMat mom(nb * t, nb * t);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) {
      Exponent g(3, 0);
      for (int i = 0; i < 3; ++i) g[i] = r.basis[a][i] + r.basis[b][i];
      mom.block(a * t, b * t, t, t) = w.at(g).mat();
    }
  EXPECT_GE(min_eig(HermMatrix(mom)), -1e-10);
  double pairing = 0.0;
  for (const auto& [g, m] : w) pairing += m.inner(h.coeff(g));
  EXPECT_LT(pairing, -1e-4);
}

TEST(Sos, StructuralNotSos) {
  HermMatrixPoly h(1, 1);
  h.add({2}, HermMatrix::identity(1));
  const auto r = sos_certify(h, {{0}});
  EXPECT_EQ(r.status, SosStatus::NotSos);
  EXPECT_TRUE(r.structural);
  EXPECT_EQ(r.offending, "x0^2");
}

TEST(Sos, NegativeConstantNotSos) {
  const auto h = HermMatrixPoly::constant(2, HermMatrix::identity(2) * -1.0);
  EXPECT_EQ(sos_certify(h).status, SosStatus::NotSos);
}

TEST(Sos, ScalarCompression) {
  HermMatrixPoly s(2, 1);
  s.add({2, 0}, HermMatrix::identity(1)).add({1, 1}, HermMatrix::identity(1) * -0.5);
  const auto same = scalar_compress(s);
  EXPECT_EQ(same.terms().size(), s.terms().size());

  const auto c = scalar_compress(choi_example());
  EXPECT_EQ(c.n_vars(), 6);
  EXPECT_EQ(c.size(), 1);
  EXPECT_NEAR(c.coeff({2, 0, 0, 2, 0, 0})(0, 0).real(), 1.0, 1e-15);  // x^2 a^2
  EXPECT_NEAR(c.coeff({0, 0, 2, 2, 0, 0})(0, 0).real(), 2.0, 1e-15);  // z^2 a^2
  EXPECT_NEAR(c.coeff({1, 1, 0, 1, 1, 0})(0, 0).real(), -2.0, 1e-15); // x y a b
  EXPECT_NEAR(c.coeff({2, 0, 0, 0, 2, 0})(0, 0).real(), 2.0, 1e-15);  // x^2 b^2

  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  const auto h = choi_example();
  for (int k = 0; k < 20; ++k) {
    RVec xv(6);
    for (int i = 0; i < 6; ++i) xv(i) = nd(rng);
    const CVec v = xv.tail(3).cast<cplx>();
    const double direct = (v.adjoint() * eval_poly(h, xv.head(3)).mat() * v)(0, 0).real();
    EXPECT_NEAR(eval_poly(c, xv)(0, 0).real(), direct, 1e-10 * (1.0 + std::abs(direct)));
  }
  // Complex coefficients use real and imaginary parts of v.
  const auto g = gram_square(rng);
  const auto gc = scalar_compress(g);
  EXPECT_EQ(gc.n_vars(), 3 + 4);
  for (int k = 0; k < 20; ++k) {
    RVec xv(7);
    for (int i = 0; i < 7; ++i) xv(i) = nd(rng);
    CVec v(2);
    v << cplx(xv(3), xv(5)), cplx(xv(4), xv(6));
    const double direct = (v.adjoint() * eval_poly(g, xv.head(3)).mat() * v)(0, 0).real();
    EXPECT_NEAR(eval_poly(gc, xv)(0, 0).real(), direct, 1e-10 * (1.0 + std::abs(direct)));
  }
}

TEST(Sos, CompressionOfSquareIsSquare) {
  std::mt19937 rng(13);
  const auto g = gram_square(rng);
  const auto r = sos_certify(scalar_compress(g), bilinear_basis(3, 4));
  EXPECT_EQ(r.status, SosStatus::Certified) << r.message;
  const auto choi = sos_certify(scalar_compress(choi_example()), bilinear_basis(3, 3));
  EXPECT_EQ(choi.status, SosStatus::NotSos) << choi.message;
}

TEST(Sos, PositivitySampling) {
  EXPECT_GE(positivity_sample(choi_example(), 10000).min_observed, -1e-12);
  const auto neg = positivity_sample(HermMatrixPoly::constant(3, HermMatrix::identity(2) * -1.0), 10);
  EXPECT_NEAR(neg.min_observed, -1.0, 1e-15);
  EXPECT_GE(positivity_sample(rank1_square(), 2000, 3.0).min_observed, -1e-12);
}

TEST(Sos, Translate) {
  const auto h = choi_example();
  RVec u(3);
  u << 0.5, -1.0, 2.0;
  const auto hu = translate(h, u);
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    RVec x(3);
    for (int i = 0; i < 3; ++i) x(i) = nd(rng);
    EXPECT_LT((eval_poly(hu, x) - eval_poly(h, RVec(x - u))).norm(), 1e-12);
  }
}

std::vector<HermMatrixPoly> scalar_monomials(const std::vector<Exponent>& es) {
  std::vector<HermMatrixPoly> out;
  for (const auto& e : es) {
    HermMatrixPoly q(static_cast<int>(e.size()), 1);
    q.add(e, HermMatrix::identity(1));
    out.push_back(q);
  }
  return out;
}

TEST(Sos, ObstructionHypothesesChoi) {
  std::vector<RVec> us;
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) us.push_back(RVec::NullaryExpr(3, [&] { return nd(rng); }));
  const auto rep = obstruction_hypothesis_check(choi_example(), scalar_monomials(monomials_up_to(3, 4)), us);
  EXPECT_TRUE(rep.in_span);
  EXPECT_TRUE(rep.homogeneous);
  EXPECT_TRUE(rep.translates_in_span);
  EXPECT_TRUE(rep.not_sos);
  EXPECT_TRUE(rep.all_hold);

  const auto small = obstruction_hypothesis_check(choi_example(), scalar_monomials(monomials_of_degree(3, 2)), us);
  EXPECT_TRUE(small.in_span);
  EXPECT_FALSE(small.translates_in_span);
  ASSERT_TRUE(small.failing_translate);
  EXPECT_FALSE(small.all_hold);
}

TEST(Sos, ObstructionFailsForSquares) {
  HermMatrixPoly h(2, 1);
  h.add({2, 0}, HermMatrix::identity(1)).add({0, 2}, HermMatrix::identity(1) * 2.0);
  const auto rep = obstruction_hypothesis_check(h, scalar_monomials(monomials_up_to(2, 2)), {RVec::Ones(2)});
  EXPECT_TRUE(rep.in_span);
  EXPECT_TRUE(rep.homogeneous);
  EXPECT_FALSE(rep.not_sos);
  EXPECT_EQ(rep.sos_status, SosStatus::Certified);
  EXPECT_FALSE(rep.all_hold);
}

// sqrt of coordinates; phi(e_l) = sum_k q_lk q_lk^* gives factors sqrt(c_l) q_lk^*.
std::vector<BasisFunction> sqrt_coords(int n) {
  std::vector<BasisFunction> f;
  for (int i = 0; i < n; ++i) f.push_back([i](const RVec& c) { return cplx(std::sqrt(std::max(0.0, c(i))), 0.0); });
  return f;
}

SosFactorRule orthant_rule(int n, double perturb = 0.0) {
  return [n, perturb](const CPMap& phi) {
    std::vector<std::vector<CMat>> out;
    for (int l = 0; l < n; ++l) {
      for (const auto& q : rank1_decompose(phi.coordinate_values()[l], 1e-12)) {
        std::vector<CMat> vals;
        for (int j = 0; j < n; ++j) {
          CMat row = (j == l ? 1.0 : 0.0) * CMat(q.adjoint());
          if (perturb != 0.0 && j == 0) row *= 1.0 + perturb;
          vals.push_back(row);
        }
        out.push_back(vals);
      }
    }
    return out;
  };
}

TEST(Sos, LiftFromSosTrivial) {
  const auto c = PolyhedralCone::orthant(1);
  const auto l = lift_from_sos(c, sqrt_coords(1), orthant_rule(1));
  EXPECT_EQ(l.zdim(), 1);
  EXPECT_EQ(membership(*l.system(), MatrixElement::from_vector(RVec::Ones(1))).verdict, Verdict::Member);
  EXPECT_EQ(membership(*l.system(), MatrixElement::from_vector(-RVec::Ones(1))).verdict, Verdict::NotMember);
}

TEST(Sos, LiftFromSosReproducesSimplex) {
  const auto c = PolyhedralCone::orthant(2);
  const auto l = lift_from_sos(c, sqrt_coords(2), orthant_rule(2));
  EXPECT_EQ(l.zdim(), 4);
  const auto lifted = l.system();
  RMat diag(4, 2);
  diag.col(0) = herm_coords(HermMatrix::unit(2, 0));
  diag.col(1) = herm_coords(HermMatrix::unit(2, 1));
  const auto fs = OperatorSystem::inverse_image(LinearMap(diag), OperatorSystem::psd(2));
  std::mt19937 rng(8);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 12; ++k) {
    const int s = 1 + k % 2;
    MatrixElement a = MatrixElement::zero(2, s);
    for (int i = 0; i < 2; ++i) {
      CMat g(s, s);
      for (int p = 0; p < s; ++p)
        for (int q = 0; q < s; ++q) g(p, q) = cplx(nd(rng), nd(rng));
      CMat h = g * g.adjoint();
      if (k % 3 == 0) h -= 0.5 * CMat::Identity(s, s) * h.trace().real();
      a = a + MatrixElement::tensor(RVec::Unit(2, i), HermMatrix::from_trusted(h));
    }
    EXPECT_EQ(membership(*lifted, a).verdict, membership(*fs, a).verdict) << "k=" << k;
  }
}

TEST(Sos, LiftFromSosInconsistent) {
  const auto c = PolyhedralCone::orthant(2);
  EXPECT_THROW(lift_from_sos(c, sqrt_coords(2), orthant_rule(2, 0.1)), ConstructionError);
  // Factor values outside the span of the basis functions.
  std::vector<BasisFunction> one{[](const RVec&) { return cplx(1.0, 0.0); }};
  EXPECT_THROW(lift_from_sos(c, one, orthant_rule(2)), ConstructionError);
}

TEST(Sos, SosFromSimplexLift) {
  const auto c = PolyhedralCone::orthant(2);
  const auto l = lift_from_factorization(c, simplex_factorization(2), 1);
  const auto facet = CPMap::on_cone(c, {HermMatrix::identity(1), HermMatrix::zero(1)});
  const auto r = sos_from_lift(l, facet, {RVec::Unit(2, 0), RVec::Zero(2)});
  EXPECT_TRUE(r.ok);
  EXPECT_LT(r.deviations[0], 1e-7);
  for (const auto& p : r.factors[1]) EXPECT_EQ(p.norm(), 0.0);

  std::mt19937 rng(10);
  const auto phi = random_positive_map(c, 2, rng);
  std::uniform_real_distribution<double> ud(0.0, 2.0);
  std::vector<RVec> pts;
  for (int k = 0; k < 10; ++k) pts.push_back(RVec::NullaryExpr(2, [&] { return ud(rng); }));
  const auto many = sos_from_lift(l, phi, pts);
  EXPECT_TRUE(many.ok);
  EXPECT_LT(many.max_dev, 1e-7);
  const auto again = sos_from_lift(l, phi, pts);
  for (std::size_t k = 0; k < pts.size(); ++k)
    for (std::size_t j = 0; j < many.factors[k].size(); ++j) EXPECT_EQ(many.factors[k][j], again.factors[k][j]);
  EXPECT_THROW(sos_from_lift(l, phi, {-RVec::Ones(2)}), ConstructionError);
}

}  // namespace
