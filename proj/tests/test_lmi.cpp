#include <gtest/gtest.h>

#include "oplift/lmi.hpp"

using namespace oplift;

namespace {

// Coefficient sum e1 (x) A1 + e2 (x) A2 as a block-diagonal 4x4 matrix.
HermMatrix blockdiag(const HermMatrix& a, const HermMatrix& b) { return direct_sum(a, b); }

}  // namespace

TEST(Lmi, ConstantBlockGivesItsMinEigenvalue) {
  lmi::Program prog;
  const HermMatrix c = HermMatrix::diag({3.0, -0.5, 2.0});
  prog.add_psd([c](const lmi::Vars&) { return c; });
  const auto res = lmi::maximize_min_eig(prog);
  ASSERT_TRUE(res.solved()) << res.message;
  EXPECT_NEAR(res.lambda, -0.5, 1e-7);
  ASSERT_EQ(res.duals.size(), 1u);
  EXPECT_NEAR(2 * res.duals[0].trace(), 1.0, 1e-7);
}

TEST(Lmi, EqualityPinnedVariable) {
  // X in Her_2, X = diag(1, -1) forced; maximize min eig of blockdiag(X, I).
  lmi::Program prog;
  prog.add_var(2);
  prog.add_equality([](const lmi::Vars& v) { return v[0]; }, HermMatrix::diag({1.0, -1.0}));
  prog.add_psd([](const lmi::Vars& v) { return blockdiag(v[0], HermMatrix::identity(2)); });
  const auto res = lmi::maximize_min_eig(prog);
  ASSERT_TRUE(res.solved()) << res.message;
  EXPECT_NEAR(res.lambda, -1.0, 1e-7);
  EXPECT_NEAR((res.values[0] - HermMatrix::diag({1.0, -1.0})).norm(), 0.0, 1e-8);
}

TEST(Lmi, FreeVariableWithTraceConstraint) {
  // X in Her_3, tr X = 3: best min eigenvalue is 1 at X = I.
  lmi::Program prog;
  prog.add_var(3);
  prog.add_equality([](const lmi::Vars& v) { return HermMatrix::diag({v[0].trace()}); }, HermMatrix::diag({3.0}));
  prog.add_psd([](const lmi::Vars& v) { return v[0]; });
  const auto res = lmi::maximize_min_eig(prog);
  ASSERT_TRUE(res.solved()) << res.message;
  EXPECT_NEAR(res.lambda, 1.0, 1e-7);
  EXPECT_NEAR((res.values[0] - HermMatrix::identity(3)).norm(), 0.0, 1e-6);
}

TEST(Lmi, ComplexOffDiagonalIsReachable) {
  // [[1, z], [z*, 1]] with z = i fixed: eigenvalues 0 and 2.
  lmi::Program prog;
  prog.add_var(1);
  CMat m(2, 2);
  m << 1, cplx(0, 1), cplx(0, -1), 1;
  const HermMatrix h(m);
  prog.add_psd([h](const lmi::Vars& v) { return h + HermMatrix::identity(2) * 0.0 * v[0].trace(); });
  const auto res = lmi::maximize_min_eig(prog);
  ASSERT_TRUE(res.solved()) << res.message;
  EXPECT_NEAR(res.lambda, 0.0, 1e-7);
}

TEST(Lmi, InconsistentEqualitiesAreStructurallyInfeasible) {
  lmi::Program prog;
  prog.add_var(1);
  prog.add_equality([](const lmi::Vars& v) { return v[0]; }, HermMatrix::diag({1.0}));
  prog.add_equality([](const lmi::Vars& v) { return v[0]; }, HermMatrix::diag({2.0}));
  prog.add_psd([](const lmi::Vars& v) { return v[0]; });
  const auto res = lmi::maximize_min_eig(prog);
  EXPECT_FALSE(res.equalities_consistent);
  EXPECT_EQ(res.solver_status, sdp::Status::Infeasible);
}

TEST(Lmi, UnboundedLambdaFallsBackToCap) {
  lmi::Program prog;
  prog.add_var(2);
  prog.add_psd([](const lmi::Vars& v) { return v[0]; });
  const auto res = lmi::maximize_min_eig(prog);
  EXPECT_TRUE(res.lambda_unbounded);
  ASSERT_TRUE(res.solved()) << res.message;
  EXPECT_NEAR(res.lambda, 1.0, 1e-7);
  EXPECT_GE(min_eig(res.values[0]), 1.0 - 1e-7);
}

TEST(Lmi, DualCertifiesLambda) {
  // Var x real scalar, block diag(x, 1 - x): optimum lambda = 1/2.
  lmi::Program prog;
  prog.add_var(1);
  prog.add_psd([](const lmi::Vars& v) {
    const double x = v[0](0, 0).real();
    return HermMatrix::diag({x, 1.0 - x});
  });
  const auto res = lmi::maximize_min_eig(prog);
  ASSERT_TRUE(res.solved()) << res.message;
  EXPECT_NEAR(res.lambda, 0.5, 1e-7);
  const HermMatrix f = HermMatrix::diag({0.3, 0.7});
  EXPECT_NEAR(2 * f.inner(res.duals[0]), res.lambda, 1e-7);
}

TEST(Lmi, MultipliersReproduceOptimalValue) {
  // Q1, Q2 in Her_2 with Q1 + 2 Q2 = A and Q1 + Q2 = B; lambda* equals the
  // multiplier pairing sum_q tr(M_q rhs_q) since every lhs is linear and blocks are homogeneous.
  lmi::Program prog;
  prog.add_var(2);
  prog.add_var(2);
  CMat a(2, 2), b(2, 2);
  a << 1, cplx(0.5, 0.2), cplx(0.5, -0.2), -1;
  b << 2, 0.3, 0.3, 1;
  prog.add_equality([](const lmi::Vars& v) { return v[0] + v[1] * 2.0; }, HermMatrix(a));
  prog.add_equality([](const lmi::Vars& v) { return v[0] + v[1]; }, HermMatrix(b));
  prog.add_psd([](const lmi::Vars& v) { return v[0]; });
  prog.add_psd([](const lmi::Vars& v) { return v[1]; });
  const auto res = lmi::maximize_min_eig(prog);
  ASSERT_TRUE(res.solved()) << res.message;
  ASSERT_EQ(res.multipliers.size(), 2u);
  EXPECT_LE(res.multiplier_residual, 1e-7);
  const double pairing = res.multipliers[0].inner(HermMatrix(a)) + res.multipliers[1].inner(HermMatrix(b));
  EXPECT_NEAR(pairing, res.lambda, 1e-7);
  // Q2 = A - B, Q1 = 2B - A.
  EXPECT_NEAR(res.lambda, std::min(min_eig(HermMatrix(a) - HermMatrix(b)), min_eig(HermMatrix(b) * 2.0 - HermMatrix(a))),
              1e-7);
}
