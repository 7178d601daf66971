#include <gtest/gtest.h>

#include <limits>

#include <Eigen/SVD>

#include "rdmd/linalg.hpp"
#include "test_util.hpp"

using namespace rdmd;
using rdmd::test::Gen;

namespace {

template <typename M>
double max_abs(const M& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

// The four Penrose identities, each scaled by the relevant magnitude.
template <typename M>
void expect_penrose(const M& a, const M& ap, double tol) {
    const double smax = singular_values(a).size() ? singular_values(a)[0] : 0.0;
    const double pmax = singular_values(ap).size() ? singular_values(ap)[0] : 0.0;
    EXPECT_LE(max_abs(a * ap * a - a), tol * smax);
    EXPECT_LE(max_abs(ap * a * ap - ap), tol * std::max(pmax, 1e-300));
    const M aap = a * ap, apa = ap * a;
    EXPECT_LE(max_abs(aap - aap.adjoint()), tol);
    EXPECT_LE(max_abs(apa - apa.adjoint()), tol);
}

} // namespace

TEST(PseudoInverse, IdentityIsItsOwnInverse) {
    EXPECT_LT(max_abs(pseudo_inverse(RMat::Identity(3, 3)) - RMat::Identity(3, 3)), 1e-15);
}

TEST(PseudoInverse, ZeroMatrixGivesTransposeShapedZero) {
    const RMat p = pseudo_inverse(RMat::Zero(3, 2));
    ASSERT_EQ(p.rows(), 2);
    ASSERT_EQ(p.cols(), 3);
    EXPECT_EQ(max_abs(p), 0.0);
}

TEST(PseudoInverse, TinySingularValueIsDropped) {
    RMat a = RMat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 1e-300;
    const RMat p = pseudo_inverse(a);
    EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
    EXPECT_EQ(p(1, 1), 0.0);
    EXPECT_EQ(p(0, 1), 0.0);
    EXPECT_EQ(p(1, 0), 0.0);
    expect_penrose(a, p, 1e-10);
}

TEST(PseudoInverse, MatchesOrthogonalDecompositionOracle) {
    Gen g(61);
    for (auto [n, m] : {std::pair<Index, Index>{7, 4}, {4, 7}, {30, 30}, {200, 12}}) {
        const RMat a = g.matrix(n, m);
        const RMat p = pseudo_inverse(a);
        EXPECT_LT(max_abs(p - rdmd::test::cod_pinv(a)), 1e-10 * max_abs(p)) << n << "x" << m;
    }
}

TEST(PseudoInverse, ExplicitToleranceTruncates) {
    Gen g(62);
    const RMat a = g.with_singular_values(9, 6, {3.0, 1.0, 1e-3});
    const RMat p = pseudo_inverse(a, 1e-2);
    EXPECT_NEAR(singular_values(p)[0], 1.0, 1e-12);
    EXPECT_LT(singular_values(p)[2], 1e-12);
    EXPECT_NEAR(singular_values(pseudo_inverse(a))[0], 1e3, 1e-6);
}

TEST(PseudoInverse, PropertyPenroseIdentities) {
    Gen g(63);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = g.index(1, 60), m = g.index(1, 60);
        const Index r = g.index(1, std::min(n, m));
        RMat a = g.low_rank(n, m, r) * std::pow(10.0, g.uniform(-5, 5));
        expect_penrose(a, RMat(pseudo_inverse(a)), 1e-10);
    }
    for (int trial = 0; trial < 8; ++trial) {
        const Index n = g.index(1, 40), m = g.index(1, 40);
        const CMat a = g.cmatrix(n, 3) * g.cmatrix(3, m);
        expect_penrose(a, CMat(pseudo_inverse(a)), 1e-10);
    }
}

TEST(PseudoInverse, RejectsNonFinite) {
    RMat a = RMat::Ones(2, 2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        pseudo_inverse(a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidData);
    }
}

TEST(ThinSvd, TallPathMatchesJacobiOracle) {
    Gen g(64);
    for (auto [n, m] : {std::pair<Index, Index>{300, 20}, {41, 20}, {20, 41}, {25, 25}}) {
        const RMat a = g.matrix(n, m);
        const auto svd = thin_svd(a, true, true);
        Eigen::JacobiSVD<RMat> ref(a);
        EXPECT_LT(max_abs(svd.s - ref.singularValues()), 1e-12 * ref.singularValues()[0]);
        const Index k = std::min(n, m);
        EXPECT_LT(max_abs(svd.u.transpose() * svd.u - RMat::Identity(k, k)), 1e-12);
        EXPECT_LT(max_abs(svd.u * svd.s.asDiagonal() * svd.v.transpose() - a), 1e-12 * svd.s[0]);
    }
}

TEST(ThinSvd, LeadingColumnsOnly) {
    Gen g(65);
    const RMat a = g.matrix(500, 30);
    const auto full = thin_svd(a, true, false);
    const auto part = thin_svd(a, true, false, 4);
    ASSERT_EQ(part.u.cols(), 4);
    EXPECT_LT(max_abs(part.u - full.u.leftCols(4)), 1e-12);
}

TEST(NumericalRank, CountsAboveRelativeThreshold) {
    Gen g(66);
    EXPECT_EQ(numerical_rank(g.with_singular_values(20, 10, {1.0, 1e-5, 1e-11}), 1e-10), 2);
    EXPECT_EQ(numerical_rank(RMat::Zero(4, 4), 1e-10), 0);
    EXPECT_EQ(numerical_rank(g.low_rank(50, 40, 7), 1e-10), 7);
}

TEST(TimesComplex, MatchesComplexProduct) {
    Gen g(67);
    const RMat y = g.matrix(13, 6);
    const CMat w = g.cmatrix(6, 4);
    const CMat ref = y.cast<cplx>() * w;
    EXPECT_LT(max_abs(times_complex(y, w) - ref), 1e-13 * max_abs(ref));
}
