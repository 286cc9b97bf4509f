#include <cmath>

#include <gtest/gtest.h>

#include <refine_sdo/error.hpp>
#include <refine_sdo/symlin.hpp>

#include "generators.hpp"
#include "properties.hpp"

using namespace refine_sdo;
using refine_sdo::testing::Rng;

namespace {

SymMat sym2(double a, double b, double c)
{
    Mat m(2, 2);
    m << a, b, b, c;
    return SymMat(m);
}

Mat diag(std::initializer_list<double> v)
{
    Vec d(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v)
        d(i++) = x;
    return d.asDiagonal();
}

} // namespace

TEST(Svec, ScalesOffDiagonalBySqrt2)
{
    const Vec v = svec(sym2(1, 2, 3));
    ASSERT_EQ(v.size(), 3);
    EXPECT_DOUBLE_EQ(v(0), 1.0);
    EXPECT_DOUBLE_EQ(v(1), 2.0 * std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(v(2), 3.0);
}

TEST(Svec, IdentityOfOrderTwo)
{
    const Vec v = svec(SymMat::identity({2}));
    EXPECT_EQ(v, Vec((Vec(3) << 1, 0, 1).finished()));
}

TEST(Svec, NormEqualsFrobenius)
{
    Rng rng(11);
    const SymMat u = refine_sdo::testing::random_sym(rng, {4, 2});
    EXPECT_NEAR(svec(u).norm(), u.norm(), 1e-12);
}

TEST(Svec, BlocksAreConcatenated)
{
    std::vector<Mat> blocks{Mat::Constant(1, 1, 5.0), sym2(1, 2, 3).block(0)};
    const Vec v = svec(SymMat(blocks));
    ASSERT_EQ(v.size(), 4);
    EXPECT_DOUBLE_EQ(v(0), 5.0);
    EXPECT_DOUBLE_EQ(v(1), 1.0);
}

TEST(Smat, InvertsSvecExamples)
{
    const SymMat a = smat((Vec(3) << 1, 0, 1).finished(), {2});
    EXPECT_EQ(a.to_dense(), Mat::Identity(2, 2));
    const SymMat b = smat((Vec(3) << 1, 2 * std::sqrt(2.0), 3).finished(), {2});
    EXPECT_NEAR((b - sym2(1, 2, 3)).max_abs(), 0.0, 1e-15);
}

TEST(Smat, RejectsWrongLength)
{
    try {
        smat(Vec::Zero(5), {2});
        FAIL() << "expected LayoutMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::LayoutMismatch);
    }
}

TEST(Smat, RoundtripOnRandom5x5)
{
    Rng rng(3);
    const SymMat u = refine_sdo::testing::random_sym(rng, {5});
    EXPECT_LE((smat(svec(u), {5}) - u).max_abs(), 1e-14);
}

TEST(SymMat, ConstructorSymmetrizes)
{
    Mat m(2, 2);
    m << 1, 2, 4, 3;
    const SymMat s(m);
    EXPECT_DOUBLE_EQ(s.block(0)(0, 1), 3.0);
    EXPECT_DOUBLE_EQ(s.block(0)(1, 0), 3.0);
}

TEST(SymMat, TotalDimIsSumOfBlocks)
{
    EXPECT_EQ(SymMat::zeros({3, 1, 2}).total_dim(), 6);
    EXPECT_EQ(SymMat::zeros({3, 1, 2}).svec_dim(), 6 + 1 + 3);
}

TEST(SymMat, MixedLayoutsThrow)
{
    EXPECT_THROW(SymMat::zeros({2}) + SymMat::zeros({1, 1}), Error);
}

TEST(SymKron, IdentityGivesIdentity)
{
    const BlockMatrix i2 = BlockMatrix::identity({2});
    EXPECT_LE((sym_kron(i2, i2) - Mat::Identity(3, 3)).norm(), 1e-15);
    const BlockMatrix i3 = BlockMatrix::identity({3, 2});
    EXPECT_LE((sym_kron(i3, i3) - Mat::Identity(9, 9)).norm(), 1e-15);
}

TEST(SymKron, DiagonalActionExample)
{
    const BlockMatrix g(std::vector<Mat>{diag({1, 2})});
    const SymMat m = sym2(1, 1, 1);
    const Vec out = sym_kron(g, g) * svec(m);
    EXPECT_NEAR(out(0), 1.0, 1e-15);
    EXPECT_NEAR(out(1), 2.0 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(out(2), 4.0, 1e-15);
}

TEST(SymKron, OrderThreeIsSixBySix)
{
    Rng rng(5);
    const Mat k = sym_kron(refine_sdo::testing::random_general(rng, {3}), refine_sdo::testing::random_general(rng, {3}));
    EXPECT_EQ(k.rows(), 6);
    EXPECT_EQ(k.cols(), 6);
}

TEST(SymKron, TransposeSwapsFactorTransposes)
{
    Rng rng(6);
    for (int c = 0; c < 20; ++c) {
        const Layout layout{3, 2};
        const BlockMatrix g = refine_sdo::testing::random_general(rng, layout);
        const BlockMatrix k = refine_sdo::testing::random_general(rng, layout);
        const Mat a = sym_kron(g, k);
        const Mat b = sym_kron(g.transpose(), k.transpose());
        EXPECT_LE((a.transpose() - b).norm(), 1e-12 * (1 + a.norm()));
    }
}

TEST(EigSym, DiagonalExample)
{
    const EigenDecomposition e = eig_sym(SymMat(diag({3, 1})));
    EXPECT_DOUBLE_EQ(e.values[0](0), 1.0);
    EXPECT_DOUBLE_EQ(e.values[0](1), 3.0);
}

TEST(EigSym, IdentityHasUnitSpectrum)
{
    const Vec v = eig_sym(SymMat::identity({4, 2})).all_values();
    EXPECT_LE((v - Vec::Ones(6)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EigSym, ReconstructsRandom6x6)
{
    Rng rng(8);
    const SymMat m = refine_sdo::testing::random_sym(rng, {6});
    const EigenDecomposition e = eig_sym(m);
    const Mat rec = e.vectors[0] * e.values[0].asDiagonal() * e.vectors[0].transpose();
    EXPECT_LE((rec - m.to_dense()).norm(), 1e-10 * m.norm());
    EXPECT_LE((e.vectors[0].transpose() * e.vectors[0] - Mat::Identity(6, 6)).norm(), 1e-12);
}

TEST(MatFn, SqrtOfDiagonal)
{
    const SymMat r = sqrtm(SymMat(diag({4, 9})));
    EXPECT_NEAR((r - SymMat(diag({2, 3}))).max_abs(), 0.0, 1e-15);
}

TEST(MatFn, InvSqrtOfIdentity)
{
    EXPECT_NEAR((invsqrtm(SymMat::identity({3})) - SymMat::identity({3})).max_abs(), 0.0, 1e-15);
}

TEST(MatFn, SqrtSquaresBack)
{
    Rng rng(9);
    const SymMat m = refine_sdo::testing::random_pd(rng, {5});
    const Mat r = sqrtm(m).to_dense();
    EXPECT_LE((r * r - m.to_dense()).norm() / m.norm(), 1e-9);
}

TEST(MatFn, PowerMatchesProducts)
{
    Rng rng(10);
    const SymMat m = refine_sdo::testing::random_pd(rng, {4});
    const Mat p3 = mat_fn(m, MatFn::Power, 3.0).to_dense();
    const Mat d = m.to_dense();
    EXPECT_LE((p3 - d * d * d).norm() / p3.norm(), 1e-12);
}

TEST(MatFn, InvSqrtWhitensIllConditionedInputs)
{
    Rng rng(12);
    for (int c = 0; c < 100; ++c) {
        const int n = rng.integer(2, 6);
        const Mat q = rng.normal_mat(n, n).householderQr().householderQ();
        Vec ev(n);
        for (int i = 0; i < n; ++i)
            ev(i) = std::pow(10.0, rng.uniform(-3.0, 3.0));
        const SymMat m(Mat(q * ev.asDiagonal() * q.transpose()));
        const Mat w = invsqrtm(m).to_dense();
        EXPECT_LE((w * m.to_dense() * w - Mat::Identity(n, n)).norm(), 1e-8);
    }
}

TEST(MatFn, RejectsIndefiniteInputForSqrt)
{
    EXPECT_THROW(sqrtm(SymMat(diag({1, -1}))), Error);
}

TEST(MinEig, Examples)
{
    EXPECT_DOUBLE_EQ(min_eig(SymMat(diag({-1, 2}))), -1.0);
    EXPECT_DOUBLE_EQ(min_eig(SymMat::identity({3})), 1.0);
}

TEST(MinEig, MatchesFullDecomposition)
{
    Rng rng(13);
    for (int c = 0; c < 20; ++c) {
        const SymMat m = refine_sdo::testing::random_sym(rng, {4, 3});
        const double ref = m.to_dense().selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
        EXPECT_NEAR(min_eig(m), ref, 1e-10);
    }
}

TEST(CondEstimate, Examples)
{
    EXPECT_NEAR(cond_estimate(Mat::Identity(4, 4), CondMode::ExactSvd), 1.0, 1e-14);
    EXPECT_NEAR(cond_estimate(diag({1, 10}), CondMode::ExactSvd), 10.0, 1e-12);
    EXPECT_NEAR(cond_estimate(diag({1, 10}), CondMode::PowerIter), 10.0, 1e-6);
}

TEST(CondEstimate, PowerIterationWithinTenPercent)
{
    Rng rng(14);
    for (int c = 0; c < 20; ++c) {
        const Mat m = rng.normal_mat(8, 8);
        const double exact = cond_estimate(m, CondMode::ExactSvd);
        const double est = cond_estimate(m, CondMode::PowerIter);
        EXPECT_NEAR(est / exact, 1.0, 0.1) << "case " << c;
    }
}

TEST(CondEstimate, SingularThrows)
{
    EXPECT_THROW(cond_estimate(Mat::Zero(3, 3), CondMode::ExactSvd), Error);
}

// ---- property suites, 100+ random cases each ----

TEST(SymlinProperty, SvecSmatRoundtrip)
{
    Rng rng(101);
    const auto st = refine_sdo::testing::roundtrip_property(rng, 200);
    EXPECT_TRUE(st.holds(1e-14)) << st.worst;
}

TEST(SymlinProperty, Isometry)
{
    Rng rng(102);
    const auto st = refine_sdo::testing::isometry_property(rng, 200);
    EXPECT_TRUE(st.holds(1e-12)) << st.worst;
}

TEST(SymlinProperty, KroneckerActionIdentity)
{
    Rng rng(103);
    const auto st = refine_sdo::testing::kron_action_property(rng, 150);
    EXPECT_TRUE(st.holds(1e-10)) << st.worst;
}

TEST(SymlinProperty, IdentityKroneckerIsIdentity)
{
    Rng rng(104);
    for (int c = 0; c < 100; ++c) {
        const Layout layout = refine_sdo::testing::property_layout(rng);
        const BlockMatrix i = BlockMatrix::identity(layout);
        const int d = svec_length(layout);
        ASSERT_LE((sym_kron(i, i) - Mat::Identity(d, d)).norm(), 1e-14);
    }
}
