#include <doctest.h>

#include "cran/errors.hpp"
#include "cran/hermitian.hpp"
#include "test_support.hpp"

using namespace cran;

TEST_CASE("construction symmetrizes and rejects bad input") {
    Matrix m(2, 2);
    m << Cplx(1.0, 0.0), Cplx(2.0, 1.0), Cplx(2.0, -1.0 + 5e-11), Cplx(3.0, 0.0);
    HermitianMatrix h(m);
    CHECK((h.mat() - h.mat().adjoint()).norm() == doctest::Approx(0.0));

    Matrix bad = m;
    bad(0, 1) = Cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(HermitianMatrix{bad}, std::invalid_argument);
    CHECK_THROWS_AS(HermitianMatrix{Matrix::Zero(2, 3)}, std::invalid_argument);
}

TEST_CASE("psd tag clamps tiny negatives and rejects real ones") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = -5e-10;
    m(1, 1) = 1.0;
    const HermitianMatrix h = HermitianMatrix::psd(m);
    CHECK(h.psd_tagged());
    CHECK(eig_desc(h).values.minCoeff() >= 0.0);

    m(0, 0) = -1e-6;
    CHECK_THROWS_AS(HermitianMatrix::psd(m), NumericalError);
}

TEST_CASE("eig_desc on known matrices") {
    SUBCASE("identity") {
        const auto ep = eig_desc(HermitianMatrix::identity(2));
        CHECK(ep.values[0] == doctest::Approx(1.0));
        CHECK(ep.values[1] == doctest::Approx(1.0));
    }
    SUBCASE("diagonal is sorted non-increasing") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 1.0;
        m(1, 1) = 3.0;
        const auto ep = eig_desc(HermitianMatrix(m));
        CHECK(ep.values[0] == doctest::Approx(3.0));
        CHECK(ep.values[1] == doctest::Approx(1.0));
    }
    SUBCASE("2x2 with off-diagonal coupling") {
        // [[2,1],[1,2]]: eigenvalues 3 and 1, eigenvectors (1,1)/sqrt(2) and
        // (1,-1)/sqrt(2) up to phase (roots of (2-l)^2 = 1).
        Matrix m(2, 2);
        m << 2.0, 1.0, 1.0, 2.0;
        const auto ep = eig_desc(HermitianMatrix(m));
        CHECK(ep.values[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(ep.values[1] == doctest::Approx(1.0).epsilon(1e-12));
        const double overlap0 = std::abs(ep.basis.col(0).dot(Matrix::Ones(2, 1).col(0))) /
                                std::sqrt(2.0);
        CHECK(overlap0 == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("eig_desc reconstruction and unitarity on random Hermitian input") {
    Rng rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const auto h = test::random_hermitian(rng, 2 + trial % 5);
        const auto ep = eig_desc(h);
        CHECK((ep.basis.adjoint() * ep.basis - Matrix::Identity(h.dim(), h.dim())).cwiseAbs().maxCoeff() <
              1e-9);
        CHECK((ep.reconstruct() - h.mat()).cwiseAbs().maxCoeff() < 1e-8);
        for (Eigen::Index i = 1; i < ep.values.size(); ++i) CHECK(ep.values[i - 1] >= ep.values[i]);
    }
}

TEST_CASE("cond_cov hand values") {
    SUBCASE("empty stack returns sigma_x") {
        Rng rng(5);
        const auto s = test::random_psd(rng, 3);
        const auto out = cond_cov(s, Matrix::Zero(0, 3), HermitianMatrix::zero(0));
        CHECK((out.mat() - s.mat()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("scalar: 1 - 1/(1+1) = 0.5") {
        const auto out = cond_cov(HermitianMatrix::identity(1), Matrix::Ones(1, 1),
                                  HermitianMatrix::identity(1));
        CHECK(out.mat()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("partial observation of a 2-d source") {
        Matrix h(1, 2);
        h << 1.0, 0.0;
        const auto out = cond_cov(HermitianMatrix::identity(2), h, HermitianMatrix::identity(1));
        CHECK(out.mat()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(out.mat()(1, 1).real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(out.mat()(0, 1)) < 1e-12);
    }
}

TEST_CASE("cond_cov output is PSD and dominated by sigma_x") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + trial % 4;
        const int k = 1 + trial % 3;
        const auto sx = test::random_psd(rng, n, 2.0);
        const Matrix stack = test::random_complex(rng, k, n);
        const auto st = HermitianMatrix(test::random_psd(rng, k).mat() + Matrix::Identity(k, k));
        const auto out = cond_cov(sx, stack, st);

        const auto vals = eig_desc(out).values;
        const double lmax_x = eig_desc(sx).values.maxCoeff();
        CHECK(vals.minCoeff() >= -kPsdClampTol);
        CHECK(vals.maxCoeff() <= lmax_x + kPsdClampTol);
        // Loewner dominance: sigma_x - out stays PSD.
        const auto gap = eig_desc(HermitianMatrix(sx.mat() - out.mat())).values;
        CHECK(gap.minCoeff() > -1e-8);
    }
}

TEST_CASE("logdet_cap values and monotonicity") {
    CHECK(logdet_cap(HermitianMatrix::zero(3)) == doctest::Approx(0.0));
    CHECK(logdet_cap(HermitianMatrix::identity(2)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(logdet_cap(HermitianMatrix::scaled_identity(1, 3.0)) == doctest::Approx(2.0).epsilon(1e-12));

    Matrix indefinite = Matrix::Zero(2, 2);
    indefinite(0, 0) = -2.0;
    CHECK_THROWS_AS(logdet_cap(HermitianMatrix(indefinite)), NumericalError);

    // A preceq B (Loewner) implies logdet_cap(A) <= logdet_cap(B).
    Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + trial % 4;
        const auto a = test::random_psd(rng, n);
        const auto b = HermitianMatrix::psd(a.mat() + test::random_psd(rng, n).mat());
        CHECK(logdet_cap(a) <= logdet_cap(b) + 1e-9);
    }
}

TEST_CASE("factor_gain reproduces omega") {
    SUBCASE("zero and scalar cases") {
        CHECK(factor_gain(HermitianMatrix::zero(2)).norm() == doctest::Approx(0.0));
        const Matrix a = factor_gain(HermitianMatrix::scaled_identity(1, 3.0));
        CHECK(std::abs(a(0, 0)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    }
    SUBCASE("random PSD round trip") {
        Rng rng(31);
        for (int trial = 0; trial < 25; ++trial) {
            const auto omega = test::random_psd(rng, 2 + trial % 4, 3.0);
            const Matrix a = factor_gain(omega);
            CHECK((a.adjoint() * a - omega.mat()).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}
