#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "stockcast/error.hpp"
#include "stockcast/linalg.hpp"

using namespace stockcast;
using namespace stockcast::linalg;
using stockcast::test::Rng;

TEST_CASE("lsq_solve on hand-checkable systems")
{
    SUBCASE("identity")
    {
        const auto s = lsq_solve(Matrix::Identity(2, 2), Vector::Map(std::vector<double>{3, 4}.data(), 2));
        CHECK(s.x(0) == doctest::Approx(3.0));
        CHECK(s.x(1) == doctest::Approx(4.0));
        CHECK(s.residual_norm_sq == doctest::Approx(0.0));
    }
    SUBCASE("overdetermined column of ones")
    {
        Matrix a(2, 1);
        a << 1, 1;
        Vector b(2);
        b << 1, 3;
        const auto s = lsq_solve(a, b);
        CHECK(s.x(0) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(s.residual_norm_sq == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("diagonal scaling")
    {
        Matrix a(2, 2);
        a << 1, 0, 0, 2;
        Vector b(2);
        b << 2, 2;
        const auto s = lsq_solve(a, b);
        CHECK(s.x(0) == doctest::Approx(2.0));
        CHECK(s.x(1) == doctest::Approx(1.0));
        CHECK(s.residual_norm_sq < 1e-24);
    }
}

TEST_CASE("lsq_solve returns the minimum-norm solution for rank-deficient A")
{
    // Two identical columns: every x with x0 + x1 = 2 is optimal; the
    // minimum-norm one splits evenly.
    Matrix a(3, 2);
    a << 1, 1, 1, 1, 1, 1;
    Vector b = Vector::Constant(3, 2.0);
    const auto s = lsq_solve(a, b);
    CHECK(s.rank == 1);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(s.x(1) == doctest::Approx(1.0));
}

TEST_CASE("lsq_solve agrees with a normal-equations oracle and beats random candidates")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = 5 + trial;
        const auto m = 1 + trial % 6;
        const Matrix a = test::random_matrix(rng, p, m);
        const Vector b = test::random_vector(rng, p);
        const auto s = lsq_solve(a, b);
        CHECK(test::rel_err(s.x, test::normal_equations_solve(a, b)) < 1e-10);
        CHECK(s.residual_norm_sq == doctest::Approx((a * s.x - b).squaredNorm()).epsilon(1e-12));
        for (int c = 0; c < 100; ++c) {
            const Vector cand = s.x + test::random_vector(rng, m, -0.5, 0.5);
            CHECK(s.residual_norm_sq <= (a * cand - b).squaredNorm() + 1e-12);
        }
    }
}

TEST_CASE("lsq_solve rejects bad input")
{
    CHECK_THROWS_AS(lsq_solve(Matrix::Identity(2, 2), Vector::Zero(3)), InvalidArgument);
    CHECK_THROWS_AS(lsq_solve(Matrix(0, 0), Vector(0)), InvalidArgument);
    Matrix a = Matrix::Identity(2, 2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(lsq_solve(a, Vector::Zero(2)), InvalidArgument);
}

TEST_CASE("rls_init")
{
    const auto s1 = rls_init(1, 1e6);
    CHECK(s1.x(0) == 0.0);
    CHECK(s1.s(0, 0) == 1e6);
    CHECK(s1.samples_seen == 0);

    const auto s2 = rls_init(2, 1e4);
    CHECK(max_asymmetry(s2.s) == 0.0);
    CHECK(s2.s(0, 0) == 1e4);
    CHECK(s2.s(1, 1) == 1e4);
    CHECK(s2.s(0, 1) == 0.0);

    CHECK_THROWS_AS(rls_init(3, 0.0), InvalidArgument);
    CHECK_THROWS_AS(rls_init(3, -1.0), InvalidArgument);
    CHECK_THROWS_AS(rls_init(0, 1.0), InvalidArgument);
}

TEST_CASE("rls_update")
{
    SUBCASE("zero regressor leaves the estimate unchanged")
    {
        auto st = rls_init(3, 1e4);
        st.x << 1, 2, 3;
        const auto next = rls_update(st, Vector::Zero(3), 5.0);
        CHECK(next.x == st.x);
    }
    SUBCASE("large gamma, one observation")
    {
        // X1 = gamma / (1 + gamma) * b
        const auto st = rls_update(rls_init(1, 1e9), Vector::Ones(1), 2.0);
        CHECK(std::abs(st.x(0) - 2.0) < 1e-6);
        CHECK(st.x(0) == doctest::Approx(2.0 * 1e9 / (1.0 + 1e9)).epsilon(1e-15));
        CHECK(st.samples_seen == 1);
    }
    SUBCASE("rejects bad lambda and non-finite input")
    {
        auto st = rls_init(2);
        CHECK_THROWS_AS(rls_update(st, Vector::Ones(2), 1.0, 0.0), InvalidArgument);
        CHECK_THROWS_AS(rls_update(st, Vector::Ones(2), 1.0, 1.5), InvalidArgument);
        CHECK_THROWS_AS(rls_update(st, Vector::Ones(3), 1.0), InvalidArgument);
        Vector a = Vector::Ones(2);
        a(1) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(rls_update(st, a, 1.0), InvalidArgument);
        CHECK_THROWS_AS(rls_update(st, Vector::Ones(2), std::nan("")), InvalidArgument);
    }
}

TEST_CASE("rls with lambda = 1 reproduces the batch solution and keeps S symmetric")
{
    Rng rng(5);
    std::uniform_int_distribution<int> pick_m(1, 8);
    int near_singular = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int m = pick_m(rng);
        std::uniform_int_distribution<int> pick_p(m, 50);
        const int p = pick_p(rng);
        const Matrix a = test::random_matrix(rng, p, m);
        const Vector b = test::random_vector(rng, p);
        auto st = rls_init(static_cast<std::size_t>(m), 1e8);
        for (int r = 0; r < p; ++r) {
            rls_update_inplace(st, a.row(r).transpose(), b(r));
            CHECK(max_asymmetry(st.s) < 1e-9);
        }
        // Exact finite-gamma answer: least squares on A stacked over I / sqrt(gamma).
        // S shrinks from 1e8 to O(1), so about eight digits are lost on the way.
        Matrix aug = Matrix::Zero(p + m, m);
        aug.topRows(p) = a;
        aug.bottomRows(m).diagonal().setConstant(1.0 / std::sqrt(1e8));
        Vector b_aug = Vector::Zero(p + m);
        b_aug.head(p) = b;
        CHECK(test::rel_err(st.x, test::normal_equations_solve(aug, b_aug)) < 1e-6);
        // The prior biases the answer by about 1 / (gamma * smin^2), so plain
        // least-squares agreement holds only away from singular A.
        const double smin_sq = test::jacobi_eigenvalues(a.transpose() * a).front();
        if (1.0 / (1e8 * smin_sq) < 1e-5)
            CHECK(test::rel_err(st.x, lsq_solve(a, b).x) < 1e-4);
        else
            ++near_singular;
    }
    CHECK(near_singular <= 2);
}

TEST_CASE("psd_check")
{
    CHECK(psd_check(Matrix::Identity(3, 3), 0.0));
    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    CHECK_FALSE(psd_check(swap, 0.5));
    CHECK_FALSE(psd_check(swap, 0.999));
    CHECK(psd_check(swap, 1.0));

    Matrix asym(2, 2);
    asym << 1, 2, 0, 1;
    CHECK_THROWS_AS(psd_check(asym, 1e-9), InvalidArgument);
    CHECK_THROWS_AS(psd_check(Matrix(2, 3), 1e-9), InvalidArgument);
}

TEST_CASE("psd_check agrees with the Jacobi oracle and ignores symmetric permutations")
{
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 6;
        const Matrix r = test::random_matrix(rng, n, n);
        // Shift a PSD matrix so that some instances go indefinite.
        const double shift = (trial % 3) * 0.3;
        Matrix g = r * r.transpose() - shift * Matrix::Identity(n, n);
        g = 0.5 * (g + g.transpose());
        const auto ev = test::jacobi_eigenvalues(g);
        const bool want = ev.front() >= -1e-10;
        CHECK(psd_check(g, 1e-10) == want);

        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::PermutationMatrix<Eigen::Dynamic> pm(n);
        for (int i = 0; i < n; ++i)
            pm.indices()(i) = perm[static_cast<std::size_t>(i)];
        const Matrix gp = pm * g * pm.transpose();
        CHECK(psd_check(gp, 1e-10) == want);
    }
}
