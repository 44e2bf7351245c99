#include <doctest.h>

#include "oracles.hpp"
#include "stockcast/error.hpp"
#include "stockcast/svm.hpp"

using namespace stockcast;
using namespace stockcast::svm;

namespace {

struct TwoPoint {
    Matrix x{2, 2};
    std::vector<int> y{+1, -1};
    TwoPoint() { x << 1, 1, -1, -1; }
};

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

} // namespace

TEST_CASE("kernel_eval")
{
    CHECK(kernel_eval(Kernel::linear(), vec({1, 2}), vec({3, 4})) == 11.0);
    for (double g : {0.01, 1.0, 50.0})
        CHECK(kernel_eval(Kernel::rbf(g), vec({0.3, -2}), vec({0.3, -2})) == 1.0);
    CHECK(kernel_eval(Kernel::polynomial(2, 0.0), vec({1, 1}), vec({1, 1})) == 4.0);
    CHECK(kernel_eval(Kernel::rbf(0.5), vec({0, 0}), vec({1, 1})) == doctest::Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(kernel_eval(Kernel::linear(), vec({1, 2}), vec({1})), InvalidArgument);
    CHECK_THROWS_AS(Kernel::rbf(0.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(Kernel::polynomial(0, 1.0).validate(), InvalidArgument);
}

TEST_CASE("mercer_gram_check")
{
    test::Rng rng(2);
    const Matrix pts = test::random_matrix(rng, 10, 3);
    CHECK(mercer_gram_check(Kernel::rbf(0.7), pts, 1e-9));
    const auto ev = test::jacobi_eigenvalues(gram_matrix(Kernel::rbf(0.7), pts));
    CHECK(ev.front() > -1e-9);

    const KernelFunction negdot = [](const Vector& a, const Vector& b) { return -a.dot(b); };
    Matrix two(2, 2);
    two << 1, 2, -0.5, 3;
    CHECK_FALSE(mercer_gram_check(negdot, two, 1e-9));

    CHECK(mercer_gram_check(Kernel::linear(), vec({2.0, 1.0}).transpose(), 0.0));
}

TEST_CASE("svc_train on the two-point problem")
{
    TwoPoint p;
    SvmTrainConfig cfg;
    cfg.C = 10.0;
    const auto fit = svc_train(p.x, p.y, Kernel::linear(), cfg);
    const auto& m = fit.model;
    CHECK(fit.info.converged);
    CHECK(std::abs(m.b) < 1e-4);
    CHECK(std::abs(fit.info.dual(0) - 0.25) < 1e-6);
    CHECK(std::abs(fit.info.dual(1) - 0.25) < 1e-6);
    // w = sum coef_i x_i
    const Vector w = m.support_vectors.transpose() * m.coef;
    CHECK(std::abs(w(0) - 0.5) < 1e-4);
    CHECK(std::abs(w(1) - 0.5) < 1e-4);
    CHECK(2.0 / w.norm() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-4));
    CHECK(svm_predict(m, vec({1, 1})) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(svm_predict(m, vec({-1, -1})) == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(svm_predict(m, vec({2, 2})) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(svm_classify(m, vec({2, 2})) == 1);
    CHECK(std::abs(svm_predict(m, vec({3, -3}))) < 1e-4);
}

TEST_CASE("svc_train satisfies the dual constraints and beats random feasible points")
{
    test::Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 6 + trial;
        const Matrix x = test::random_matrix(rng, n, 2);
        std::vector<int> y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            y[static_cast<std::size_t>(i)] = (x(i, 0) + 0.4 * x(i, 1) + 0.3 * std::sin(5 * x(i, 1)) > 0) ? 1 : -1;
        y[0] = 1;
        y[1] = -1;
        SvmTrainConfig cfg;
        cfg.C = 2.0;
        const Kernel k = trial % 2 ? Kernel::rbf(1.5) : Kernel::linear();
        const auto fit = svc_train(x, y, k, cfg);
        const auto& a = fit.info.dual;
        double eq = 0.0;
        for (int i = 0; i < n; ++i) {
            eq += y[static_cast<std::size_t>(i)] * a(i);
            CHECK(a(i) >= -1e-6);
            CHECK(a(i) <= cfg.C + 1e-6);
        }
        CHECK(std::abs(eq) < 1e-6);
        const Matrix g = gram_matrix(k, x);
        const double best = svc_dual_objective(g, y, a);
        for (int s = 0; s < 1000; ++s)
            CHECK(best <= svc_dual_objective(g, y, test::random_feasible(rng, y, cfg.C)) + 1e-9);
    }
}

TEST_CASE("svc_train margin on separable data")
{
    test::Rng rng(12);
    Matrix x(20, 2);
    std::vector<int> y(20);
    int filled = 0;
    while (filled < 20) {
        const Vector p = test::random_vector(rng, 2);
        const double s = p(0) - p(1);
        if (std::abs(s) < 0.2)
            continue;
        x.row(filled) = p.transpose();
        y[static_cast<std::size_t>(filled)] = s > 0 ? 1 : -1;
        ++filled;
    }
    SvmTrainConfig cfg;
    cfg.C = 1e4;
    cfg.tolerance = 1e-6;
    const auto fit = svc_train(x, y, Kernel::linear(), cfg);
    double min_margin = 1e300;
    for (int i = 0; i < 20; ++i) {
        const double f = y[static_cast<std::size_t>(i)] * svm_predict(fit.model, Vector(x.row(i).transpose()));
        CHECK(f > 0);
        min_margin = std::min(min_margin, f);
        if (fit.info.dual(i) > kSupportThreshold)
            CHECK(std::abs(f - 1.0) < 1e-3);
    }
    CHECK(std::abs(min_margin - 1.0) < 1e-3);

    // Dropping a non-support point leaves the decision function unchanged.
    int drop = -1;
    for (int i = 0; i < 20 && drop < 0; ++i)
        if (fit.info.dual(i) <= kSupportThreshold)
            drop = i;
    REQUIRE(drop >= 0);
    Matrix x2(19, 2);
    std::vector<int> y2;
    for (int i = 0, r = 0; i < 20; ++i)
        if (i != drop) {
            x2.row(r++) = x.row(i);
            y2.push_back(y[static_cast<std::size_t>(i)]);
        }
    const auto refit = svc_train(x2, y2, Kernel::linear(), cfg);
    for (int probe = 0; probe < 50; ++probe) {
        const Vector q = test::random_vector(rng, 2, -2, 2);
        CHECK(std::abs(svm_predict(fit.model, q) - svm_predict(refit.model, q)) < 1e-4);
    }
}

TEST_CASE("svc_train rejects single-class and malformed labels")
{
    const Matrix x = Matrix::Identity(3, 2);
    const std::vector<int> same{1, 1, 1};
    const std::vector<int> odd{1, 0, -1};
    CHECK_THROWS_AS(svc_train(x, same, Kernel::linear()), InvalidArgument);
    CHECK_THROWS_AS(svc_train(x, odd, Kernel::linear()), InvalidArgument);
}

TEST_CASE("svr_train")
{
    SUBCASE("constant targets")
    {
        test::Rng rng(1);
        const Matrix x = test::random_matrix(rng, 12, 2);
        const Vector t = Vector::Constant(12, 0.375);
        SvmTrainConfig cfg;
        cfg.epsilon_tube = 0.05;
        const auto fit = svr_train(x, t, Kernel::rbf(0.5), cfg);
        CHECK(fit.model.coef.size() == 0);
        CHECK(fit.model.b == doctest::Approx(0.375));
        CHECK(svm_predict(fit.model, vec({5.0, -3.0})) == doctest::Approx(0.375));
    }
    SUBCASE("identity line with a linear kernel stays inside the tube")
    {
        Matrix x(10, 1);
        Vector t(10);
        for (int i = 0; i < 10; ++i)
            x(i, 0) = t(i) = i / 9.0;
        SvmTrainConfig cfg;
        cfg.C = 100.0;
        cfg.epsilon_tube = 0.05;
        cfg.tolerance = 1e-8;
        const auto fit = svr_train(x, t, Kernel::linear(), cfg);
        const Vector f = svm_predict(fit.model, x);
        CHECK((f - t).cwiseAbs().maxCoeff() <= 0.05 + 1e-6);
    }
    SUBCASE("dual equality and box on random data")
    {
        test::Rng rng(19);
        for (int trial = 0; trial < 5; ++trial) {
            const Matrix x = test::random_matrix(rng, 30, 3);
            const Vector t = x.rowwise().sum().array().sin().matrix();
            SvmTrainConfig cfg;
            cfg.C = 3.0;
            const auto fit = svr_train(x, t, Kernel::rbf(1.0), cfg);
            CHECK(std::abs(fit.info.dual.sum()) < 1e-6);
            CHECK(fit.info.dual.cwiseAbs().maxCoeff() <= cfg.C + 1e-9);
        }
    }
    CHECK_THROWS_AS(svr_train(Matrix::Ones(1, 2), Vector::Ones(1), Kernel::linear()), InvalidArgument);
}

TEST_CASE("svm_predict on an empty model throws")
{
    SvmModel empty;
    CHECK_THROWS_AS(svm_predict(empty, vec({1.0})), InvalidArgument);
}
