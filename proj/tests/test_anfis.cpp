#include <doctest.h>

#include "oracles.hpp"
#include "stockcast/anfis.hpp"
#include "stockcast/error.hpp"

using namespace stockcast;
using namespace stockcast::anfis;

namespace {

std::vector<InputRange> unit_ranges(std::size_t d)
{
    return std::vector<InputRange>(d, InputRange{0.0, 1.0});
}

AnfisModel random_model(test::Rng& rng, std::size_t d, std::size_t m, MfKind kind)
{
    auto model = build_grid_rules(d, m, unit_ranges(d), kind);
    // Jitter the premises, keeping them valid.
    Vector p = model.premise_parameters();
    p += test::random_vector(rng, p.size(), -0.05, 0.05);
    model.set_premise_parameters(p);
    for (auto& in : model.mfs)
        for (auto& mf : in)
            if (auto* t = std::get_if<Triangular>(&mf)) {
                double v[3] = {t->left, t->peak, t->right};
                std::sort(v, v + 3);
                *t = {v[0], v[1], v[2]};
            }
    model.set_consequent_vector(test::random_vector(rng, static_cast<Eigen::Index>(model.consequent_parameter_count())));
    return model;
}

} // namespace

TEST_CASE("build_grid_rules counts")
{
    CHECK(build_grid_rules(3, 3, unit_ranges(3)).rule_count() == 27);
    CHECK(build_grid_rules(4, 3, unit_ranges(4)).rule_count() == 81);
    CHECK(build_grid_rules(1, 1, unit_ranges(1)).rule_count() == 1);
    const auto m = build_grid_rules(2, 3, unit_ranges(2));
    CHECK(m.consequents.rows() == 9);
    CHECK(m.consequents.cols() == 3);
    CHECK(m.consequents.isZero());
    CHECK(m.premise_parameter_count() == 2 * 3 * 3);
    CHECK(m.rule_terms(5) == std::vector<std::size_t>{1, 2});
    const std::vector<InputRange> flat{{2.0, 2.0}};
    CHECK_THROWS_AS(build_grid_rules(1, 3, flat), InvalidArgument);
    CHECK_THROWS_AS(build_grid_rules(0, 3, unit_ranges(0)), InvalidArgument);
}

TEST_CASE("grid layout")
{
    const auto tri = build_grid_rules(1, 3, unit_ranges(1));
    const auto& t0 = std::get<Triangular>(tri.mfs[0][0]);
    const auto& t1 = std::get<Triangular>(tri.mfs[0][1]);
    CHECK(t0.peak == 0.0);
    CHECK(t1.left == 0.0);
    CHECK(t1.peak == 0.5);
    CHECK(t1.right == 1.0);
    const auto gau = build_grid_rules(1, 3, unit_ranges(1), MfKind::gaussian);
    CHECK(std::get<Gaussian>(gau.mfs[0][2]).center == 1.0);
    CHECK(std::get<Gaussian>(gau.mfs[0][2]).sigma == 0.25);
}

TEST_CASE("mf_eval")
{
    CHECK(mf_eval(Gaussian{0.3, 2.0}, 0.3) == 1.0);
    CHECK(mf_eval(Triangular{0, 1, 2}, 1.0) == 1.0);
    CHECK(mf_eval(Triangular{0, 1, 2}, 3.0) == 0.0);
    CHECK(mf_eval(Triangular{0, 1, 2}, 0.5) == 0.5);
    CHECK(mf_eval(Gaussian{0, 1}, 1.0) == doctest::Approx(0.60653065971).epsilon(1e-10));
    CHECK_THROWS_AS(validate(Gaussian{0, 0}), InvalidArgument);
    CHECK_THROWS_AS(validate(Triangular{1, 0, 2}), InvalidArgument);
    CHECK_THROWS_AS(validate(Triangular{1, 1, 1}), InvalidArgument);
}

TEST_CASE("mf_eval_grad matches central differences")
{
    test::Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const Vector r = test::random_vector(rng, 4, -1, 1);
        const double x = r(3);
        if (trial % 2) {
            Gaussian g{r(0), 0.2 + std::abs(r(1))};
            const auto grade = mf_eval_grad(g, x);
            const double h = 1e-6;
            CHECK(grade.d[0] == doctest::Approx((mf_eval(Gaussian{g.center + h, g.sigma}, x) -
                                                 mf_eval(Gaussian{g.center - h, g.sigma}, x)) / (2 * h)).epsilon(1e-6));
            CHECK(grade.d[1] == doctest::Approx((mf_eval(Gaussian{g.center, g.sigma + h}, x) -
                                                 mf_eval(Gaussian{g.center, g.sigma - h}, x)) / (2 * h)).epsilon(1e-6));
        } else {
            double v[3] = {r(0), r(1), r(2)};
            std::sort(v, v + 3);
            Triangular t{v[0] - 0.1, v[1], v[2] + 0.1};
            const double h = 1e-7;
            // Stay away from the kinks.
            if (std::abs(x - t.left) < 1e-3 || std::abs(x - t.peak) < 1e-3 || std::abs(x - t.right) < 1e-3)
                continue;
            const auto grade = mf_eval_grad(t, x);
            for (int k = 0; k < 3; ++k) {
                Triangular up = t, dn = t;
                double* pu = k == 0 ? &up.left : k == 1 ? &up.peak : &up.right;
                double* pd = k == 0 ? &dn.left : k == 1 ? &dn.peak : &dn.right;
                *pu += h;
                *pd -= h;
                CHECK(grade.d[static_cast<std::size_t>(k)] ==
                      doctest::Approx((mf_eval(up, x) - mf_eval(dn, x)) / (2 * h)).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("anfis_forward")
{
    SUBCASE("single rule is a linear model")
    {
        auto m = build_grid_rules(2, 1, unit_ranges(2));
        m.consequents << 2.0, -1.0, 0.5;
        const Vector x = Vector::Map(std::vector<double>{0.3, 0.9}.data(), 2);
        const auto fp = anfis_forward(m, x);
        CHECK(fp.output == doctest::Approx(2 * 0.3 - 0.9 + 0.5));
        CHECK(fp.normalized.size() == 1);
        CHECK(fp.normalized(0) == 1.0);
    }
    SUBCASE("symmetric gaussians at the midpoint")
    {
        AnfisModel m;
        m.input_dim = 1;
        m.mfs = {{Gaussian{0.0, 1.0}, Gaussian{2.0, 1.0}}};
        m.consequents = Matrix::Zero(2, 2);
        m.consequents(1, 1) = 2.0;
        CHECK(anfis_forward(m, Vector::Constant(1, 1.0)).output == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("normalized strengths sum to one")
    {
        test::Rng rng(5);
        for (auto kind : {MfKind::triangular, MfKind::gaussian}) {
            const auto m = random_model(rng, 3, 3, kind);
            for (int i = 0; i < 200; ++i) {
                const auto fp = anfis_forward(m, test::random_vector(rng, 3, 0.0, 1.0));
                CHECK(std::abs(fp.normalized.sum() - 1.0) < 1e-12);
            }
        }
    }
    SUBCASE("inputs outside every triangle are floored, not undefined")
    {
        const auto m = build_grid_rules(1, 3, unit_ranges(1));
        const auto fp = anfis_forward(m, Vector::Constant(1, 7.0));
        CHECK(fp.floored);
        CHECK(std::isfinite(fp.output));
        CHECK(std::abs(fp.normalized.sum() - 1.0) < 1e-12);
    }
    const auto m = build_grid_rules(2, 2, unit_ranges(2));
    CHECK_THROWS_AS(anfis_forward(m, Vector::Zero(3)), InvalidArgument);
}

TEST_CASE("anfis_consequent_lse")
{
    test::Rng rng(7);
    SUBCASE("single rule recovers a line")
    {
        Matrix x = test::random_matrix(rng, 40, 1, 0.0, 1.0);
        Vector t = (2.0 * x.col(0).array() + 1.0).matrix();
        const auto out = anfis_consequent_lse(build_grid_rules(1, 1, unit_ranges(1)), test::make_dataset(x, t));
        CHECK(std::abs(out.model.consequents(0, 0) - 2.0) < 1e-8);
        CHECK(std::abs(out.model.consequents(0, 1) - 1.0) < 1e-8);
    }
    SUBCASE("representable targets are fitted exactly")
    {
        const auto truth = random_model(rng, 2, 2, MfKind::gaussian);
        const Matrix x = test::random_matrix(rng, 60, 2, 0.0, 1.0);
        const auto data = test::make_dataset(x, anfis_predict(truth, x));
        auto start = truth;
        start.consequents.setZero();
        const auto out = anfis_consequent_lse(start, data);
        CHECK(anfis_sse(out.model, data) < 1e-16);
    }
    SUBCASE("sequential matches batch")
    {
        for (int trial = 0; trial < 5; ++trial) {
            const auto m = random_model(rng, 2, 2, MfKind::gaussian);
            const Matrix x = test::random_matrix(rng, 50, 2, 0.0, 1.0);
            const auto data = test::make_dataset(x, test::random_vector(rng, 50));
            const auto batch = anfis_consequent_lse(m, data, BatchLse{});
            const auto seq = anfis_consequent_lse(m, data, SequentialLse{1e8});
            CHECK(test::rel_err(seq.model.consequent_vector(), batch.model.consequent_vector()) < 1e-4);
        }
    }
    SUBCASE("underdetermined systems are flagged")
    {
        const auto m = build_grid_rules(2, 3, unit_ranges(2));
        const Matrix x = test::random_matrix(rng, 5, 2, 0.0, 1.0);
        CHECK(anfis_consequent_lse(m, test::make_dataset(x, Vector::Ones(5))).underdetermined);
    }
    SUBCASE("no random perturbation improves the fitted consequents")
    {
        const auto m = random_model(rng, 2, 3, MfKind::triangular);
        const Matrix x = test::random_matrix(rng, 80, 2, 0.0, 1.0);
        const auto data = test::make_dataset(x, (x.col(0).array() * x.col(1).array()).sin().matrix());
        const auto fit = anfis_consequent_lse(m, data).model;
        const double e0 = anfis_sse(fit, data);
        const Vector c = fit.consequent_vector();
        for (int k = 0; k < 500; ++k) {
            auto probe = fit;
            probe.set_consequent_vector(c + 1e-3 * test::random_vector(rng, c.size()).normalized());
            CHECK(anfis_sse(probe, data) >= e0);
        }
    }
}

TEST_CASE("anfis_premise_gradient")
{
    test::Rng rng(13);
    for (auto kind : {MfKind::gaussian, MfKind::triangular}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto m = random_model(rng, 2, 2 + trial % 2, kind);
            const Matrix x = test::random_matrix(rng, 15, 2, 0.05, 0.95);
            const auto data = test::make_dataset(x, test::random_vector(rng, 15));
            const Vector g = anfis_premise_gradient(m, data);
            const Vector fd = test::central_gradient(
                [&](const Vector& p) {
                    auto k = m;
                    k.set_premise_parameters(p);
                    return anfis_sse(k, data);
                },
                m.premise_parameters(), 1e-7);
            CHECK((g - fd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
        }
    }
    SUBCASE("zero error gives a zero gradient")
    {
        const auto m = random_model(rng, 2, 2, MfKind::gaussian);
        const Matrix x = test::random_matrix(rng, 10, 2, 0.0, 1.0);
        const auto data = test::make_dataset(x, anfis_predict(m, x));
        CHECK(anfis_premise_gradient(m, data).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("a membership function that never fires has zero gradient")
    {
        AnfisModel m;
        m.input_dim = 1;
        m.mfs = {{Triangular{0.0, 0.25, 0.5}, Triangular{0.25, 0.5, 1.0}, Triangular{5.0, 6.0, 7.0}}};
        m.consequents = test::random_matrix(rng, 3, 2);
        const Matrix x = test::random_matrix(rng, 20, 1, 0.05, 0.95);
        const auto g = anfis_premise_gradient(m, test::make_dataset(x, test::random_vector(rng, 20)));
        CHECK(g.segment(6, 3).isZero());
    }
}

TEST_CASE("anfis_hybrid_epoch")
{
    test::Rng rng(17);
    const Matrix x = test::random_matrix(rng, 60, 2, 0.0, 1.0);
    const auto data = test::make_dataset(x, (3.0 * x.col(0).array() * x.col(1).array()).cos().matrix());
    auto m = build_grid_rules(2, 3, input_ranges(data), MfKind::gaussian);

    const auto still = anfis_hybrid_epoch(m, data, 0.0);
    CHECK(still.model.premise_parameters() == m.premise_parameters());
    CHECK(still.error == doctest::Approx(anfis_sse(still.model, data)));
    CHECK(still.error <= anfis_sse(m, data));

    const auto moved = anfis_hybrid_epoch(m, data, 0.01);
    CHECK(moved.model.premise_parameters() != m.premise_parameters());
    CHECK(std::isfinite(moved.error));
}

TEST_CASE("twelve epochs halve the error on a target from a model of the same structure")
{
    test::Rng rng(29);
    for (auto kind : {MfKind::triangular, MfKind::gaussian}) {
        const auto truth = random_model(rng, 2, 3, kind);
        const Matrix x = test::random_matrix(rng, 120, 2, 0.0, 1.0);
        const auto data = test::make_dataset(x, anfis_predict(truth, x));
        AnfisTrainConfig cfg;
        cfg.kind = kind;
        const auto start = build_grid_rules(2, 3, input_ranges(data), kind);
        const double e_init = anfis_sse(start, data);
        const auto res = anfis_train(data, cfg);
        CHECK(res.epoch_errors.size() == 12);
        CHECK(anfis_sse(res.model, data) <= 0.5 * e_init);
    }
}

TEST_CASE("online updates")
{
    test::Rng rng(31);
    const auto m = random_model(rng, 2, 2, MfKind::gaussian);
    const Matrix x = test::random_matrix(rng, 40, 2, 0.0, 1.0);
    const Vector t = test::random_vector(rng, 40);

    SUBCASE("lambda = 1 is bitwise the sequential LSE")
    {
        auto state = anfis_online_init(m, 1.0, 1e8);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Vector row = x.row(i).transpose();
            anfis_online_update(state, {row.data(), 2}, t(i));
        }
        const auto seq = anfis_consequent_lse(m, test::make_dataset(x, t), SequentialLse{1e8});
        CHECK(state.model.consequents == seq.model.consequents);
        CHECK(state.model.premise_parameters() == m.premise_parameters());
    }
    SUBCASE("constant pair converges with lambda = 0.5")
    {
        auto state = anfis_online_init(m, 0.5);
        const double xs[2] = {0.4, 0.6};
        int hit = -1;
        for (int k = 1; k <= 50; ++k) {
            anfis_online_update(state, xs, 1.25);
            if (std::abs(anfis_forward(state.model, std::span<const double>(xs, 2)).output - 1.25) < 1e-6) {
                hit = k;
                break;
            }
        }
        CHECK(hit > 0);
    }
    CHECK_THROWS_AS(anfis_online_init(m, 0.0), InvalidArgument);
    CHECK_THROWS_AS(anfis_online_init(m, 1.1), InvalidArgument);
}
