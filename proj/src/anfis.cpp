#include "stockcast/anfis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stockcast/error.hpp"

namespace stockcast::anfis {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::span<const double> as_span(const Vector& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace

MfKind kind_of(const MembershipFn& mf)
{
    return std::holds_alternative<Gaussian>(mf) ? MfKind::gaussian : MfKind::triangular;
}

std::size_t parameter_count(const MembershipFn& mf)
{
    return std::holds_alternative<Gaussian>(mf) ? 2 : 3;
}

void validate(const MembershipFn& mf)
{
    std::visit(overloaded{
                   [](const Gaussian& g) {
                       if (!(g.sigma > 0.0) || !std::isfinite(g.center))
                           throw InvalidArgument("gaussian membership needs sigma > 0");
                   },
                   [](const Triangular& t) {
                       if (!(t.left <= t.peak && t.peak <= t.right && t.left < t.right))
                           throw InvalidArgument("triangular membership needs left <= peak <= right, left < right");
                   },
               },
               mf);
}

MfGrade mf_eval_grad(const MembershipFn& mf, double x)
{
    MfGrade g;
    std::visit(overloaded{
                   [&](const Gaussian& m) {
                       const double u = (x - m.center) / m.sigma;
                       g.value = std::exp(-0.5 * u * u);
                       g.d[0] = g.value * u / m.sigma;
                       g.d[1] = g.value * u * u / m.sigma;
                   },
                   [&](const Triangular& m) {
                       if (x == m.peak) {
                           g.value = 1.0;
                       } else if (x > m.left && x < m.peak) {
                           const double w = m.peak - m.left;
                           g.value = (x - m.left) / w;
                           g.d[0] = (x - m.peak) / (w * w);
                           g.d[1] = -(x - m.left) / (w * w);
                       } else if (x > m.peak && x < m.right) {
                           const double w = m.right - m.peak;
                           g.value = (m.right - x) / w;
                           g.d[1] = (m.right - x) / (w * w);
                           g.d[2] = (x - m.peak) / (w * w);
                       }
                   },
               },
               mf);
    return g;
}

double mf_eval(const MembershipFn& mf, double x) { return mf_eval_grad(mf, x).value; }

std::size_t AnfisModel::rule_count() const
{
    if (mfs.empty())
        return 0;
    std::size_t r = 1;
    for (const auto& terms : mfs)
        r *= terms.size();
    return r;
}

std::vector<std::size_t> AnfisModel::rule_terms(std::size_t rule) const
{
    std::vector<std::size_t> terms(input_dim);
    for (std::size_t i = input_dim; i-- > 0;) {
        terms[i] = rule % mfs[i].size();
        rule /= mfs[i].size();
    }
    return terms;
}

std::size_t AnfisModel::premise_parameter_count() const
{
    std::size_t n = 0;
    for (const auto& terms : mfs)
        for (const auto& mf : terms)
            n += parameter_count(mf);
    return n;
}

Vector AnfisModel::premise_parameters() const
{
    Vector out(static_cast<Eigen::Index>(premise_parameter_count()));
    Eigen::Index k = 0;
    for (const auto& terms : mfs)
        for (const auto& mf : terms)
            std::visit(overloaded{
                           [&](const Gaussian& g) {
                               out(k++) = g.center;
                               out(k++) = g.sigma;
                           },
                           [&](const Triangular& t) {
                               out(k++) = t.left;
                               out(k++) = t.peak;
                               out(k++) = t.right;
                           },
                       },
                       mf);
    return out;
}

void AnfisModel::set_premise_parameters(const Vector& params)
{
    if (static_cast<std::size_t>(params.size()) != premise_parameter_count())
        throw InvalidArgument("set_premise_parameters: wrong parameter count");
    Eigen::Index k = 0;
    for (auto& terms : mfs)
        for (auto& mf : terms)
            std::visit(overloaded{
                           [&](Gaussian& g) {
                               g.center = params(k++);
                               g.sigma = params(k++);
                           },
                           [&](Triangular& t) {
                               t.left = params(k++);
                               t.peak = params(k++);
                               t.right = params(k++);
                           },
                       },
                       mf);
}

Vector AnfisModel::consequent_vector() const
{
    Vector out(static_cast<Eigen::Index>(consequent_parameter_count()));
    const auto cols = static_cast<Eigen::Index>(input_dim + 1);
    for (Eigen::Index r = 0; r < consequents.rows(); ++r)
        out.segment(r * cols, cols) = consequents.row(r).transpose();
    return out;
}

void AnfisModel::set_consequent_vector(const Vector& x)
{
    if (static_cast<std::size_t>(x.size()) != consequent_parameter_count())
        throw InvalidArgument("set_consequent_vector: wrong parameter count");
    const auto cols = static_cast<Eigen::Index>(input_dim + 1);
    consequents.resize(static_cast<Eigen::Index>(rule_count()), cols);
    for (Eigen::Index r = 0; r < consequents.rows(); ++r)
        consequents.row(r) = x.segment(r * cols, cols).transpose();
}

AnfisModel build_grid_rules(std::size_t d, std::size_t mfs_per_input,
                            std::span<const InputRange> input_ranges, MfKind kind)
{
    if (d == 0 || mfs_per_input == 0)
        throw InvalidArgument("build_grid_rules: need d >= 1 and at least one MF per input");
    if (input_ranges.size() != d)
        throw InvalidArgument("build_grid_rules: need one input range per input");

    AnfisModel m;
    m.input_dim = d;
    m.mfs.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto [lo, hi] = input_ranges[i];
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
            throw InvalidArgument("build_grid_rules: input " + std::to_string(i) +
                                  " has a degenerate range");
        const double spacing =
            mfs_per_input == 1 ? hi - lo : (hi - lo) / static_cast<double>(mfs_per_input - 1);
        for (std::size_t k = 0; k < mfs_per_input; ++k) {
            const double peak =
                mfs_per_input == 1 ? 0.5 * (lo + hi) : lo + static_cast<double>(k) * spacing;
            if (kind == MfKind::triangular)
                m.mfs[i].push_back(Triangular{peak - spacing, peak, peak + spacing});
            else
                m.mfs[i].push_back(Gaussian{peak, 0.5 * spacing});
        }
    }
    m.consequents = Matrix::Zero(static_cast<Eigen::Index>(m.rule_count()),
                                 static_cast<Eigen::Index>(d + 1));
    return m;
}

std::vector<InputRange> input_ranges(const SupervisedDataset& data)
{
    if (data.size() == 0)
        throw InvalidArgument("input_ranges: dataset is empty");
    std::vector<InputRange> out;
    for (Eigen::Index j = 0; j < data.x.cols(); ++j)
        out.push_back({data.x.col(j).minCoeff(), data.x.col(j).maxCoeff()});
    return out;
}

namespace {

// Grades and partials of every membership function at one input vector.
struct Grades {
    std::vector<std::vector<MfGrade>> g; // [input][term]
};

Grades eval_grades(const AnfisModel& model, std::span<const double> x)
{
    Grades out;
    out.g.resize(model.input_dim);
    for (std::size_t i = 0; i < model.input_dim; ++i)
        for (const auto& mf : model.mfs[i])
            out.g[i].push_back(mf_eval_grad(mf, x[i]));
    return out;
}

void check_input(const AnfisModel& model, std::size_t n)
{
    if (model.input_dim == 0 || model.rule_count() == 0)
        throw InvalidArgument("anfis: model has no rules");
    if (n != model.input_dim)
        throw InvalidArgument("anfis: expected " + std::to_string(model.input_dim) +
                              " inputs, got " + std::to_string(n));
}

ForwardPass forward_from_grades(const AnfisModel& model, const Grades& grades,
                                std::span<const double> x)
{
    const std::size_t rules = model.rule_count();
    ForwardPass fp;
    fp.strengths.resize(static_cast<Eigen::Index>(rules));
    std::vector<std::size_t> terms(model.input_dim, 0);
    for (std::size_t r = 0; r < rules; ++r) {
        double w = 1.0;
        for (std::size_t i = 0; i < model.input_dim; ++i)
            w *= grades.g[i][terms[i]].value;
        fp.strengths(static_cast<Eigen::Index>(r)) = w;
        // Advance the mixed-radix counter, last input fastest.
        for (std::size_t i = model.input_dim; i-- > 0;) {
            if (++terms[i] < model.mfs[i].size())
                break;
            terms[i] = 0;
        }
    }
    if (fp.strengths.sum() < kStrengthFloor) {
        fp.strengths = fp.strengths.cwiseMax(kStrengthFloor);
        fp.floored = true;
    }
    fp.normalized = fp.strengths / fp.strengths.sum();

    const auto d = static_cast<Eigen::Index>(model.input_dim);
    double out = 0.0;
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rules); ++r) {
        double f = model.consequents(r, d);
        for (Eigen::Index j = 0; j < d; ++j)
            f += model.consequents(r, j) * x[static_cast<std::size_t>(j)];
        out += fp.normalized(r) * f;
    }
    fp.output = out;
    return fp;
}

} // namespace

ForwardPass anfis_forward(const AnfisModel& model, std::span<const double> x)
{
    check_input(model, x.size());
    return forward_from_grades(model, eval_grades(model, x), x);
}

ForwardPass anfis_forward(const AnfisModel& model, const Vector& x) { return anfis_forward(model, as_span(x)); }

Vector anfis_predict(const AnfisModel& model, const Matrix& x)
{
    Vector out(x.rows());
    Vector row(x.cols());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        row = x.row(s).transpose();
        out(s) = anfis_forward(model, row).output;
    }
    return out;
}

double anfis_sse(const AnfisModel& model, const SupervisedDataset& data)
{
    return (anfis_predict(model, data.x) - data.t).squaredNorm();
}

Vector design_row(const AnfisModel& model, std::span<const double> x)
{
    const auto fp = anfis_forward(model, x);
    const auto d = static_cast<Eigen::Index>(model.input_dim);
    Vector a(fp.normalized.size() * (d + 1));
    for (Eigen::Index r = 0; r < fp.normalized.size(); ++r) {
        const double wn = fp.normalized(r);
        for (Eigen::Index j = 0; j < d; ++j)
            a(r * (d + 1) + j) = wn * x[static_cast<std::size_t>(j)];
        a(r * (d + 1) + d) = wn;
    }
    return a;
}

LseOutcome anfis_consequent_lse(AnfisModel model, const SupervisedDataset& data, const LseMode& mode)
{
    if (data.size() == 0)
        throw InvalidArgument("anfis_consequent_lse: dataset is empty");
    check_input(model, data.dim());
    const auto p = static_cast<Eigen::Index>(data.size());
    const auto m = static_cast<Eigen::Index>(model.consequent_parameter_count());

    LseOutcome out;
    out.underdetermined = m > p;
    Vector row(data.x.cols());
    if (std::holds_alternative<BatchLse>(mode)) {
        Matrix a(p, m);
        for (Eigen::Index s = 0; s < p; ++s) {
            row = data.x.row(s).transpose();
            a.row(s) = design_row(model, as_span(row)).transpose();
        }
        model.set_consequent_vector(linalg::lsq_solve(a, data.t).x);
    } else {
        auto st = linalg::rls_init(static_cast<std::size_t>(m), std::get<SequentialLse>(mode).gamma);
        for (Eigen::Index s = 0; s < p; ++s) {
            row = data.x.row(s).transpose();
            linalg::rls_update_inplace(st, design_row(model, as_span(row)), data.t(s), 1.0);
        }
        model.set_consequent_vector(st.x);
    }
    out.model = std::move(model);
    return out;
}

Vector anfis_premise_gradient(const AnfisModel& model, const SupervisedDataset& data)
{
    check_input(model, data.dim());
    const std::size_t d = model.input_dim;
    const std::size_t rules = model.rule_count();

    // Offset of each (input, term) block inside the flat premise vector.
    std::vector<std::vector<Eigen::Index>> offset(d);
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (const auto& mf : model.mfs[i]) {
            offset[i].push_back(k);
            k += static_cast<Eigen::Index>(parameter_count(mf));
        }
    Vector grad = Vector::Zero(k);

    std::vector<std::vector<std::size_t>> terms(rules);
    for (std::size_t r = 0; r < rules; ++r)
        terms[r] = model.rule_terms(r);

    Vector row(static_cast<Eigen::Index>(d));
    std::vector<double> prefix(d + 1), suffix(d + 1);
    std::vector<std::vector<double>> d_out_d_grade(d);
    for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(data.size()); ++s) {
        row = data.x.row(s).transpose();
        const auto xs = as_span(row);
        const Grades grades = eval_grades(model, xs);
        const ForwardPass fp = forward_from_grades(model, grades, xs);
        const double err2 = 2.0 * (fp.output - data.t(s));
        const double total = fp.strengths.sum();

        for (std::size_t i = 0; i < d; ++i)
            d_out_d_grade[i].assign(model.mfs[i].size(), 0.0);

        for (std::size_t r = 0; r < rules; ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            // Floored strengths are constants.
            if (fp.floored && fp.strengths(ri) <= kStrengthFloor)
                continue;
            double f = model.consequents(ri, static_cast<Eigen::Index>(d));
            for (std::size_t j = 0; j < d; ++j)
                f += model.consequents(ri, static_cast<Eigen::Index>(j)) * xs[j];
            const double d_out_d_w = (f - fp.output) / total;
            if (d_out_d_w == 0.0)
                continue;
            prefix[0] = 1.0;
            for (std::size_t i = 0; i < d; ++i)
                prefix[i + 1] = prefix[i] * grades.g[i][terms[r][i]].value;
            suffix[d] = 1.0;
            for (std::size_t i = d; i-- > 0;)
                suffix[i] = suffix[i + 1] * grades.g[i][terms[r][i]].value;
            for (std::size_t i = 0; i < d; ++i)
                d_out_d_grade[i][terms[r][i]] += d_out_d_w * prefix[i] * suffix[i + 1];
        }

        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t t = 0; t < model.mfs[i].size(); ++t) {
                const double c = err2 * d_out_d_grade[i][t];
                if (c == 0.0)
                    continue;
                const auto& g = grades.g[i][t];
                const std::size_t np = parameter_count(model.mfs[i][t]);
                for (std::size_t q = 0; q < np; ++q)
                    grad(offset[i][t] + static_cast<Eigen::Index>(q)) += c * g.d[q];
            }
    }
    return grad;
}

namespace {

void project_premises(AnfisModel& model)
{
    for (auto& terms : model.mfs)
        for (auto& mf : terms)
            std::visit(overloaded{
                           [](Gaussian& g) { g.sigma = std::max(g.sigma, 1e-6); },
                           [](Triangular& t) {
                               std::array<double, 3> v{t.left, t.peak, t.right};
                               std::sort(v.begin(), v.end());
                               if (v[2] - v[0] < 1e-9) {
                                   v[0] -= 5e-10;
                                   v[2] += 5e-10;
                               }
                               t = Triangular{v[0], v[1], v[2]};
                           },
                       },
                       mf);
}

} // namespace

EpochResult anfis_hybrid_epoch(AnfisModel model, const SupervisedDataset& data, double eta)
{
    if (!(eta >= 0.0))
        throw InvalidArgument("anfis_hybrid_epoch: eta must be >= 0");
    EpochResult out;
    out.model = anfis_consequent_lse(std::move(model), data, BatchLse{}).model;
    out.error = anfis_sse(out.model, data);
    if (!std::isfinite(out.error))
        throw NumericalError("anfis_hybrid_epoch: non-finite training error");
    if (eta > 0.0) {
        const Vector grad = anfis_premise_gradient(out.model, data);
        out.model.set_premise_parameters(out.model.premise_parameters() - eta * grad);
        project_premises(out.model);
    }
    return out;
}

AnfisTrainResult anfis_train(const SupervisedDataset& data, const AnfisTrainConfig& config)
{
    if (data.size() == 0)
        throw InvalidArgument("anfis_train: dataset is empty");
    if (!(config.eta >= 0.0))
        throw InvalidArgument("anfis_train: eta must be >= 0");
    const auto ranges = input_ranges(data);
    AnfisModel model = build_grid_rules(data.dim(), config.mfs_per_input, ranges, config.kind);

    AnfisTrainResult result;
    AnfisModel best;
    double best_error = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        AnfisModel premises_before = model;
        auto step = anfis_hybrid_epoch(std::move(model), data, config.eta);
        result.epoch_errors.push_back(step.error);
        if (step.error < best_error) {
            // The epoch error belongs to the pre-step premises paired with
            // the consequents fitted for them.
            best_error = step.error;
            best = std::move(premises_before);
            best.consequents = step.model.consequents;
        }
        model = std::move(step.model);
    }
    auto closing = anfis_consequent_lse(std::move(model), data, BatchLse{}).model;
    const double closing_error = anfis_sse(closing, data);
    result.model = closing_error <= best_error ? std::move(closing) : std::move(best);
    return result;
}

AnfisOnlineState anfis_online_init(AnfisModel model, double lambda, double gamma)
{
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw InvalidArgument("anfis_online_init: lambda must lie in (0, 1]");
    AnfisOnlineState st;
    st.rls = linalg::rls_init(model.consequent_parameter_count(), gamma);
    st.lambda = lambda;
    st.model = std::move(model);
    st.model.set_consequent_vector(st.rls.x);
    return st;
}

void anfis_online_update(AnfisOnlineState& state, std::span<const double> x, double t)
{
    linalg::rls_update_inplace(state.rls, design_row(state.model, x), t, state.lambda);
    state.model.set_consequent_vector(state.rls.x);
}

} // namespace stockcast::anfis
