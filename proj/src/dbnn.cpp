#include "stockcast/dbnn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "stockcast/error.hpp"

namespace stockcast::dbnn {

std::size_t AttributeBins::bin_of(std::size_t attribute, double value) const
{
    const auto& c = cuts[attribute];
    return static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), value) - c.begin());
}

double AttributeBins::bin_width(std::size_t attribute) const
{
    return (hi[attribute] - lo[attribute]) / static_cast<double>(bin_count(attribute));
}

double AttributeBins::bin_center(std::size_t attribute, std::size_t bin) const
{
    if (degenerate[attribute])
        return lo[attribute];
    return lo[attribute] + (static_cast<double>(bin) + 0.5) * bin_width(attribute);
}

AttributeBins dbnn_fit_bins(const Matrix& x, std::size_t k)
{
    if (k < 2)
        throw InvalidArgument("dbnn_fit_bins: need at least 2 bins per attribute");
    if (x.rows() == 0 || x.cols() == 0)
        throw InvalidArgument("dbnn_fit_bins: dataset is empty");
    linalg::require_finite(x, "dbnn_fit_bins: data");
    AttributeBins b;
    for (Eigen::Index m = 0; m < x.cols(); ++m) {
        const double lo = x.col(m).minCoeff();
        const double hi = x.col(m).maxCoeff();
        b.lo.push_back(lo);
        b.hi.push_back(hi);
        std::vector<double> cuts;
        const bool degenerate = !(hi > lo);
        if (!degenerate) {
            const double w = (hi - lo) / static_cast<double>(k);
            for (std::size_t i = 1; i < k; ++i)
                cuts.push_back(lo + static_cast<double>(i) * w);
        }
        b.cuts.push_back(std::move(cuts));
        b.degenerate.push_back(degenerate);
    }
    return b;
}

AttributeBins dbnn_fit_bins(const SupervisedDataset& data, std::size_t k)
{
    return dbnn_fit_bins(data.x, k);
}

std::size_t DbnnModel::class_index(int label) const
{
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
        throw InvalidArgument("dbnn: unknown class label " + std::to_string(label));
    return static_cast<std::size_t>(it - classes.begin());
}

namespace {

std::vector<std::size_t> encode(const AttributeBins& bins, std::span<const double> x)
{
    if (x.size() != bins.attribute_count())
        throw InvalidArgument("dbnn: expected " + std::to_string(bins.attribute_count()) +
                              " attributes, got " + std::to_string(x.size()));
    std::vector<std::size_t> u(x.size());
    for (std::size_t m = 0; m < x.size(); ++m)
        u[m] = bins.bin_of(m, x[m]);
    return u;
}

Vector posterior_of_bins(const DbnnModel& model, const std::vector<std::size_t>& u)
{
    const auto c = static_cast<Eigen::Index>(model.classes.size());
    Vector log_score(c);
    for (Eigen::Index k = 0; k < c; ++k) {
        double s = std::log(model.priors(k));
        for (std::size_t m = 0; m < u.size(); ++m) {
            const auto b = static_cast<Eigen::Index>(u[m]);
            s += std::log(model.weights[m](b, k) * model.likelihoods[m](b, k));
        }
        log_score(k) = s;
    }
    const double top = log_score.maxCoeff();
    Vector p = (log_score.array() - top).exp();
    return p / p.sum();
}

Eigen::Index argmax(const Vector& v)
{
    Eigen::Index best = 0;
    v.maxCoeff(&best);
    return best;
}

struct Encoded {
    std::vector<std::vector<std::size_t>> rows;
    std::vector<Eigen::Index> cls;
};

double accuracy_of(const DbnnModel& model, const Encoded& enc)
{
    std::size_t ok = 0;
    for (std::size_t s = 0; s < enc.rows.size(); ++s)
        if (argmax(posterior_of_bins(model, enc.rows[s])) == enc.cls[s])
            ++ok;
    return static_cast<double>(ok) / static_cast<double>(enc.rows.size());
}

} // namespace

DbnnFit dbnn_train(const Matrix& x, std::span<const int> labels, AttributeBins bins,
                   const DbnnTrainConfig& config)
{
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0)
        throw InvalidArgument("dbnn_train: no training examples");
    if (labels.size() != n)
        throw InvalidArgument("dbnn_train: need one label per example");
    if (static_cast<std::size_t>(x.cols()) != bins.attribute_count())
        throw InvalidArgument("dbnn_train: bins do not match the attribute count");
    if (!(config.learn_rate > 0.0))
        throw InvalidArgument("dbnn_train: learn_rate must be > 0");

    DbnnFit fit;
    DbnnModel& model = fit.model;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2)
        throw InvalidArgument("dbnn_train: need at least two classes");
    model.bins = std::move(bins);

    const auto c = static_cast<Eigen::Index>(model.classes.size());
    const std::size_t d = model.bins.attribute_count();

    Encoded enc;
    Vector row(x.cols());
    for (std::size_t s = 0; s < n; ++s) {
        row = x.row(static_cast<Eigen::Index>(s)).transpose();
        enc.rows.push_back(encode(model.bins, {row.data(), static_cast<std::size_t>(row.size())}));
        enc.cls.push_back(static_cast<Eigen::Index>(model.class_index(labels[s])));
    }

    Vector class_count = Vector::Zero(c);
    for (auto k : enc.cls)
        class_count(k) += 1.0;
    model.priors = class_count / static_cast<double>(n);

    for (std::size_t m = 0; m < d; ++m) {
        const auto nb = static_cast<Eigen::Index>(model.bins.bin_count(m));
        Matrix counts = Matrix::Zero(nb, c);
        for (std::size_t s = 0; s < n; ++s)
            counts(static_cast<Eigen::Index>(enc.rows[s][m]), enc.cls[s]) += 1.0;
        Matrix lik(nb, c);
        for (Eigen::Index k = 0; k < c; ++k)
            lik.col(k) = (counts.col(k).array() + 1.0) / (class_count(k) + static_cast<double>(nb));
        model.likelihoods.push_back(std::move(lik));
        model.weights.push_back(Matrix::Ones(nb, c));
    }

    auto& report = fit.report;
    report.accuracy.push_back(accuracy_of(model, enc));
    double best_acc = report.accuracy.front();
    std::vector<Matrix> best_weights = model.weights;

    for (std::size_t round = 1; round <= config.rounds; ++round) {
        if (report.accuracy.back() >= 1.0)
            break;
        for (std::size_t s = 0; s < n; ++s) {
            const Vector post = posterior_of_bins(model, enc.rows[s]);
            const Eigen::Index truth = enc.cls[s];
            Eigen::Index rival = -1;
            for (Eigen::Index k = 0; k < c; ++k)
                if (k != truth && (rival < 0 || post(k) > post(rival)))
                    rival = k;
            if (argmax(post) == truth)
                continue;
            const double err = post(rival) - post(truth);
            const double factor = 1.0 + config.learn_rate * err;
            for (std::size_t m = 0; m < d; ++m)
                model.weights[m](static_cast<Eigen::Index>(enc.rows[s][m]), truth) *= factor;
        }
        report.rounds_run = round;
        report.accuracy.push_back(accuracy_of(model, enc));
        if (report.accuracy.back() > best_acc) {
            best_acc = report.accuracy.back();
            best_weights = model.weights;
            report.best_round = round;
        }
    }
    if (config.keep_best)
        model.weights = std::move(best_weights);
    else
        report.best_round = report.rounds_run;
    return fit;
}

Vector dbnn_posterior(const DbnnModel& model, std::span<const double> x)
{
    if (model.classes.empty())
        throw InvalidArgument("dbnn_posterior: model is untrained");
    return posterior_of_bins(model, encode(model.bins, x));
}

Vector dbnn_posterior(const DbnnModel& model, const Vector& x)
{
    return dbnn_posterior(model, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

int dbnn_classify(const DbnnModel& model, std::span<const double> x)
{
    return model.classes[static_cast<std::size_t>(argmax(dbnn_posterior(model, x)))];
}

double dbnn_accuracy(const DbnnModel& model, const Matrix& x, std::span<const int> labels)
{
    if (static_cast<std::size_t>(x.rows()) != labels.size() || labels.empty())
        throw InvalidArgument("dbnn_accuracy: need one label per row");
    std::size_t ok = 0;
    Vector row(x.cols());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        row = x.row(s).transpose();
        if (dbnn_classify(model, {row.data(), static_cast<std::size_t>(row.size())}) ==
            labels[static_cast<std::size_t>(s)])
            ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(labels.size());
}

DbnnRegressor dbnn_regress_train(const SupervisedDataset& data, const DbnnRegConfig& config)
{
    if (config.target_bins < 2)
        throw InvalidArgument("dbnn_regress_train: need at least 2 target bins");
    if (data.size() == 0)
        throw InvalidArgument("dbnn_regress_train: dataset is empty");

    DbnnRegressor reg;
    Matrix t_col = data.t;
    reg.target_bins = dbnn_fit_bins(t_col, config.target_bins);
    auto attr_bins = dbnn_fit_bins(data.x, config.attribute_bins);

    std::vector<int> labels(data.size());
    for (std::size_t s = 0; s < data.size(); ++s)
        labels[s] = static_cast<int>(reg.target_bins.bin_of(0, data.t(static_cast<Eigen::Index>(s))));
    const bool single = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); });
    if (single) {
        reg.constant = true;
        reg.constant_value = reg.target_bins.bin_center(0, static_cast<std::size_t>(labels.front()));
        reg.classifier.bins = std::move(attr_bins);
        return reg;
    }
    DbnnTrainConfig tc;
    tc.rounds = config.rounds;
    tc.learn_rate = config.learn_rate;
    reg.classifier = dbnn_train(data.x, labels, std::move(attr_bins), tc).model;
    return reg;
}

double dbnn_regress_predict(const DbnnRegressor& model, std::span<const double> x)
{
    if (x.size() != model.input_dim())
        throw InvalidArgument("dbnn_regress_predict: expected " + std::to_string(model.input_dim()) +
                              " inputs, got " + std::to_string(x.size()));
    if (model.constant)
        return model.constant_value;
    const Vector post = dbnn_posterior(model.classifier, x);
    double y = 0.0;
    for (std::size_t k = 0; k < model.classifier.classes.size(); ++k)
        y += post(static_cast<Eigen::Index>(k)) *
             model.target_bins.bin_center(0, static_cast<std::size_t>(model.classifier.classes[k]));
    return y;
}

Vector dbnn_regress_predict(const DbnnRegressor& model, const Matrix& x)
{
    Vector out(x.rows());
    Vector row(x.cols());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        row = x.row(s).transpose();
        out(s) = dbnn_regress_predict(model, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    }
    return out;
}

} // namespace stockcast::dbnn
