#include "stockcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stockcast/error.hpp"

namespace stockcast::metrics {

namespace {

void check_pair(std::span<const double> a, std::span<const double> p, const char* fn)
{
    if (a.size() != p.size())
        throw InvalidArgument(std::string(fn) + ": series lengths differ (" + std::to_string(a.size()) +
                              " vs " + std::to_string(p.size()) + ")");
    if (a.empty())
        throw InvalidArgument(std::string(fn) + ": series are empty");
}

} // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted)
{
    check_pair(actual, predicted, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(actual.size()));
}

double map_metric(std::span<const double> actual, std::span<const double> predicted)
{
    check_pair(actual, predicted, "map_metric");
    double worst = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (predicted[i] == 0.0)
            throw InvalidArgument("map_metric: predicted value is zero on day " + std::to_string(i));
        worst = std::max(worst, 100.0 * std::abs(actual[i] - predicted[i]) / predicted[i]);
    }
    return worst;
}

double mape(std::span<const double> actual, std::span<const double> predicted)
{
    check_pair(actual, predicted, "mape");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0)
            throw InvalidArgument("mape: actual value is zero on day " + std::to_string(i));
        // Percent per term keeps round inputs exact: (10 + 5) / 2, not 0.15 / 2 * 100.
        s += 100.0 * std::abs(actual[i] - predicted[i]) / actual[i];
    }
    return s / static_cast<double>(actual.size());
}

std::optional<double> pearson_corr(std::span<const double> actual, std::span<const double> predicted)
{
    check_pair(actual, predicted, "pearson_corr");
    if (actual.size() < 2)
        throw InvalidArgument("pearson_corr: need at least 2 days");
    const auto n = static_cast<double>(actual.size());
    double ma = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ma += actual[i];
        mp += predicted[i];
    }
    ma /= n;
    mp /= n;
    double saa = 0.0, spp = 0.0, sap = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double da = actual[i] - ma;
        const double dp = predicted[i] - mp;
        saa += da * da;
        spp += dp * dp;
        sap += da * dp;
    }
    if (saa == 0.0 || spp == 0.0)
        return std::nullopt;
    return std::clamp(sap / std::sqrt(saa * spp), -1.0, 1.0);
}

EvalStats evaluate(std::span<const double> actual, std::span<const double> predicted)
{
    EvalStats s;
    s.rmse = rmse(actual, predicted);
    s.map = map_metric(actual, predicted);
    s.mape = mape(actual, predicted);
    s.corr = actual.size() >= 2 ? pearson_corr(actual, predicted) : std::nullopt;
    s.n_days = actual.size();
    return s;
}

} // namespace stockcast::metrics
