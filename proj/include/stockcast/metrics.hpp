#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace stockcast::metrics {

/// sqrt(mean((a - p)^2))
double rmse(std::span<const double> actual, std::span<const double> predicted);

/// Maximum absolute percentage error with the PREDICTED value as the
/// denominator: max_i |a_i - p_i| / p_i * 100.
double map_metric(std::span<const double> actual, std::span<const double> predicted);

/// Mean absolute percentage error with the ACTUAL value as the denominator:
/// mean_i |a_i - p_i| / a_i * 100.
double mape(std::span<const double> actual, std::span<const double> predicted);

/// Sample Pearson correlation; nullopt when either series has zero variance.
std::optional<double> pearson_corr(std::span<const double> actual, std::span<const double> predicted);

struct EvalStats {
    double rmse = 0.0;
    double map = 0.0;
    double mape = 0.0;
    std::optional<double> corr;
    std::size_t n_days = 0;
};

EvalStats evaluate(std::span<const double> actual, std::span<const double> predicted);

} // namespace stockcast::metrics
