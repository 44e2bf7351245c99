#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stockcast/dataio.hpp"
#include "stockcast/linalg.hpp"

namespace stockcast::dbnn {

/// Equal-width discretization of each attribute over its training range.
/// Values outside the range fall into the edge bins.
struct AttributeBins {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::vector<double>> cuts; // interior cut points per attribute
    std::vector<bool> degenerate;          // constant attribute: single bin

    std::size_t attribute_count() const { return lo.size(); }
    std::size_t bin_count(std::size_t attribute) const { return cuts[attribute].size() + 1; }
    std::size_t bin_of(std::size_t attribute, double value) const;
    double bin_center(std::size_t attribute, std::size_t bin) const;
    double bin_width(std::size_t attribute) const;
};

/// `k` equal-width bins per column of `x`. A constant column gets a single
/// bin and is flagged as degenerate.
AttributeBins dbnn_fit_bins(const Matrix& x, std::size_t k);
AttributeBins dbnn_fit_bins(const SupervisedDataset& data, std::size_t k);

/// Naive-Bayes tables with per-cell boost weights.
///
///   score_k = P(C_k) * prod_m weight_m(u_m, k) * P(u_m | C_k)
///
/// Likelihoods are Laplace-smoothed counts: (count + 1) / (n_k + bins_m).
struct DbnnModel {
    AttributeBins bins;
    std::vector<int> classes;        // class labels, ascending
    Vector priors;                   // n_k / n
    std::vector<Matrix> likelihoods; // per attribute: bins x classes
    std::vector<Matrix> weights;     // per attribute: bins x classes, start at 1

    std::size_t class_index(int label) const;
};

struct DbnnTrainConfig {
    std::size_t rounds = 50;
    double learn_rate = 0.5;
    bool keep_best = true; // return the weights with the best training accuracy
};

struct DbnnTrainReport {
    std::vector<double> accuracy; // [0] before boosting, then after each round
    std::size_t rounds_run = 0;
    std::size_t best_round = 0;
};

struct DbnnFit {
    DbnnModel model;
    DbnnTrainReport report;
};

/// Counts the naive-Bayes tables, then boosts: every misclassified example
/// multiplies the weights of its true class's cells by
/// 1 + learn_rate * (P(rival) - P(true)), where the rival is the
/// highest-posterior wrong class. One classifier is refined throughout;
/// training stops early once every example is classified correctly.
DbnnFit dbnn_train(const Matrix& x, std::span<const int> labels, AttributeBins bins,
                   const DbnnTrainConfig& config = {});

/// Normalized posterior over `model.classes`.
Vector dbnn_posterior(const DbnnModel& model, std::span<const double> x);
Vector dbnn_posterior(const DbnnModel& model, const Vector& x);

int dbnn_classify(const DbnnModel& model, std::span<const double> x);

double dbnn_accuracy(const DbnnModel& model, const Matrix& x, std::span<const int> labels);

struct DbnnRegConfig {
    std::size_t attribute_bins = 16;
    std::size_t target_bins = 32;
    std::size_t rounds = 50;
    double learn_rate = 0.5;
};

/// Classifier over equal-width target bins; predictions are the
/// posterior-weighted mean of the bin centers.
struct DbnnRegressor {
    DbnnModel classifier;     // class label = target bin index
    AttributeBins target_bins; // single attribute: the target
    bool constant = false;     // only one target bin was populated
    double constant_value = 0.0;

    std::size_t input_dim() const { return classifier.bins.attribute_count(); }
};

DbnnRegressor dbnn_regress_train(const SupervisedDataset& data, const DbnnRegConfig& config = {});

double dbnn_regress_predict(const DbnnRegressor& model, std::span<const double> x);
Vector dbnn_regress_predict(const DbnnRegressor& model, const Matrix& x);

} // namespace stockcast::dbnn
