#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stockcast/config.hpp"
#include "stockcast/dataio.hpp"
#include "stockcast/model.hpp"
#include "stockcast/model_io.hpp"

namespace stockcast {

enum class Phase { train, test };

std::string_view phase_name(Phase p);

struct EvalRow {
    std::string model;
    std::string dataset;
    Phase phase = Phase::train;
    double rmse_scaled = 0.0;
    double map = 0.0;  // percent, raw units
    double mape = 0.0; // percent, raw units
    std::optional<double> corr;
    std::optional<double> train_seconds; // absent when timing is disabled

    bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    bool operator==(const EvalReport&) const = default;
};

/// Plot-ready forecast for one model on one dataset, in raw index units.
struct PredictionSeries {
    std::string model;
    std::string dataset;
    std::vector<Date> dates; // target dates
    std::vector<double> actual;
    std::vector<double> predicted;
};

struct TrainedModel {
    std::string dataset;
    ModelFile file;
};

struct DatasetSummary {
    std::string name;
    std::vector<Column> features;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    double persistence_rmse_train = 0.0; // tomorrow = today, scaled target
    double persistence_rmse_test = 0.0;
};

struct ExperimentResult {
    EvalReport report;
    std::vector<PredictionSeries> predictions;
    std::vector<TrainedModel> models;
    std::vector<DatasetSummary> datasets;
};

/// Hooks into the pipeline, mainly for tests. With more than one worker
/// thread `on_train` is called concurrently.
class PipelineObserver {
public:
    virtual ~PipelineObserver() = default;
    virtual void on_scaler_fit(const std::string& /*dataset*/, const TimeSeriesFrame& /*fit_frame*/) {}
    virtual void on_train(const std::string& /*dataset*/, ModelKind /*kind*/,
                          const SupervisedDataset& /*train*/) {}
};

/// Trains one model on already scaled rows.
Model train_model(ModelKind kind, const SupervisedDataset& train, const ExperimentConfig& config,
                  std::uint64_t seed);

/// Loads every configured dataset and runs the pipeline on each.
ExperimentResult run_experiment(const ExperimentConfig& config, PipelineObserver* observer = nullptr);

/// Same pipeline on in-memory frames; `config.datasets` is ignored.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<TimeSeriesFrame>& frames,
                                PipelineObserver* observer = nullptr);

enum class ReportFormat { csv, text };

/// CSV columns `model,dataset,phase,rmse_scaled,map,mape,corr,train_seconds`
/// with reals in shortest round-trip form and `NA` for missing values.
/// The text form groups RMSE by dataset and phase, then the test-set
/// statistics per model.
void emit_report(std::ostream& out, const EvalReport& report, ReportFormat format);
EvalReport parse_report_csv(std::istream& in);

/// Predicts every row of `rows` (scaled features) and maps the output back to
/// raw units. Actual values are looked up by target date in `raw`, so they
/// equal the source quotes exactly.
PredictionSeries predict_series(const Model& model, const SupervisedDataset& rows, const ScalerParams& scaler,
                                Column target, const TimeSeriesFrame& raw);

/// CSV `date,actual,predicted`.
void emit_predictions(std::ostream& out, const PredictionSeries& series);
void emit_predictions(std::ostream& out, const Model& model, const SupervisedDataset& rows,
                      const ScalerParams& scaler, Column target, const TimeSeriesFrame& raw);

} // namespace stockcast
