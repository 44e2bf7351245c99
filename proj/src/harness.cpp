#include "stockcast/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <exception>
#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include "stockcast/anfis.hpp"
#include "stockcast/dbnn.hpp"
#include "stockcast/error.hpp"
#include "stockcast/lm.hpp"
#include "stockcast/metrics.hpp"
#include "stockcast/mlp.hpp"
#include "stockcast/svm.hpp"

namespace stockcast {

std::string_view phase_name(Phase p)
{
    return p == Phase::train ? "train" : "test";
}

Model train_model(ModelKind kind, const SupervisedDataset& train, const ExperimentConfig& config,
                  std::uint64_t seed)
{
    const auto d = train.dim();
    switch (kind) {
    case ModelKind::mlp: {
        lm::LmConfig lc;
        lc.max_epochs = config.mlp.epochs;
        return lm::lm_train(mlp_init(d, config.mlp.hidden, seed), train, lc).first;
    }
    case ModelKind::svm: {
        const auto& s = config.svm;
        svm::Kernel kernel;
        switch (s.kernel) {
        case svm::KernelKind::linear: kernel = svm::Kernel::linear(); break;
        case svm::KernelKind::polynomial: kernel = svm::Kernel::polynomial(s.degree, s.coef0); break;
        case svm::KernelKind::rbf: kernel = svm::Kernel::rbf(s.gamma.value_or(1.0 / static_cast<double>(d))); break;
        }
        svm::SvmTrainConfig tc;
        tc.C = s.C;
        tc.epsilon_tube = s.epsilon_tube;
        tc.tolerance = s.tolerance;
        tc.seed = seed;
        return svm::svr_train(train.x, train.t, kernel, tc).model;
    }
    case ModelKind::anfis: {
        anfis::AnfisTrainConfig ac;
        ac.mfs_per_input = config.anfis.mfs;
        ac.kind = config.anfis.kind;
        ac.epochs = config.anfis.epochs;
        ac.eta = config.anfis.eta;
        return anfis::anfis_train(train, ac).model;
    }
    case ModelKind::dbnn: {
        dbnn::DbnnRegConfig dc;
        dc.attribute_bins = config.dbnn.k;
        dc.target_bins = config.dbnn.k_t;
        dc.rounds = config.dbnn.rounds;
        dc.learn_rate = config.dbnn.learn_rate;
        return dbnn::dbnn_regress_train(train, dc);
    }
    }
    throw InvalidArgument("train_model: unknown model kind");
}

namespace {

struct PreparedDataset {
    const TimeSeriesFrame* raw = nullptr;
    std::string name;
    ScalerParams scaler;
    SupervisedDataset train;
    SupervisedDataset test;
    DatasetSummary summary;
};

double persistence_rmse(const TimeSeriesFrame& scaled, const SupervisedDataset& rows, std::size_t first_record,
                        Column target)
{
    std::vector<double> today(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        today[i] = scaled.records[first_record + i].value(target);
    return metrics::rmse({rows.t.data(), rows.size()}, today);
}

PreparedDataset prepare(const ExperimentConfig& cfg, const TimeSeriesFrame& frame, PipelineObserver* observer)
{
    PreparedDataset p;
    p.raw = &frame;
    p.name = frame.index_name;
    if (frame.size() <= cfg.horizon)
        throw DataError("needs more than " + std::to_string(cfg.horizon) + " records, has " +
                        std::to_string(frame.size()));
    const auto pairs = frame.size() - cfg.horizon;
    const auto n_train = train_row_count(pairs, cfg.train_fraction);

    // The scaler sees exactly the records the training pairs are built from.
    TimeSeriesFrame fit_frame;
    fit_frame.index_name = frame.index_name;
    fit_frame.records.assign(frame.records.begin(),
                             frame.records.begin() + static_cast<std::ptrdiff_t>(n_train + cfg.horizon));
    if (observer)
        observer->on_scaler_fit(p.name, fit_frame);

    std::vector<Column> columns = cfg.features;
    if (std::find(columns.begin(), columns.end(), cfg.target) == columns.end())
        columns.push_back(cfg.target);
    p.scaler = fit_scaler(fit_frame, columns);

    const auto scaled = apply_scale(frame, p.scaler);
    const auto all = make_supervised(scaled, cfg.features, cfg.target, cfg.horizon);
    std::tie(p.train, p.test) = chrono_split(all, cfg.train_fraction);

    p.summary.name = p.name;
    p.summary.features = cfg.features;
    p.summary.train_rows = p.train.size();
    p.summary.test_rows = p.test.size();
    p.summary.persistence_rmse_train = persistence_rmse(scaled, p.train, 0, cfg.target);
    p.summary.persistence_rmse_test = persistence_rmse(scaled, p.test, n_train, cfg.target);
    return p;
}

EvalRow evaluate_phase(const Model& model, const SupervisedDataset& rows, const PreparedDataset& ds,
                       Column target, Phase phase, ModelKind kind)
{
    const auto series = predict_series(model, rows, ds.scaler, target, *ds.raw);
    const Vector scaled = predict(model, rows.x);
    EvalRow row;
    row.model = std::string(model_kind_name(kind));
    row.dataset = ds.name;
    row.phase = phase;
    row.rmse_scaled = metrics::rmse({rows.t.data(), rows.size()}, {scaled.data(), rows.size()});
    const auto stats = metrics::evaluate(series.actual, series.predicted);
    row.map = stats.map;
    row.mape = stats.mape;
    row.corr = stats.corr;
    return row;
}

std::uint64_t task_seed(std::uint64_t seed, std::size_t dataset, ModelKind kind)
{
    // splitmix64 finalizer over the task coordinates
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (1 + dataset * 8 + static_cast<std::uint64_t>(kind));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct TaskOutput {
    Model model;
    double seconds = 0.0;
    std::exception_ptr error;
};

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, PipelineObserver* observer)
{
    config.validate();
    if (config.datasets.empty())
        throw InvalidArgument("config: data.paths is empty");
    std::vector<TimeSeriesFrame> frames;
    for (const auto& path : config.datasets)
        frames.push_back(load_ohlc_csv_file(path));
    return run_experiment(config, frames, observer);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<TimeSeriesFrame>& frames,
                                PipelineObserver* observer)
{
    config.validate();
    if (frames.empty())
        throw InvalidArgument("run_experiment: no datasets");
    std::set<std::string> names;
    for (const auto& f : frames)
        if (!names.insert(f.index_name).second)
            throw InvalidArgument("run_experiment: dataset name '" + f.index_name + "' used twice");

    std::vector<PreparedDataset> prepared;
    for (const auto& f : frames) {
        try {
            prepared.push_back(prepare(config, f, observer));
        } catch (const Error& e) {
            throw Error("dataset '" + f.index_name + "': " + e.what());
        }
    }

    struct Task {
        std::size_t dataset;
        ModelKind kind;
    };
    std::vector<Task> tasks;
    for (std::size_t d = 0; d < prepared.size(); ++d)
        for (auto kind : config.models)
            tasks.push_back({d, kind});

    std::vector<TaskOutput> outputs(tasks.size());
    auto run_task = [&](std::size_t i) {
        const auto& task = tasks[i];
        const auto& ds = prepared[task.dataset];
        try {
            if (observer)
                observer->on_train(ds.name, task.kind, ds.train);
            const auto t0 = std::chrono::steady_clock::now();
            outputs[i].model = train_model(task.kind, ds.train, config, task_seed(config.seed, task.dataset, task.kind));
            outputs[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } catch (...) {
            outputs[i].error = std::current_exception();
        }
    };

    const auto workers = std::min(config.threads, tasks.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                    run_task(i);
            });
        for (auto& t : pool)
            t.join();
    }

    ExperimentResult result;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& task = tasks[i];
        const auto& ds = prepared[task.dataset];
        const auto where = "dataset '" + ds.name + "', model '" + std::string(model_kind_name(task.kind)) + "': ";
        try {
            if (outputs[i].error)
                std::rethrow_exception(outputs[i].error);
            const auto& model = outputs[i].model;
            for (auto phase : {Phase::train, Phase::test}) {
                auto row = evaluate_phase(model, phase == Phase::train ? ds.train : ds.test, ds, config.target,
                                          phase, task.kind);
                if (config.timing)
                    row.train_seconds = outputs[i].seconds;
                result.report.rows.push_back(std::move(row));
            }
            auto series = predict_series(model, ds.test, ds.scaler, config.target, *ds.raw);
            series.model = std::string(model_kind_name(task.kind));
            result.predictions.push_back(std::move(series));
            result.models.push_back(
                {ds.name, ModelFile{model, PipelineSpec{config.features, config.target, config.horizon, ds.scaler}}});
        } catch (const std::exception& e) {
            throw Error(where + e.what());
        }
    }
    for (const auto& ds : prepared)
        result.datasets.push_back(ds.summary);
    return result;
}

// ---- reports --------------------------------------------------------------

namespace {

std::string real_text(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string opt_text(const std::optional<double>& v)
{
    return v ? real_text(*v) : "NA";
}

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

double parse_real(const std::string& s, int line_no)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("report line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

std::optional<double> parse_opt(const std::string& s, int line_no)
{
    if (s == "NA")
        return std::nullopt;
    return parse_real(s, line_no);
}

constexpr std::string_view kReportHeader = "model,dataset,phase,rmse_scaled,map,mape,corr,train_seconds";

void emit_text(std::ostream& out, const EvalReport& report)
{
    // Column order follows first appearance in the report.
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    for (const auto& r : report.rows) {
        if (std::find(models.begin(), models.end(), r.model) == models.end())
            models.push_back(r.model);
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end())
            datasets.push_back(r.dataset);
    }
    auto find = [&](const std::string& m, const std::string& d, Phase p) -> const EvalRow* {
        for (const auto& r : report.rows)
            if (r.model == m && r.dataset == d && r.phase == p)
                return &r;
        return nullptr;
    };
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w)
            s.append(w - s.size(), ' ');
        return s;
    };
    constexpr std::size_t w0 = 8;
    constexpr std::size_t w = 16;

    out << "RMSE (scaled)\n" << pad("model", w0);
    for (const auto& d : datasets)
        out << pad(d + " train", w) << pad(d + " test", w);
    out << '\n';
    for (const auto& m : models) {
        out << pad(m, w0);
        for (const auto& d : datasets)
            for (auto p : {Phase::train, Phase::test}) {
                const auto* r = find(m, d, p);
                out << pad(r ? fixed(r->rmse_scaled, 6) : "-", w);
            }
        out << '\n';
    }

    bool any_time = false;
    for (const auto& r : report.rows)
        any_time = any_time || r.train_seconds.has_value();
    if (any_time) {
        out << "\nTraining time (s)\n" << pad("model", w0);
        for (const auto& d : datasets)
            out << pad(d, w);
        out << '\n';
        for (const auto& m : models) {
            out << pad(m, w0);
            for (const auto& d : datasets) {
                const auto* r = find(m, d, Phase::train);
                out << pad(r && r->train_seconds ? fixed(*r->train_seconds, 3) : "-", w);
            }
            out << '\n';
        }
    }

    for (const auto& d : datasets) {
        out << "\nTest statistics, " << d << " (raw units)\n"
            << pad("model", w0) << pad("corr", w) << pad("MAP %", w) << pad("MAPE %", w) << '\n';
        for (const auto& m : models) {
            const auto* r = find(m, d, Phase::test);
            if (!r)
                continue;
            out << pad(m, w0) << pad(r->corr ? fixed(*r->corr, 4) : "NA", w) << pad(fixed(r->map, 4), w)
                << pad(fixed(r->mape, 4), w) << '\n';
        }
    }
}

} // namespace

void emit_report(std::ostream& out, const EvalReport& report, ReportFormat format)
{
    if (format == ReportFormat::text) {
        emit_text(out, report);
        return;
    }
    out << kReportHeader << '\n';
    for (const auto& r : report.rows)
        out << r.model << ',' << r.dataset << ',' << phase_name(r.phase) << ',' << real_text(r.rmse_scaled) << ','
            << real_text(r.map) << ',' << real_text(r.mape) << ',' << opt_text(r.corr) << ','
            << opt_text(r.train_seconds) << '\n';
}

EvalReport parse_report_csv(std::istream& in)
{
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line))
        throw FormatError("report is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kReportHeader)
        throw FormatError("report header must be '" + std::string(kReportHeader) + "'");
    EvalReport report;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = split_csv(line);
        if (f.size() != 8)
            throw FormatError("report line " + std::to_string(line_no) + ": expected 8 fields");
        EvalRow r;
        r.model = f[0];
        r.dataset = f[1];
        if (f[2] == "train") r.phase = Phase::train;
        else if (f[2] == "test") r.phase = Phase::test;
        else throw FormatError("report line " + std::to_string(line_no) + ": bad phase '" + f[2] + "'");
        r.rmse_scaled = parse_real(f[3], line_no);
        r.map = parse_real(f[4], line_no);
        r.mape = parse_real(f[5], line_no);
        r.corr = parse_opt(f[6], line_no);
        r.train_seconds = parse_opt(f[7], line_no);
        report.rows.push_back(std::move(r));
    }
    return report;
}

PredictionSeries predict_series(const Model& model, const SupervisedDataset& rows, const ScalerParams& scaler,
                                Column target, const TimeSeriesFrame& raw)
{
    if (rows.target_dates.size() != rows.size())
        throw InvalidArgument("predict_series: rows carry no target dates");
    PredictionSeries s;
    s.dataset = raw.index_name;
    s.dates = rows.target_dates;
    const Vector scaled = predict(model, rows.x);
    s.predicted = invert_scale({scaled.data(), rows.size()}, scaler, target);
    s.actual.reserve(rows.size());
    for (const auto& date : rows.target_dates) {
        auto it = std::lower_bound(raw.records.begin(), raw.records.end(), date,
                                   [](const OhlcRecord& r, const Date& d) { return r.date < d; });
        if (it == raw.records.end() || it->date != date)
            throw DataError("predict_series: date " + format_date(date) + " missing from '" + raw.index_name + "'");
        s.actual.push_back(it->value(target));
    }
    return s;
}

void emit_predictions(std::ostream& out, const PredictionSeries& series)
{
    out << "date,actual,predicted\n";
    for (std::size_t i = 0; i < series.dates.size(); ++i)
        out << format_date(series.dates[i]) << ',' << real_text(series.actual[i]) << ','
            << real_text(series.predicted[i]) << '\n';
}

void emit_predictions(std::ostream& out, const Model& model, const SupervisedDataset& rows,
                      const ScalerParams& scaler, Column target, const TimeSeriesFrame& raw)
{
    emit_predictions(out, predict_series(model, rows, scaler, target, raw));
}

} // namespace stockcast
