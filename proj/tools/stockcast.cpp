// Command-line front end: run experiments, predict with saved models,
// generate synthetic data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stockcast/config.hpp"
#include "stockcast/dataio.hpp"
#include "stockcast/error.hpp"
#include "stockcast/harness.hpp"
#include "stockcast/model_io.hpp"
#include "stockcast/synth.hpp"

namespace fs = std::filesystem;
using namespace stockcast;

namespace {

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write '" + path.string() + "'");
    return out;
}

void check_written(std::ofstream& out, const fs::path& path)
{
    out.flush();
    if (!out)
        throw Error("failed writing '" + path.string() + "'");
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> threads)
{
    auto config = load_config(config_path);
    if (seed)
        config.seed = *seed;
    if (threads)
        config.threads = *threads;
    const auto result = run_experiment(config);

    fs::create_directories(out_dir / "models");
    fs::create_directories(out_dir / "predictions");
    {
        const auto path = out_dir / "report.csv";
        auto out = open_out(path);
        emit_report(out, result.report, ReportFormat::csv);
        check_written(out, path);
    }
    {
        const auto path = out_dir / "report.txt";
        auto out = open_out(path);
        emit_report(out, result.report, ReportFormat::text);
        out << '\n';
        for (const auto& ds : result.datasets) {
            out << ds.name << ": " << ds.train_rows << " train / " << ds.test_rows << " test rows, d="
                << ds.features.size() << " (";
            for (std::size_t i = 0; i < ds.features.size(); ++i)
                out << (i ? "," : "") << column_name(ds.features[i]);
            out << "), persistence test RMSE " << ds.persistence_rmse_test << '\n';
        }
        check_written(out, path);
    }
    for (const auto& s : result.predictions) {
        const auto path = out_dir / "predictions" / (s.dataset + "_" + s.model + ".csv");
        auto out = open_out(path);
        emit_predictions(out, s);
        check_written(out, path);
    }
    for (const auto& m : result.models) {
        const auto name = m.dataset + "_" + std::string(model_kind_name(kind_of(m.file.model))) + ".model";
        save_model((out_dir / "models" / name).string(), m.file);
    }
    emit_report(std::cout, result.report, ReportFormat::text);
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::optional<fs::path>& out_dir)
{
    const auto file = load_model(model_path);
    if (!file.pipeline)
        throw FormatError(model_path + ": no pipeline section; cannot map raw quotes to model inputs");
    const auto& p = *file.pipeline;
    if (p.features.size() != input_dim(file.model))
        throw FormatError(model_path + ": pipeline feature count does not match the model");
    const auto raw = load_ohlc_csv_file(data_path);
    const auto rows = make_supervised(apply_scale(raw, p.scaler), p.features, p.target, p.horizon);
    auto series = predict_series(file.model, rows, p.scaler, p.target, raw);
    if (out_dir) {
        fs::create_directories(*out_dir);
        const auto path = *out_dir / "predictions.csv";
        auto out = open_out(path);
        emit_predictions(out, series);
        check_written(out, path);
    } else {
        emit_predictions(std::cout, series);
    }
    return 0;
}

int cmd_synth(std::size_t n, const fs::path& out_path, std::uint64_t seed)
{
    const auto frame = synth_logistic_ohlc(n, seed);
    if (out_path.has_parent_path())
        fs::create_directories(out_path.parent_path());
    auto out = open_out(out_path);
    write_ohlc_csv(out, frame);
    check_written(out, out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Next-day stock index forecasting with MLP, SVM, ANFIS and DBNN models"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Train and evaluate every configured model");
    std::string config_path;
    std::string run_out = "stockcast-out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    run->add_option("--config", config_path, "Experiment config (key = value lines)")->required();
    run->add_option("--out", run_out, "Output directory")->capture_default_str();
    run->add_option("--seed", seed, "Override run.seed");
    run->add_option("--threads", threads, "Override run.threads")->check(CLI::PositiveNumber);

    auto* pred = app.add_subcommand("predict", "Forecast with a saved model");
    std::string model_path;
    std::string data_path;
    std::optional<std::string> pred_out;
    pred->add_option("--model", model_path, "Model file written by run")->required();
    pred->add_option("--data", data_path, "OHLC CSV")->required();
    pred->add_option("--out", pred_out, "Write predictions.csv here instead of stdout");

    auto* synth = app.add_subcommand("synth", "Write a synthetic logistic-map OHLC series");
    std::size_t n_days = 0;
    std::string synth_out;
    std::uint64_t synth_seed = 1;
    synth->add_option("--n", n_days, "Number of trade days")->required()->check(CLI::PositiveNumber);
    synth->add_option("--out", synth_out, "CSV path")->required();
    synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run)
            return cmd_run(config_path, run_out, seed, threads);
        if (*pred)
            return cmd_predict(model_path, data_path,
                               pred_out ? std::optional<fs::path>(*pred_out) : std::nullopt);
        return cmd_synth(n_days, synth_out, synth_seed);
    } catch (const std::exception& e) {
        std::cerr << "stockcast: error: " << e.what() << '\n';
        return 1;
    }
}
