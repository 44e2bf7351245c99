#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stockcast/anfis.hpp"
#include "stockcast/config.hpp"
#include "stockcast/dataio.hpp"
#include "stockcast/dbnn.hpp"
#include "stockcast/error.hpp"
#include "stockcast/harness.hpp"
#include "stockcast/linalg.hpp"
#include "stockcast/lm.hpp"
#include "stockcast/metrics.hpp"
#include "stockcast/mlp.hpp"
#include "stockcast/model_io.hpp"
#include "stockcast/svm.hpp"
#include "stockcast/synth.hpp"

namespace py = pybind11;
using namespace stockcast;

namespace {

SupervisedDataset to_dataset(const Matrix& x, const Vector& t)
{
    if (x.rows() != t.size())
        throw InvalidArgument("X has " + std::to_string(x.rows()) + " rows but t has " +
                              std::to_string(t.size()) + " entries");
    SupervisedDataset d;
    d.x = x;
    d.t = t;
    return d;
}

svm::Kernel make_kernel(const std::string& kind, std::optional<double> gamma, int degree, double coef0,
                        std::size_t d)
{
    if (kind == "linear")
        return svm::Kernel::linear();
    if (kind == "polynomial")
        return svm::Kernel::polynomial(degree, coef0);
    if (kind == "rbf")
        return svm::Kernel::rbf(gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(d, 1))));
    throw InvalidArgument("unknown kernel '" + kind + "'");
}

std::span<const double> as_span(const Vector& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// Holder for the model variant; a bare std::variant would be picked up by
// pybind11's variant caster instead of the Model class.
struct PyModel {
    Model model;
};

py::dict frame_to_dict(const TimeSeriesFrame& f)
{
    std::vector<std::string> dates;
    for (const auto& r : f.records)
        dates.push_back(format_date(r.date));
    py::dict out;
    out["name"] = f.index_name;
    out["date"] = dates;
    for (auto c : {Column::open, Column::high, Column::low, Column::close})
        out[py::str(std::string(column_name(c)))] = f.column(c);
    return out;
}

py::dict row_to_dict(const EvalRow& r)
{
    py::dict d;
    d["model"] = r.model;
    d["dataset"] = r.dataset;
    d["phase"] = std::string(phase_name(r.phase));
    d["rmse_scaled"] = r.rmse_scaled;
    d["map"] = r.map;
    d["mape"] = r.mape;
    d["corr"] = r.corr;
    d["train_seconds"] = r.train_seconds;
    return d;
}

} // namespace

PYBIND11_MODULE(_stockcast, m)
{
    m.doc() = "Stock index forecasting with MLP, SVM, ANFIS and DBNN models";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    // linear algebra
    m.def("lsq_solve", [](const Matrix& a, const Vector& b) { return linalg::lsq_solve(a, b).x; },
          py::arg("A"), py::arg("b"), "Minimum-norm least-squares solution of A x = b.");
    m.def(
        "rls_solve",
        [](const Matrix& a, const Vector& b, double lam, double gamma) {
            if (a.rows() != b.size())
                throw InvalidArgument("rls_solve: A and b disagree in length");
            auto state = linalg::rls_init(static_cast<std::size_t>(a.cols()), gamma);
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                linalg::rls_update_inplace(state, a.row(i).transpose(), b(i), lam);
            return state.x;
        },
        py::arg("A"), py::arg("b"), py::arg("lam") = 1.0, py::arg("gamma") = linalg::kDefaultRlsGamma,
        "Feeds the rows of A one at a time through recursive least squares.");
    m.def("psd_check", &linalg::psd_check, py::arg("G"), py::arg("tol") = 1e-9);

    // metrics
    m.def("rmse", [](const Vector& a, const Vector& p) { return metrics::rmse(as_span(a), as_span(p)); },
          py::arg("actual"), py::arg("predicted"));
    m.def("map_metric", [](const Vector& a, const Vector& p) { return metrics::map_metric(as_span(a), as_span(p)); },
          py::arg("actual"), py::arg("predicted"), "Max percentage error over the predicted value.");
    m.def("mape", [](const Vector& a, const Vector& p) { return metrics::mape(as_span(a), as_span(p)); },
          py::arg("actual"), py::arg("predicted"), "Mean percentage error over the actual value.");
    m.def("pearson_corr", [](const Vector& a, const Vector& p) { return metrics::pearson_corr(as_span(a), as_span(p)); },
          py::arg("actual"), py::arg("predicted"), "None when either series has zero variance.");

    // data
    m.def("load_ohlc_csv", [](const std::string& path) { return frame_to_dict(load_ohlc_csv_file(path)); },
          py::arg("path"));
    m.def("synth_ohlc", [](std::size_t n, std::uint64_t seed) { return frame_to_dict(synth_logistic_ohlc(n, seed)); },
          py::arg("n"), py::arg("seed") = 1);
    m.def(
        "write_synth_csv",
        [](const std::string& path, std::size_t n, std::uint64_t seed) {
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw Error("cannot write '" + path + "'");
            write_ohlc_csv(out, synth_logistic_ohlc(n, seed));
        },
        py::arg("path"), py::arg("n"), py::arg("seed") = 1);

    // models
    py::class_<PyModel>(m, "Model")
        .def_property_readonly("kind", [](const PyModel& mod) { return std::string(model_kind_name(kind_of(mod.model))); })
        .def_property_readonly("input_dim", [](const PyModel& mod) { return input_dim(mod.model); })
        .def("predict", [](const PyModel& mod, const Matrix& x) { return predict(mod.model, x); }, py::arg("X"))
        .def(
            "save",
            [](const PyModel& mod, const std::string& path) { save_model(path, ModelFile{mod.model, std::nullopt}); },
            py::arg("path"))
        .def("__repr__", [](const PyModel& mod) {
            return "<stockcast.Model " + std::string(model_kind_name(kind_of(mod.model))) + " d=" +
                   std::to_string(input_dim(mod.model)) + ">";
        });
    m.def("load_model", [](const std::string& path) { return PyModel{load_model(path).model}; }, py::arg("path"));

    m.def(
        "train_mlp",
        [](const Matrix& x, const Vector& t, std::size_t hidden, std::size_t epochs, std::uint64_t seed) {
            auto data = to_dataset(x, t);
            lm::LmConfig cfg;
            cfg.max_epochs = epochs;
            auto [model, trace] = lm::lm_train(mlp_init(data.dim(), hidden, seed), data, cfg);
            return py::make_tuple(PyModel{Model(std::move(model))}, trace.initial_psi, trace.final_psi(), trace.epochs);
        },
        py::arg("X"), py::arg("t"), py::arg("hidden") = 26, py::arg("epochs") = 50, py::arg("seed") = 1,
        "Levenberg-Marquardt training. Returns (model, initial_sse, final_sse, epochs).");
    m.def(
        "train_svr",
        [](const Matrix& x, const Vector& t, const std::string& kernel, std::optional<double> gamma, int degree,
           double coef0, double c, double epsilon) {
            svm::SvmTrainConfig cfg;
            cfg.C = c;
            cfg.epsilon_tube = epsilon;
            return PyModel{Model(svm::svr_train(x, t, make_kernel(kernel, gamma, degree, coef0, x.cols()), cfg).model)};
        },
        py::arg("X"), py::arg("t"), py::arg("kernel") = "rbf", py::arg("gamma") = py::none(),
        py::arg("degree") = 3, py::arg("coef0") = 1.0, py::arg("C") = 10.0, py::arg("epsilon") = 0.01);
    m.def(
        "train_svc",
        [](const Matrix& x, const std::vector<int>& y, const std::string& kernel, std::optional<double> gamma,
           int degree, double coef0, double c) {
            svm::SvmTrainConfig cfg;
            cfg.C = c;
            return PyModel{Model(svm::svc_train(x, y, make_kernel(kernel, gamma, degree, coef0, x.cols()), cfg).model)};
        },
        py::arg("X"), py::arg("y"), py::arg("kernel") = "linear", py::arg("gamma") = py::none(),
        py::arg("degree") = 3, py::arg("coef0") = 1.0, py::arg("C") = 10.0,
        "Soft-margin classifier on labels +1/-1; predict returns decision values.");
    m.def(
        "train_anfis",
        [](const Matrix& x, const Vector& t, std::size_t mfs, const std::string& kind, std::size_t epochs,
           double eta) {
            anfis::AnfisTrainConfig cfg;
            cfg.mfs_per_input = mfs;
            if (kind == "triangular") cfg.kind = anfis::MfKind::triangular;
            else if (kind == "gaussian") cfg.kind = anfis::MfKind::gaussian;
            else throw InvalidArgument("unknown membership function kind '" + kind + "'");
            cfg.epochs = epochs;
            cfg.eta = eta;
            return PyModel{Model(anfis::anfis_train(to_dataset(x, t), cfg).model)};
        },
        py::arg("X"), py::arg("t"), py::arg("mfs") = 3, py::arg("kind") = "triangular", py::arg("epochs") = 12,
        py::arg("eta") = 0.01);
    m.def(
        "train_dbnn",
        [](const Matrix& x, const Vector& t, std::size_t k, std::size_t k_t, std::size_t rounds, double lr) {
            dbnn::DbnnRegConfig cfg;
            cfg.attribute_bins = k;
            cfg.target_bins = k_t;
            cfg.rounds = rounds;
            cfg.learn_rate = lr;
            return PyModel{Model(dbnn::dbnn_regress_train(to_dataset(x, t), cfg))};
        },
        py::arg("X"), py::arg("t"), py::arg("K") = 16, py::arg("K_t") = 32, py::arg("rounds") = 50,
        py::arg("learn_rate") = 0.5);
    m.def("anfis_rule_count",
          [](std::size_t d, std::size_t mfs) {
              std::vector<anfis::InputRange> ranges(d);
              return anfis::build_grid_rules(d, mfs, ranges).rule_count();
          },
          py::arg("d"), py::arg("mfs") = 3);

    // experiments
    m.def(
        "run_experiment",
        [](const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> threads) {
            auto cfg = load_config(config_path);
            if (seed)
                cfg.seed = *seed;
            if (threads)
                cfg.threads = *threads;
            ExperimentResult result;
            {
                py::gil_scoped_release release;
                result = run_experiment(cfg);
            }
            py::list rows;
            for (const auto& r : result.report.rows)
                rows.append(row_to_dict(r));
            std::ostringstream csv;
            emit_report(csv, result.report, ReportFormat::csv);
            py::dict out;
            out["rows"] = rows;
            out["csv"] = csv.str();
            py::list persistence;
            for (const auto& ds : result.datasets)
                persistence.append(py::make_tuple(ds.name, ds.persistence_rmse_test));
            out["persistence_rmse_test"] = persistence;
            return out;
        },
        py::arg("config_path"), py::arg("seed") = py::none(), py::arg("threads") = py::none(),
        "Runs the configured pipeline; returns report rows, the CSV report and persistence baselines.");
}
