#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stockcast/anfis.hpp"
#include "stockcast/dataio.hpp"
#include "stockcast/model.hpp"
#include "stockcast/svm.hpp"

namespace stockcast {

struct MlpSettings {
    std::size_t hidden = 26;
    std::size_t epochs = 50;
};

struct SvmSettings {
    svm::KernelKind kernel = svm::KernelKind::rbf;
    std::optional<double> gamma; // unset: 1 / d
    int degree = 3;
    double coef0 = 1.0;
    double C = 10.0;
    double epsilon_tube = 0.01;
    double tolerance = 1e-4;
};

struct AnfisSettings {
    std::size_t mfs = 3;
    anfis::MfKind kind = anfis::MfKind::triangular;
    std::size_t epochs = 12;
    double eta = 0.01;
};

struct DbnnSettings {
    std::size_t k = 16;   // bins per input attribute
    std::size_t k_t = 32; // target bins
    std::size_t rounds = 50;
    double learn_rate = 0.5;
};

struct ExperimentConfig {
    std::vector<std::string> datasets;
    std::vector<Column> features{Column::open, Column::low, Column::high};
    Column target = Column::close;
    std::size_t horizon = 1;
    double train_fraction = 0.5;
    std::string scaler = "minmax";
    std::vector<ModelKind> models{ModelKind::mlp, ModelKind::svm, ModelKind::anfis, ModelKind::dbnn};
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    bool timing = true; // write train_seconds; off gives byte-identical reports

    MlpSettings mlp;
    SvmSettings svm;
    AnfisSettings anfis;
    DbnnSettings dbnn;

    /// Throws InvalidArgument on an inconsistent configuration.
    void validate() const;
};

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// ignored. Relative dataset paths resolve against `base_dir`. Unknown keys,
/// repeated keys and malformed values are errors that cite the line.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const ExperimentConfig& config);

} // namespace stockcast
