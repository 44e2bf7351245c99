#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stockcast/dataio.hpp"
#include "stockcast/error.hpp"
#include "stockcast/model.hpp"

namespace stockcast {

/// Preprocessing a model was trained behind: which columns feed it, what it
/// predicts and how raw quotes were scaled.
struct PipelineSpec {
    std::vector<Column> features;
    Column target = Column::close;
    std::size_t horizon = 1;
    ScalerParams scaler;
};

struct ModelFile {
    Model model;
    std::optional<PipelineSpec> pipeline;
};

inline constexpr int kModelFormatVersion = 1;

/// Line-oriented text format. Reals are written in shortest round-trip form,
/// so a save/load cycle reproduces predictions bit for bit. The file ends
/// with an `end` line; anything missing it is reported as truncated.
void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);

void save_model(const std::string& path, const ModelFile& file);
ModelFile load_model(const std::string& path);

/// Loads `path` and checks that it holds a `T`; throws ModelTypeError if not.
template <class T>
T load_model_as(const std::string& path)
{
    ModelFile f = load_model(path);
    if (auto* m = std::get_if<T>(&f.model))
        return std::move(*m);
    throw ModelTypeError(path + ": file holds a " + std::string(model_kind_name(kind_of(f.model))) +
                         " model");
}

} // namespace stockcast
