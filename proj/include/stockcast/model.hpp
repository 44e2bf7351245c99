#pragma once

#include <span>
#include <string_view>
#include <variant>

#include "stockcast/anfis.hpp"
#include "stockcast/dbnn.hpp"
#include "stockcast/linalg.hpp"
#include "stockcast/mlp.hpp"
#include "stockcast/svm.hpp"

namespace stockcast {

/// Any trained forecaster. All alternatives map a feature row to a scalar.
using Model = std::variant<MlpModel, svm::SvmModel, anfis::AnfisModel, dbnn::DbnnRegressor>;

enum class ModelKind { mlp, svm, anfis, dbnn };

std::string_view model_kind_name(ModelKind kind);

/// Throws InvalidArgument("unknown model '...'") for anything but
/// mlp, svm, anfis, dbnn.
ModelKind parse_model_kind(std::string_view name);

ModelKind kind_of(const Model& model);
std::size_t input_dim(const Model& model);

double predict(const Model& model, std::span<const double> x);
Vector predict(const Model& model, const Matrix& x);

} // namespace stockcast
