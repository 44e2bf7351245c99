#include "stockcast/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "stockcast/error.hpp"

namespace stockcast {

MlpModel mlp_init(std::size_t d, std::size_t h, std::uint64_t seed)
{
    if (d == 0 || h == 0)
        throw InvalidArgument("mlp_init: input and hidden sizes must be >= 1");
    MlpModel m;
    m.input_dim = d;
    m.hidden = h;
    m.weights.resize(static_cast<Eigen::Index>(m.parameter_count()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (Eigen::Index i = 0; i < m.weights.size(); ++i)
        m.weights(i) = dist(rng);
    return m;
}

double mlp_forward(const MlpModel& model, std::span<const double> x)
{
    if (x.size() != model.input_dim)
        throw InvalidArgument("mlp_forward: expected " + std::to_string(model.input_dim) +
                              " inputs, got " + std::to_string(x.size()));
    const auto& w = model.weights;
    const std::size_t d = model.input_dim;
    const std::size_t out = model.output_offset();
    double y = w(static_cast<Eigen::Index>(out + model.hidden));
    for (std::size_t k = 0; k < model.hidden; ++k) {
        const std::size_t base = model.hidden_offset(k);
        double z = w(static_cast<Eigen::Index>(base + d));
        for (std::size_t j = 0; j < d; ++j)
            z += w(static_cast<Eigen::Index>(base + j)) * x[j];
        y += w(static_cast<Eigen::Index>(out + k)) * std::tanh(z);
    }
    return y;
}

double mlp_forward(const MlpModel& model, const Vector& x)
{
    return mlp_forward(model, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Vector mlp_predict(const MlpModel& model, const Matrix& x)
{
    Vector y(x.rows());
    Vector row(x.cols());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        row = x.row(s).transpose();
        y(s) = mlp_forward(model, row);
    }
    return y;
}

ErrorJacobian mlp_error_jacobian(const MlpModel& model, const SupervisedDataset& data)
{
    if (data.dim() != model.input_dim)
        throw InvalidArgument("mlp_error_jacobian: dataset has " + std::to_string(data.dim()) +
                              " features, model expects " + std::to_string(model.input_dim));
    const auto n = static_cast<Eigen::Index>(data.size());
    const std::size_t d = model.input_dim;
    const std::size_t h = model.hidden;
    const std::size_t out = model.output_offset();
    const auto& w = model.weights;

    ErrorJacobian r;
    r.j.resize(static_cast<Eigen::Index>(model.parameter_count()), n);
    r.e.resize(n);
    Vector act(static_cast<Eigen::Index>(h));

    for (Eigen::Index s = 0; s < n; ++s) {
        auto col = r.j.col(s);
        // Forward.
        double y = w(static_cast<Eigen::Index>(out + h));
        for (std::size_t k = 0; k < h; ++k) {
            const std::size_t base = model.hidden_offset(k);
            double z = w(static_cast<Eigen::Index>(base + d));
            for (std::size_t j = 0; j < d; ++j)
                z += w(static_cast<Eigen::Index>(base + j)) * data.x(s, static_cast<Eigen::Index>(j));
            act(static_cast<Eigen::Index>(k)) = std::tanh(z);
            y += w(static_cast<Eigen::Index>(out + k)) * act(static_cast<Eigen::Index>(k));
        }
        r.e(s) = y - data.t(s);

        // Backward: de/dy = 1.
        col(static_cast<Eigen::Index>(out + h)) = 1.0;
        for (std::size_t k = 0; k < h; ++k) {
            const double a = act(static_cast<Eigen::Index>(k));
            col(static_cast<Eigen::Index>(out + k)) = a;
            const double delta = w(static_cast<Eigen::Index>(out + k)) * (1.0 - a * a);
            const std::size_t base = model.hidden_offset(k);
            for (std::size_t j = 0; j < d; ++j)
                col(static_cast<Eigen::Index>(base + j)) = delta * data.x(s, static_cast<Eigen::Index>(j));
            col(static_cast<Eigen::Index>(base + d)) = delta;
        }
    }
    return r;
}

double mlp_sse(const MlpModel& model, const SupervisedDataset& data)
{
    if (data.dim() != model.input_dim)
        throw InvalidArgument("mlp_sse: feature dimension mismatch");
    return (mlp_predict(model, data.x) - data.t).squaredNorm();
}

} // namespace stockcast
