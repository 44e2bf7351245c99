#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "stockcast/dataio.hpp"
#include "stockcast/linalg.hpp"

namespace stockcast {

/// Single-hidden-layer network: tanh hidden units, one linear output.
///
/// Weight layout (p = h*(d+1) + h + 1):
///   for each hidden unit k: [w_k1 .. w_kd, b_k]
///   then the output layer:  [v_1 .. v_h, b_out]
struct MlpModel {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    Vector weights;

    std::size_t parameter_count() const { return parameter_count(input_dim, hidden); }
    static std::size_t parameter_count(std::size_t d, std::size_t h) { return h * (d + 1) + h + 1; }

    // Offsets into `weights`.
    std::size_t hidden_offset(std::size_t k) const { return k * (input_dim + 1); }
    std::size_t output_offset() const { return hidden * (input_dim + 1); }
};

/// Weights uniform in [-0.5, 0.5] from a generator seeded with `seed`.
MlpModel mlp_init(std::size_t d, std::size_t h, std::uint64_t seed);

/// b_out + sum_k v_k * tanh(b_k + sum_j w_kj x_j)
double mlp_forward(const MlpModel& model, std::span<const double> x);
double mlp_forward(const MlpModel& model, const Vector& x);

Vector mlp_predict(const MlpModel& model, const Matrix& x);

struct ErrorJacobian {
    Matrix j; // p x n, j(i, s) = d e_s / d w_i
    Vector e; // n, e_s = y_s - t_s
};

/// Per-sample errors and their exact Jacobian by reverse-mode
/// differentiation through the network.
ErrorJacobian mlp_error_jacobian(const MlpModel& model, const SupervisedDataset& data);

/// Sum of squared errors, no 1/2 factor.
double mlp_sse(const MlpModel& model, const SupervisedDataset& data);

} // namespace stockcast
