#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "stockcast/linalg.hpp"

namespace stockcast::svm {

enum class KernelKind { linear, polynomial, rbf };

struct Kernel {
    KernelKind kind = KernelKind::rbf;
    int degree = 3;     // polynomial
    double coef0 = 0.0; // polynomial
    double gamma = 1.0; // rbf

    static Kernel linear() { return {KernelKind::linear, 1, 0.0, 1.0}; }
    static Kernel polynomial(int degree, double coef0) { return {KernelKind::polynomial, degree, coef0, 1.0}; }
    static Kernel rbf(double gamma) { return {KernelKind::rbf, 1, 0.0, gamma}; }

    void validate() const;
    std::string describe() const;
};

/// linear: x.y   polynomial: (x.y + coef0)^degree   rbf: exp(-gamma |x-y|^2)
double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y);
double kernel_eval(const Kernel& k, const Vector& x, const Vector& y);

/// G(i, j) = k(row_i, row_j).
Matrix gram_matrix(const Kernel& k, const Matrix& points);

using KernelFunction = std::function<double(const Vector&, const Vector&)>;

/// Finite Mercer test: the Gram matrix on `points` (one per row) must be
/// positive semidefinite within `tol`.
bool mercer_gram_check(const Kernel& k, const Matrix& points, double tol);
bool mercer_gram_check(const KernelFunction& k, const Matrix& points, double tol);

enum class Mode { classify, regress };

/// Kernel expansion f(x) = sum_i coef_i k(sv_i, x) + b. For classification
/// coef_i = y_i alpha_i; for regression coef_i = alpha_i - alpha_i*.
struct SvmModel {
    Mode mode = Mode::regress;
    Kernel kernel;
    Matrix support_vectors; // one per row
    Vector coef;
    double b = 0.0;

    std::size_t input_dim() const { return static_cast<std::size_t>(support_vectors.cols()); }
};

struct SvmTrainConfig {
    double C = 10.0;
    double tolerance = 1e-4;    // maximal KKT violation at convergence
    std::size_t max_passes = 0; // sweeps over the dual variables; 0 means 10 * n
    double epsilon_tube = 0.01; // regression only
    std::uint64_t seed = 0;     // the solver is deterministic; kept for config symmetry

    void validate() const;
};

struct SvmTrainInfo {
    std::size_t iterations = 0;
    bool converged = false;
    double objective = 0.0; // dual objective in minimization form
    Vector dual;            // full coefficient vector over training points
};

struct SvmFit {
    SvmModel model;
    SvmTrainInfo info;
};

inline constexpr double kSupportThreshold = 1e-8;

/// Soft-margin classifier: minimizes
///   W(a) = -sum a_i + 1/2 sum_ij y_i y_j a_i a_j k(x_i, x_j)
/// subject to sum y_i a_i = 0, 0 <= a_i <= C by two-variable working-set
/// optimization. `labels` must be +1/-1 with both present.
SvmFit svc_train(const Matrix& x, std::span<const int> labels, const Kernel& kernel,
                 const SvmTrainConfig& config = {});

/// Epsilon-insensitive regression on the standard dual with
/// coefficients beta_i = a_i - a_i*, |beta_i| <= C, sum beta_i = 0.
SvmFit svr_train(const Matrix& x, const Vector& targets, const Kernel& kernel,
                 const SvmTrainConfig& config = {});

/// Raw value of the kernel expansion (regression output or decision value).
double svm_predict(const SvmModel& model, std::span<const double> x);
double svm_predict(const SvmModel& model, const Vector& x);
Vector svm_predict(const SvmModel& model, const Matrix& x);

/// Sign of the decision value, +1 on the hyperplane.
int svm_classify(const SvmModel& model, const Vector& x);

/// W(a) for the classification dual with Gram matrix `gram`.
double svc_dual_objective(const Matrix& gram, std::span<const int> labels, const Vector& alpha);

} // namespace stockcast::svm
