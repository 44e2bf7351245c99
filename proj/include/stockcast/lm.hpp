#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "stockcast/linalg.hpp"
#include "stockcast/mlp.hpp"

namespace stockcast::lm {

struct LmConfig {
    double epsilon_init = 1e-3;
    double epsilon_decrease = 0.1;  // factor applied after an accepted step
    double epsilon_increase = 10.0; // factor applied after a rejected step
    double epsilon_max = 1e10;
    std::size_t max_epochs = 50;
    double target_error = 0.0;      // stop once psi <= target_error
    std::size_t max_retries = 20;   // consecutive rejections before giving up

    void validate() const;
};

struct LmRecord {
    std::size_t epoch = 0; // 1-based index of the epoch being attempted
    double psi = 0.0;      // sum of squared errors at the candidate
    double epsilon = 0.0;  // damping used to compute the candidate
    bool accepted = false;
};

enum class StopReason { max_epochs, target_reached, stationary, diverged };

const char* to_string(StopReason r);

struct LmTrace {
    double initial_psi = 0.0;
    std::vector<LmRecord> records;
    std::size_t epochs = 0; // accepted steps
    StopReason stop = StopReason::max_epochs;
    bool diverged = false;
    bool min_norm_fallback = false; // some step solved a singular system

    double final_psi() const;
};

/// `epoch,psi,epsilon,accepted` with one line per attempted step.
void write_trace_csv(std::ostream& out, const LmTrace& trace);

struct LmStep {
    Vector weights;
    Vector delta; // weights - w, kept separately since tiny steps vanish in the sum
    bool min_norm_fallback = false;
};

/// Damped Gauss-Newton step  w - (J J^T + eps I)^{-1} J e.
/// `j` is p x n (parameters by samples). eps must be >= 0; eps == 0 with a
/// singular J J^T takes the minimum-norm solution and sets the flag.
LmStep lm_step(const Vector& w, const Matrix& j, const Vector& e, double epsilon);

/// A sum-of-squares objective psi(w) = sum_s e_s(w)^2.
class ResidualProblem {
public:
    virtual ~ResidualProblem() = default;
    virtual std::size_t parameter_count() const = 0;
    virtual Vector residuals(const Vector& w) const = 0;
    /// Fills the p x n Jacobian d e_s / d w_i and the residuals.
    virtual void evaluate(const Vector& w, Matrix& j, Vector& e) const = 0;
};

struct LmResult {
    Vector weights;
    LmTrace trace;
};

/// Levenberg-Marquardt with the multiplicative damping schedule: shrink eps
/// after every accepted step, grow it and retry the same epoch after a
/// rejected one. The step length factor is fixed at 1.
LmResult lm_minimize(const ResidualProblem& problem, Vector w0, const LmConfig& config);

/// Residual problem for an MLP on a fixed dataset.
class MlpResidual final : public ResidualProblem {
public:
    MlpResidual(const MlpModel& shape, const SupervisedDataset& data);
    std::size_t parameter_count() const override;
    Vector residuals(const Vector& w) const override;
    void evaluate(const Vector& w, Matrix& j, Vector& e) const override;

private:
    MlpModel shape_;
    const SupervisedDataset& data_;
};

std::pair<MlpModel, LmTrace> lm_train(MlpModel model, const SupervisedDataset& data,
                                      const LmConfig& config = {});

} // namespace stockcast::lm
