#include "stockcast/lm.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "stockcast/error.hpp"

namespace stockcast::lm {

void LmConfig::validate() const
{
    if (!(epsilon_init > 0.0))
        throw InvalidArgument("LmConfig: epsilon_init must be > 0");
    if (!(epsilon_decrease > 0.0 && epsilon_decrease < 1.0))
        throw InvalidArgument("LmConfig: epsilon_decrease must lie in (0, 1)");
    if (!(epsilon_increase > 1.0))
        throw InvalidArgument("LmConfig: epsilon_increase must be > 1");
    if (!(epsilon_max >= epsilon_init))
        throw InvalidArgument("LmConfig: epsilon_max must be >= epsilon_init");
    if (!(target_error >= 0.0))
        throw InvalidArgument("LmConfig: target_error must be >= 0");
}

const char* to_string(StopReason r)
{
    switch (r) {
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::target_reached: return "target_reached";
    case StopReason::stationary: return "stationary";
    case StopReason::diverged: return "diverged";
    }
    return "?";
}

double LmTrace::final_psi() const
{
    double psi = initial_psi;
    for (const auto& r : records)
        if (r.accepted)
            psi = r.psi;
    return psi;
}

void write_trace_csv(std::ostream& out, const LmTrace& trace)
{
    out << "epoch,psi,epsilon,accepted\n";
    const auto old = out.precision(17);
    for (const auto& r : trace.records)
        out << r.epoch << ',' << r.psi << ',' << r.epsilon << ',' << (r.accepted ? 1 : 0) << '\n';
    out.precision(old);
}

LmStep lm_step(const Vector& w, const Matrix& j, const Vector& e, double epsilon)
{
    if (!(epsilon >= 0.0))
        throw InvalidArgument("lm_step: epsilon must be >= 0");
    if (j.rows() != w.size() || j.cols() != e.size())
        throw InvalidArgument("lm_step: Jacobian is " + std::to_string(j.rows()) + "x" +
                              std::to_string(j.cols()) + ", expected " + std::to_string(w.size()) +
                              "x" + std::to_string(e.size()));

    const Vector g = j * e;
    Matrix m = j * j.transpose();
    LmStep out;
    if (epsilon > 0.0) {
        m.diagonal().array() += epsilon;
        Eigen::LLT<Matrix> llt(m);
        if (llt.info() == Eigen::Success) {
            out.delta = -llt.solve(g);
            out.weights = w + out.delta;
            return out;
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
    out.min_norm_fallback = cod.rank() < m.rows();
    out.delta = -cod.solve(g);
    out.weights = w + out.delta;
    return out;
}

LmResult lm_minimize(const ResidualProblem& problem, Vector w0, const LmConfig& config)
{
    config.validate();
    const auto p = static_cast<Eigen::Index>(problem.parameter_count());
    if (w0.size() != p)
        throw InvalidArgument("lm_minimize: initial point has wrong length");

    LmResult result;
    auto& trace = result.trace;
    Vector w = std::move(w0);
    Matrix j(p, 0);
    Vector e;
    problem.evaluate(w, j, e);
    double psi = e.squaredNorm();
    trace.initial_psi = psi;
    if (!std::isfinite(psi))
        throw NumericalError("lm_minimize: non-finite error at epoch 0");

    double epsilon = config.epsilon_init;
    trace.stop = StopReason::max_epochs;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (psi <= config.target_error) {
            trace.stop = StopReason::target_reached;
            break;
        }
        if ((j * e).squaredNorm() == 0.0) {
            trace.stop = StopReason::stationary;
            break;
        }

        bool accepted = false;
        for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
            auto step = lm_step(w, j, e, epsilon);
            trace.min_norm_fallback = trace.min_norm_fallback || step.min_norm_fallback;
            const Vector e_new = problem.residuals(step.weights);
            const double psi_new = e_new.squaredNorm();
            const bool better = std::isfinite(psi_new) && psi_new < psi;
            trace.records.push_back({epoch, psi_new, epsilon, better});
            if (better) {
                w = std::move(step.weights);
                psi = psi_new;
                epsilon *= config.epsilon_decrease;
                accepted = true;
                break;
            }
            if (attempt == config.max_retries)
                break;
            epsilon *= config.epsilon_increase;
            if (epsilon > config.epsilon_max)
                break;
        }
        if (!accepted) {
            trace.stop = StopReason::diverged;
            trace.diverged = true;
            break;
        }
        ++trace.epochs;
        problem.evaluate(w, j, e);
    }
    if (trace.stop == StopReason::max_epochs && psi <= config.target_error)
        trace.stop = StopReason::target_reached;

    result.weights = std::move(w);
    return result;
}

MlpResidual::MlpResidual(const MlpModel& shape, const SupervisedDataset& data)
    : shape_(shape), data_(data)
{
    if (data.dim() != shape.input_dim)
        throw InvalidArgument("MlpResidual: feature dimension mismatch");
    if (data.size() == 0)
        throw InvalidArgument("MlpResidual: dataset is empty");
}

std::size_t MlpResidual::parameter_count() const { return shape_.parameter_count(); }

Vector MlpResidual::residuals(const Vector& w) const
{
    MlpModel m = shape_;
    m.weights = w;
    return mlp_predict(m, data_.x) - data_.t;
}

void MlpResidual::evaluate(const Vector& w, Matrix& j, Vector& e) const
{
    MlpModel m = shape_;
    m.weights = w;
    auto je = mlp_error_jacobian(m, data_);
    j = std::move(je.j);
    e = std::move(je.e);
}

std::pair<MlpModel, LmTrace> lm_train(MlpModel model, const SupervisedDataset& data,
                                      const LmConfig& config)
{
    MlpResidual problem(model, data);
    auto res = lm_minimize(problem, model.weights, config);
    model.weights = std::move(res.weights);
    return {std::move(model), std::move(res.trace)};
}

} // namespace stockcast::lm
