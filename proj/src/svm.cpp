#include "stockcast/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stockcast/error.hpp"

namespace stockcast::svm {

void Kernel::validate() const
{
    switch (kind) {
    case KernelKind::linear: return;
    case KernelKind::polynomial:
        if (degree < 1)
            throw InvalidArgument("polynomial kernel degree must be >= 1");
        return;
    case KernelKind::rbf:
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw InvalidArgument("rbf kernel gamma must be > 0");
        return;
    }
}

std::string Kernel::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
    case KernelKind::linear: os << "linear"; break;
    case KernelKind::polynomial: os << "polynomial degree=" << degree << " coef0=" << coef0; break;
    case KernelKind::rbf: os << "rbf gamma=" << gamma; break;
    }
    return os.str();
}

namespace {

double dot(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    return s;
}

std::span<const double> as_span(const Vector& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace

double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw InvalidArgument("kernel_eval: vectors have different dimensions");
    switch (k.kind) {
    case KernelKind::linear: return dot(x, y);
    case KernelKind::polynomial: return std::pow(dot(x, y) + k.coef0, k.degree);
    case KernelKind::rbf: {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - y[i];
            d2 += diff * diff;
        }
        return std::exp(-k.gamma * d2);
    }
    }
    return 0.0;
}

double kernel_eval(const Kernel& k, const Vector& x, const Vector& y)
{
    return kernel_eval(k, as_span(x), as_span(y));
}

Matrix gram_matrix(const Kernel& k, const Matrix& points)
{
    k.validate();
    const Eigen::Index n = points.rows();
    Matrix g(n, n);
    std::vector<Vector> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] = points.row(i).transpose();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            g(i, j) = g(j, i) = kernel_eval(k, rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    return g;
}

bool mercer_gram_check(const Kernel& k, const Matrix& points, double tol)
{
    if (points.rows() == 0)
        throw InvalidArgument("mercer_gram_check: need at least one point");
    return linalg::psd_check(gram_matrix(k, points), tol);
}

bool mercer_gram_check(const KernelFunction& k, const Matrix& points, double tol)
{
    if (points.rows() == 0)
        throw InvalidArgument("mercer_gram_check: need at least one point");
    const Eigen::Index n = points.rows();
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            g(i, j) = g(j, i) = k(points.row(i).transpose(), points.row(j).transpose());
    return linalg::psd_check(g, tol);
}

void SvmTrainConfig::validate() const
{
    if (!(C > 0.0) || !std::isfinite(C))
        throw InvalidArgument("SvmTrainConfig: C must be > 0");
    if (!(tolerance > 0.0))
        throw InvalidArgument("SvmTrainConfig: tolerance must be > 0");
    if (!(epsilon_tube >= 0.0))
        throw InvalidArgument("SvmTrainConfig: epsilon_tube must be >= 0");
}

namespace {

// Dual problem in the common form
//   min 1/2 a^T Q a + p^T a   s.t.  y^T a = 0,  0 <= a_t <= C
// with Q(s, t) = y_s y_t K(s mod n, t mod n). Classification uses l = n
// variables; regression uses l = 2n (a then a*).
class DualSolver {
public:
    DualSolver(const Matrix& gram, std::vector<int> y, Vector p, double c)
        : gram_(gram), n_(gram.rows()), y_(std::move(y)), p_(std::move(p)), c_(c),
          l_(static_cast<Eigen::Index>(y_.size())), alpha_(Vector::Zero(l_)), grad_(p_)
    {
    }

    double q(Eigen::Index s, Eigen::Index t) const
    {
        return y_[static_cast<std::size_t>(s)] * y_[static_cast<std::size_t>(t)] * gram_(s % n_, t % n_);
    }

    void solve(double tol, std::size_t max_iter)
    {
        constexpr double tau = 1e-12;
        for (iterations_ = 0; iterations_ < max_iter; ++iterations_) {
            Eigen::Index i = -1;
            Eigen::Index j = -1;
            if (!select_pair(tol, i, j)) {
                converged_ = true;
                return;
            }
            const double yi = y_[static_cast<std::size_t>(i)];
            const double yj = y_[static_cast<std::size_t>(j)];
            const double old_i = alpha_(i);
            const double old_j = alpha_(j);
            const double qii = q(i, i);
            const double qjj = q(j, j);
            const double qij = q(i, j);
            double& ai = alpha_(i);
            double& aj = alpha_(j);

            if (yi != yj) {
                double quad = qii + qjj + 2.0 * qij;
                if (quad <= 0.0)
                    quad = tau;
                const double delta = (-grad_(i) - grad_(j)) / quad;
                const double diff = ai - aj;
                ai += delta;
                aj += delta;
                if (diff > 0.0) {
                    if (aj < 0.0) { aj = 0.0; ai = diff; }
                } else {
                    if (ai < 0.0) { ai = 0.0; aj = -diff; }
                }
                if (diff > 0.0) {
                    if (ai > c_) { ai = c_; aj = c_ - diff; }
                } else {
                    if (aj > c_) { aj = c_; ai = c_ + diff; }
                }
            } else {
                double quad = qii + qjj - 2.0 * qij;
                if (quad <= 0.0)
                    quad = tau;
                const double delta = (grad_(i) - grad_(j)) / quad;
                const double sum = ai + aj;
                ai -= delta;
                aj += delta;
                if (sum > c_) {
                    if (ai > c_) { ai = c_; aj = sum - c_; }
                } else {
                    if (aj < 0.0) { aj = 0.0; ai = sum; }
                }
                if (sum > c_) {
                    if (aj > c_) { aj = c_; ai = sum - c_; }
                } else {
                    if (ai < 0.0) { ai = 0.0; aj = sum; }
                }
            }

            const double dai = ai - old_i;
            const double daj = aj - old_j;
            for (Eigen::Index t = 0; t < l_; ++t)
                grad_(t) += q(t, i) * dai + q(t, j) * daj;
        }
    }

    // b in f(x) = sum coef k(x_i, x) + b: averaged over free variables,
    // otherwise the midpoint of the feasible interval.
    double bias() const
    {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (Eigen::Index t = 0; t < l_; ++t) {
            const int yt = y_[static_cast<std::size_t>(t)];
            const double yg = yt * grad_(t);
            if (at_upper(t)) {
                if (yt == -1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (at_lower(t)) {
                if (yt == +1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
        return -rho;
    }

    double objective() const { return 0.5 * alpha_.dot(grad_ + p_); }

    const Vector& alpha() const { return alpha_; }
    std::size_t iterations() const { return iterations_; }
    bool converged() const { return converged_; }

private:
    bool at_upper(Eigen::Index t) const { return alpha_(t) >= c_; }
    bool at_lower(Eigen::Index t) const { return alpha_(t) <= 0.0; }

    // Maximal-violation first index, second-order gain for the second.
    bool select_pair(double tol, Eigen::Index& out_i, Eigen::Index& out_j) const
    {
        constexpr double tau = 1e-12;
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < l_; ++t) {
            if (y_[static_cast<std::size_t>(t)] == +1) {
                if (!at_upper(t) && -grad_(t) >= gmax) { gmax = -grad_(t); i = t; }
            } else {
                if (!at_lower(t) && grad_(t) >= gmax) { gmax = grad_(t); i = t; }
            }
        }
        if (i < 0)
            return false;

        const double yi = y_[static_cast<std::size_t>(i)];
        const double qii = q(i, i);
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        for (Eigen::Index t = 0; t < l_; ++t) {
            const double qti = yi * q(i, t); // y_t K_it
            if (y_[static_cast<std::size_t>(t)] == +1) {
                if (at_lower(t))
                    continue;
                const double gdiff = gmax + grad_(t);
                gmax2 = std::max(gmax2, grad_(t));
                if (gdiff > 0.0) {
                    double quad = qii + q(t, t) - 2.0 * qti;
                    const double obj = -(gdiff * gdiff) / (quad > 0.0 ? quad : tau);
                    if (obj <= best) { best = obj; j = t; }
                }
            } else {
                if (at_upper(t))
                    continue;
                const double gdiff = gmax - grad_(t);
                gmax2 = std::max(gmax2, -grad_(t));
                if (gdiff > 0.0) {
                    double quad = qii + q(t, t) + 2.0 * qti;
                    const double obj = -(gdiff * gdiff) / (quad > 0.0 ? quad : tau);
                    if (obj <= best) { best = obj; j = t; }
                }
            }
        }
        if (gmax + gmax2 < tol || j < 0)
            return false;
        out_i = i;
        out_j = j;
        return true;
    }

    const Matrix& gram_;
    Eigen::Index n_;
    std::vector<int> y_;
    Vector p_;
    double c_;
    Eigen::Index l_;
    Vector alpha_;
    Vector grad_;
    std::size_t iterations_ = 0;
    bool converged_ = false;
};

std::size_t iteration_cap(const SvmTrainConfig& cfg, std::size_t n, std::size_t l)
{
    const std::size_t passes = cfg.max_passes > 0 ? cfg.max_passes : 10 * n;
    return std::max<std::size_t>(passes * l, 1);
}

SvmModel collect_support(const Matrix& x, const Vector& coef, double b, const Kernel& kernel,
                         Mode mode)
{
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < coef.size(); ++i)
        if (std::abs(coef(i)) > kSupportThreshold)
            keep.push_back(i);
    SvmModel m;
    m.mode = mode;
    m.kernel = kernel;
    m.b = b;
    m.support_vectors.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
    m.coef.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        m.support_vectors.row(static_cast<Eigen::Index>(r)) = x.row(keep[r]);
        m.coef(static_cast<Eigen::Index>(r)) = coef(keep[r]);
    }
    return m;
}

} // namespace

SvmFit svc_train(const Matrix& x, std::span<const int> labels, const Kernel& kernel,
                 const SvmTrainConfig& config)
{
    config.validate();
    kernel.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0 || labels.size() != n)
        throw InvalidArgument("svc_train: need one label per training row");
    linalg::require_finite(x, "svc_train: features");
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw InvalidArgument("svc_train: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw InvalidArgument("svc_train: both classes must be present");

    const Matrix gram = gram_matrix(kernel, x);
    DualSolver solver(gram, std::vector<int>(labels.begin(), labels.end()),
                      Vector::Constant(static_cast<Eigen::Index>(n), -1.0), config.C);
    solver.solve(config.tolerance, iteration_cap(config, n, n));

    Vector coef(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        coef(static_cast<Eigen::Index>(i)) = labels[i] * solver.alpha()(static_cast<Eigen::Index>(i));

    SvmFit fit;
    fit.model = collect_support(x, coef, solver.bias(), kernel, Mode::classify);
    fit.info.iterations = solver.iterations();
    fit.info.converged = solver.converged();
    fit.info.objective = solver.objective();
    fit.info.dual = solver.alpha();
    return fit;
}

SvmFit svr_train(const Matrix& x, const Vector& targets, const Kernel& kernel,
                 const SvmTrainConfig& config)
{
    config.validate();
    kernel.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < 2)
        throw InvalidArgument("svr_train: need at least 2 training rows");
    if (static_cast<std::size_t>(targets.size()) != n)
        throw InvalidArgument("svr_train: need one target per training row");
    linalg::require_finite(x, "svr_train: features");
    linalg::require_finite(targets, "svr_train: targets");

    const Matrix gram = gram_matrix(kernel, x);
    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<int> y(2 * n);
    Vector p(2 * ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        y[static_cast<std::size_t>(i)] = +1;
        y[static_cast<std::size_t>(i + ni)] = -1;
        p(i) = config.epsilon_tube - targets(i);
        p(i + ni) = config.epsilon_tube + targets(i);
    }
    DualSolver solver(gram, std::move(y), std::move(p), config.C);
    solver.solve(config.tolerance, iteration_cap(config, n, 2 * n));

    const Vector beta = solver.alpha().head(ni) - solver.alpha().tail(ni);
    SvmFit fit;
    fit.model = collect_support(x, beta, solver.bias(), kernel, Mode::regress);
    fit.info.iterations = solver.iterations();
    fit.info.converged = solver.converged();
    fit.info.objective = solver.objective();
    fit.info.dual = beta;
    return fit;
}

double svm_predict(const SvmModel& model, std::span<const double> x)
{
    if (model.input_dim() == 0)
        throw InvalidArgument("svm_predict: model is empty (untrained)");
    if (x.size() != model.input_dim())
        throw InvalidArgument("svm_predict: expected " + std::to_string(model.input_dim()) +
                              " inputs, got " + std::to_string(x.size()));
    double f = model.b;
    Vector sv(model.support_vectors.cols());
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        sv = model.support_vectors.row(i).transpose();
        f += model.coef(i) * kernel_eval(model.kernel, as_span(sv), x);
    }
    return f;
}

double svm_predict(const SvmModel& model, const Vector& x) { return svm_predict(model, as_span(x)); }

Vector svm_predict(const SvmModel& model, const Matrix& x)
{
    Vector out(x.rows());
    Vector row(x.cols());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        row = x.row(s).transpose();
        out(s) = svm_predict(model, row);
    }
    return out;
}

int svm_classify(const SvmModel& model, const Vector& x) { return svm_predict(model, x) >= 0.0 ? 1 : -1; }

double svc_dual_objective(const Matrix& gram, std::span<const int> labels, const Vector& alpha)
{
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (gram.rows() != n || gram.cols() != n || alpha.size() != n)
        throw InvalidArgument("svc_dual_objective: size mismatch");
    Vector ya(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ya(i) = labels[static_cast<std::size_t>(i)] * alpha(i);
    return -alpha.sum() + 0.5 * ya.dot(gram * ya);
}

} // namespace stockcast::svm
