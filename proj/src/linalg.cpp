#include "stockcast/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stockcast/error.hpp"

namespace stockcast::linalg {

void require_finite(const Matrix& m, const char* what)
{
    if (!m.allFinite())
        throw InvalidArgument(std::string(what) + " contains non-finite entries");
}

void require_finite(const Vector& v, const char* what)
{
    if (!v.allFinite())
        throw InvalidArgument(std::string(what) + " contains non-finite entries");
}

LsqSolution lsq_solve(const Matrix& a, const Vector& b)
{
    if (a.rows() == 0 || a.cols() == 0)
        throw InvalidArgument("lsq_solve: design matrix is empty");
    if (a.rows() != b.size())
        throw InvalidArgument("lsq_solve: A has " + std::to_string(a.rows()) +
                              " rows but B has " + std::to_string(b.size()) + " entries");
    require_finite(a, "lsq_solve: A");
    require_finite(b, "lsq_solve: B");

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    LsqSolution out;
    out.x = cod.solve(b);
    out.rank = static_cast<std::size_t>(cod.rank());
    out.residual_norm_sq = (a * out.x - b).squaredNorm();
    return out;
}

RlsState rls_init(std::size_t m, double gamma)
{
    if (m == 0)
        throw InvalidArgument("rls_init: parameter count must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InvalidArgument("rls_init: gamma must be a positive finite number");
    const auto n = static_cast<Eigen::Index>(m);
    RlsState st;
    st.x = Vector::Zero(n);
    st.s = gamma * Matrix::Identity(n, n);
    return st;
}

void rls_update_inplace(RlsState& state, const Vector& a, double b, double lambda)
{
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw InvalidArgument("rls_update: lambda must lie in (0, 1]");
    if (a.size() != state.x.size())
        throw InvalidArgument("rls_update: regressor length does not match state dimension");
    if (!a.allFinite() || !std::isfinite(b))
        throw InvalidArgument("rls_update: non-finite regressor or target");

    // Gain form: k = S a / (lambda + a'S a) equals the updated S times a, but
    // is computed before S shrinks, so it avoids cancellation when S is large.
    const Vector sa = state.s * a;
    const double denom = lambda + a.dot(sa);
    const Vector k = sa / denom;
    const double innovation = b - a.dot(state.x);
    state.x.noalias() += k * innovation;

    state.s.noalias() -= k * sa.transpose();
    if (lambda != 1.0)
        state.s /= lambda;
    // Re-symmetrize: the recursion is exactly symmetric only in real arithmetic.
    state.s = 0.5 * (state.s + state.s.transpose()).eval();
    ++state.samples_seen;

    if (!state.x.allFinite() || !state.s.allFinite())
        throw NumericalError("rls_update: state became non-finite after " +
                             std::to_string(state.samples_seen) + " samples");
}

RlsState rls_update(RlsState state, const Vector& a, double b, double lambda)
{
    rls_update_inplace(state, a, b, lambda);
    return state;
}

double max_asymmetry(const Matrix& g)
{
    if (g.rows() != g.cols())
        throw InvalidArgument("max_asymmetry: matrix is not square");
    if (g.size() == 0)
        return 0.0;
    return (g - g.transpose()).cwiseAbs().maxCoeff();
}

bool psd_check(const Matrix& g, double tol)
{
    if (g.rows() != g.cols() || g.rows() == 0)
        throw InvalidArgument("psd_check: matrix must be square and non-empty");
    if (!(tol >= 0.0))
        throw InvalidArgument("psd_check: tolerance must be >= 0");
    require_finite(g, "psd_check: G");

    const double scale = g.cwiseAbs().maxCoeff();
    if (max_asymmetry(g) > std::max(tol, 1e-12 * scale))
        throw InvalidArgument("psd_check: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NumericalError("psd_check: eigen-decomposition failed");
    return eig.eigenvalues().minCoeff() >= -tol;
}

} // namespace stockcast::linalg
