#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace stockcast {

// Dense storage shared by every trainer. Entries are expected to be finite;
// the operations below check that at their boundaries.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

inline constexpr double kDefaultRlsGamma = 1e8;

struct LsqSolution {
    Vector x;                      // minimizer of ||A x - b||^2
    double residual_norm_sq = 0.0; // ||A x - b||^2 at the minimizer
    std::size_t rank = 0;          // numerical rank of A
};

/// Least-squares solve of A x = b. Rank-deficient systems get the
/// minimum-norm minimizer (complete orthogonal decomposition), so the call
/// never fails on a singular A^T A.
LsqSolution lsq_solve(const Matrix& a, const Vector& b);

/// State of the sequential least-squares estimator: current estimate `x`,
/// covariance `s` and the number of rows consumed so far.
struct RlsState {
    Vector x;
    Matrix s;
    std::size_t samples_seen = 0;
};

/// X = 0, S = gamma * I.
RlsState rls_init(std::size_t m, double gamma = kDefaultRlsGamma);

/// One recursive least-squares step with forgetting factor `lambda`:
///
///   S' = (1/lambda) [S - S a a^T S / (lambda + a^T S a)]
///   X' = X + S' a (b - a^T X)
///
/// S' a is evaluated as S a / (lambda + a^T S a), which is the same vector.
/// With lambda == 1 this is the plain sequential LSE recursion. S' is
/// re-symmetrized after every step.
void rls_update_inplace(RlsState& state, const Vector& a, double b, double lambda = 1.0);

RlsState rls_update(RlsState state, const Vector& a, double b, double lambda = 1.0);

/// Largest |G(i,j) - G(j,i)|.
double max_asymmetry(const Matrix& g);

/// True iff the smallest eigenvalue of the symmetric matrix `g` is >= -tol.
/// Throws InvalidArgument when `g` is not square or not symmetric within
/// max(tol, 1e-12 * max|g|).
bool psd_check(const Matrix& g, double tol);

/// Checks that every entry is finite; throws InvalidArgument naming `what`
/// otherwise.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

} // namespace linalg
} // namespace stockcast
