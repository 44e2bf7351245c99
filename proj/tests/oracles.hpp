#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerics, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "stockcast/dataio.hpp"
#include "stockcast/linalg.hpp"

namespace stockcast::test {

using Rng = std::mt19937_64;

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = u(rng);
    return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = u(rng);
    return v;
}

inline SupervisedDataset make_dataset(const Matrix& x, const Vector& t)
{
    SupervisedDataset d;
    d.x = x;
    d.t = t;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        d.feature_names.push_back("x" + std::to_string(j));
    return d;
}

inline double rel_err(const Vector& got, const Vector& want)
{
    return (got - want).norm() / std::max(want.norm(), 1e-300);
}

/// d f / d x by central differences.
inline Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6)
{
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// J(i, s) = d f_s / d x_i by central differences (parameters along rows).
inline Matrix central_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-6)
{
    const auto n = f(x).size();
    Matrix j(x.size(), n);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        j.row(i) = ((f(xp) - f(xm)) / (2.0 * h)).transpose();
    }
    return j;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> jacobi_eigenvalues(Matrix a, double tol = 1e-14, int max_sweeps = 100)
{
    const auto n = a.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol * std::max(1.0, a.norm()))
            break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

/// Full-rank least squares through the normal equations, solved by Gaussian
/// elimination with partial pivoting in long double.
inline Vector normal_equations_solve(const Matrix& a, const Vector& b)
{
    const auto m = a.cols();
    std::vector<std::vector<long double>> g(static_cast<std::size_t>(m),
                                            std::vector<long double>(static_cast<std::size_t>(m + 1), 0.0L));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            long double s = 0.0L;
            for (Eigen::Index r = 0; r < a.rows(); ++r)
                s += static_cast<long double>(a(r, i)) * a(r, j);
            g[i][j] = s;
        }
        long double s = 0.0L;
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            s += static_cast<long double>(a(r, i)) * b(r);
        g[i][m] = s;
    }
    for (Eigen::Index c = 0; c < m; ++c) {
        Eigen::Index piv = c;
        for (Eigen::Index r = c + 1; r < m; ++r)
            if (std::abs(g[r][c]) > std::abs(g[piv][c]))
                piv = r;
        std::swap(g[c], g[piv]);
        for (Eigen::Index r = c + 1; r < m; ++r) {
            const long double f = g[r][c] / g[c][c];
            for (Eigen::Index k = c; k <= m; ++k)
                g[r][k] -= f * g[c][k];
        }
    }
    Vector x(m);
    for (Eigen::Index r = m - 1; r >= 0; --r) {
        long double s = g[r][m];
        for (Eigen::Index k = r + 1; k < m; ++k)
            s -= g[r][k] * x(k);
        x(r) = static_cast<double>(s / g[r][r]);
    }
    return x;
}

inline double angle_between(const Vector& a, const Vector& b)
{
    const double c = a.dot(b) / (a.norm() * b.norm());
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// Random alpha in the feasible set {0 <= a <= C, y.a = 0}: draw in the box,
// then repair the equality by shrinking the heavier class.
inline Vector random_feasible(Rng& rng, std::span<const int> y, double c)
{
    std::uniform_real_distribution<double> u(0.0, c);
    Vector a(static_cast<Eigen::Index>(y.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) = u(rng);
    double pos = 0, neg = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        (y[static_cast<std::size_t>(i)] > 0 ? pos : neg) += a(i);
    const double target = std::min(pos, neg);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double side = y[static_cast<std::size_t>(i)] > 0 ? pos : neg;
        if (side > 0)
            a(i) *= target / side;
    }
    return a;
}

// Laplace naive Bayes computed from scratch on already-binned attributes.
inline std::vector<double> hand_posterior(const std::vector<std::vector<int>>& bins, const std::vector<int>& labels,
                                          const std::vector<int>& query, const std::vector<int>& bin_counts,
                                          const std::vector<int>& classes)
{
    const auto n = labels.size();
    std::vector<double> score;
    for (int c : classes) {
        double nk = 0;
        for (int l : labels)
            nk += l == c;
        double s = nk / static_cast<double>(n);
        for (std::size_t m = 0; m < query.size(); ++m) {
            double cnt = 0;
            for (std::size_t i = 0; i < n; ++i)
                cnt += labels[i] == c && bins[i][m] == query[m];
            s *= (cnt + 1.0) / (nk + bin_counts[m]);
        }
        score.push_back(s);
    }
    double z = 0;
    for (double s : score)
        z += s;
    for (double& s : score)
        s /= z;
    return score;
}

} // namespace stockcast::test
