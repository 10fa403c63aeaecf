#pragma once

// Active-set non-negative least squares (Lawson & Hanson, "Solving Least
// Squares Problems", ch. 23):
//
//     minimize ||A x - b||^2   subject to   x >= 0.
//
// The passive-set subproblems are solved by column-pivoted QR on the passive
// columns of A, so the conditioning of A is not squared.

#include "pml3er/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pml3er {

struct NnlsOptions {
    /// Multiplier on the default dual-feasibility tolerance.
    double tolerance_scale = 10.0;
    /// Outer iteration cap; 0 selects 3 * (number of columns) + 10.
    int max_iterations = 0;
};

struct NnlsResult {
    Vector x;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline Vector solve_passive(const Matrix& a, const Vector& b, const std::vector<bool>& passive)
{
    const Index k = a.cols();
    std::vector<Index> cols;
    for (Index j = 0; j < k; ++j)
        if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    Vector z = Vector::Zero(k);
    if (cols.empty()) return z;
    Matrix ap(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) ap.col(static_cast<Index>(c)) = a.col(cols[c]);
    Vector zp = ap.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < cols.size(); ++c) z(cols[c]) = zp(static_cast<Index>(c));
    return z;
}

} // namespace detail

/// Solves min ||A x - b||^2 s.t. x >= 0 exactly (up to rounding).
inline NnlsResult nnls(const Matrix& a, const Vector& b, const NnlsOptions& opts = {})
{
    detail::require_shape(a.rows() == b.size(), "nnls: A and b disagree on row count");
    if (!a.allFinite() || !b.allFinite()) throw NumericError("nnls: non-finite input");

    const Index k = a.cols();
    NnlsResult res;
    res.x = Vector::Zero(k);
    if (k == 0) {
        res.converged = true;
        return res;
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double tol = opts.tolerance_scale * eps *
                       std::max(1.0, a.norm() * std::max(b.norm(), a.norm()));
    const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : 3 * static_cast<int>(k) + 10;

    std::vector<bool> passive(static_cast<std::size_t>(k), false);
    std::vector<bool> blocked(static_cast<std::size_t>(k), false);
    Vector& x = res.x;

    while (res.iterations < max_iter) {
        // Dual vector (half the negative gradient).
        const Vector w = a.transpose() * (b - a * x);
        Index t = -1;
        double wmax = tol;
        for (Index j = 0; j < k; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            if (!passive[sj] && !blocked[sj] && w(j) > wmax) {
                wmax = w(j);
                t = j;
            }
        }
        if (t < 0) {
            res.converged = true;
            break;
        }
        ++res.iterations;
        passive[static_cast<std::size_t>(t)] = true;

        bool first = true;
        while (true) {
            Vector z = detail::solve_passive(a, b, passive);
            if (first && z(t) <= 0.0) {
                // w_t was positive only by rounding; keep t out until x moves.
                passive[static_cast<std::size_t>(t)] = false;
                blocked[static_cast<std::size_t>(t)] = true;
                break;
            }
            first = false;
            bool feasible = true;
            double step = 1.0;
            Index hit = -1;
            for (Index j = 0; j < k; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
                    feasible = false;
                    const double denom = x(j) - z(j);
                    const double s = denom > 0.0 ? x(j) / denom : 0.0;
                    if (hit < 0 || s < step) {
                        step = std::min(step, s);
                        hit = j;
                    }
                }
            }
            if (feasible) {
                x = z;
                std::fill(blocked.begin(), blocked.end(), false);
                break;
            }
            x += step * (z - x);
            x(hit) = 0.0;
            passive[static_cast<std::size_t>(hit)] = false;
            for (Index j = 0; j < k; ++j) {
                const auto sj = static_cast<std::size_t>(j);
                if (passive[sj] && x(j) <= eps * std::max(1.0, x.cwiseAbs().maxCoeff())) {
                    x(j) = 0.0;
                    passive[sj] = false;
                }
            }
            std::fill(blocked.begin(), blocked.end(), false);
        }
    }
    for (Index j = 0; j < k; ++j)
        if (!passive[static_cast<std::size_t>(j)]) x(j) = 0.0;
    return res;
}

/// Gradient of ||A x - b||^2, i.e. 2 A^T (A x - b).
inline Vector nnls_gradient(const Matrix& a, const Vector& b, const Vector& x)
{
    return 2.0 * (a.transpose() * (a * x - b));
}

/// Largest violation of the KKT conditions of the NNLS problem at x.
inline double nnls_kkt_residual(const Matrix& a, const Vector& b, const Vector& x)
{
    const Vector g = nnls_gradient(a, b, x);
    double r = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
        if (x(j) < 0.0) r = std::max(r, -x(j));
        if (x(j) > 0.0)
            r = std::max(r, std::abs(g(j)));
        else
            r = std::max(r, -g(j));
    }
    return r;
}

} // namespace pml3er
