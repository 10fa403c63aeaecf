#pragma once

// Weighted kNN graph: exact Euclidean neighbors plus non-negative
// reconstruction weights of each instance from its neighbors, normalized per
// row.

#include "pml3er/common.hpp"
#include "pml3er/nnls.hpp"
#include "pml3er/text.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace pml3er {

struct KnnConfig {
    Index k = 10;
    /// z-score feature columns before computing distances and weights.
    bool standardize = false;
};

/// Row i lists the k neighbors of instance i, nearest first.
using NeighborLists = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// kNN graph with per-edge weights. `weights(i, r)` is the weight of the edge
/// from i to `neighbors(i, r)`; every other entry of the dense n x n matrix is
/// zero.
struct WeightGraph {
    NeighborLists neighbors;
    Matrix weights;

    [[nodiscard]] Index n() const noexcept { return neighbors.rows(); }
    [[nodiscard]] Index k() const noexcept { return neighbors.cols(); }

    [[nodiscard]] Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const
    {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(n() * k()));
        for (Index i = 0; i < n(); ++i)
            for (Index r = 0; r < k(); ++r) trips.emplace_back(i, neighbors(i, r), weights(i, r));
        Eigen::SparseMatrix<double, Eigen::RowMajor> v(n(), n());
        v.setFromTriplets(trips.begin(), trips.end());
        return v;
    }

    [[nodiscard]] Matrix to_dense() const { return Matrix(to_sparse()); }
};

/// Column-wise z-scoring with population standard deviation; constant columns
/// become zero.
inline Matrix standardize_columns(const Matrix& x)
{
    Matrix out = x;
    const double n = static_cast<double>(x.rows());
    for (Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).sum() / n;
        const double var = (x.col(j).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd > 0.0)
            out.col(j) = (x.col(j).array() - mean) / sd;
        else
            out.col(j).setZero();
    }
    return out;
}

/// Exact k nearest neighbors by squared Euclidean distance, excluding the
/// instance itself. Equal distances are ordered by index.
inline NeighborLists build_knn(const Matrix& x, Index k)
{
    const Index n = x.rows();
    if (k < 1 || k >= n)
        throw ConfigError("knn: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
    if (!x.allFinite()) throw NumericError("knn: non-finite features");

    // Row-major copy keeps each instance contiguous for the distance loop.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
    Matrix dist(n, n);
    for (Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            const double s = (xr.row(i) - xr.row(j)).squaredNorm();
            dist(i, j) = s;
            dist(j, i) = s;
        }
    }

    NeighborLists nb(n, k);
    std::vector<Index> order(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (Index j = 0; j < n; ++j)
            if (j != i) order[c++] = j;
        auto closer = [&](Index a, Index b) {
            const double da = dist(i, a), db = dist(i, b);
            return da < db || (da == db && a < b);
        };
        std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
        for (Index r = 0; r < k; ++r) nb(i, r) = order[static_cast<std::size_t>(r)];
    }
    return nb;
}

/// Non-negative weights v minimizing ||target - sum_r v_r * neighbor_r||^2.
/// `neighbor_rows` holds one neighbor per row.
inline Vector solve_weights(const Vector& target, const Matrix& neighbor_rows)
{
    detail::require_shape(neighbor_rows.cols() == target.size(),
                          "solve_weights: neighbor dimension differs from target");
    if (!target.allFinite() || !neighbor_rows.allFinite())
        throw NumericError("solve_weights: non-finite input");
    return nnls(neighbor_rows.transpose(), target).x;
}

/// Raw (unnormalized) reconstruction weights for every instance.
inline Matrix reconstruction_weights(const Matrix& x, const NeighborLists& nb)
{
    const Index n = x.rows(), k = nb.cols();
    detail::require_shape(nb.rows() == n, "reconstruction_weights: neighbor list size mismatch");
    Matrix w(n, k);
    Matrix a(x.cols(), k);
    for (Index i = 0; i < n; ++i) {
        for (Index r = 0; r < k; ++r) a.col(r) = x.row(nb(i, r)).transpose();
        w.row(i) = nnls(a, x.row(i).transpose()).x.transpose();
    }
    return w;
}

/// Divides each weight row by its sum; rows whose sum is at most 1e-12 fall
/// back to uniform weights 1/k.
inline WeightGraph normalize_rows(NeighborLists nb, Matrix raw)
{
    detail::require_shape(nb.rows() == raw.rows() && nb.cols() == raw.cols(),
                          "normalize_rows: neighbor and weight shapes differ");
    if ((raw.array() < 0.0).any()) throw ValidationError("normalize_rows: negative weight");
    for (Index i = 0; i < raw.rows(); ++i) {
        const double s = raw.row(i).sum();
        if (s > 1e-12)
            raw.row(i) /= s;
        else
            raw.row(i).setConstant(1.0 / static_cast<double>(raw.cols()));
    }
    return WeightGraph{std::move(nb), std::move(raw)};
}

/// kNN search, reconstruction weights and row normalization in one call.
inline WeightGraph build_weight_graph(const Matrix& features, const KnnConfig& cfg)
{
    const Matrix x = cfg.standardize ? standardize_columns(features) : features;
    auto nb = build_knn(x, cfg.k);
    auto raw = reconstruction_weights(x, nb);
    return normalize_rows(std::move(nb), std::move(raw));
}

/// Debug dump, one line per instance: `i: j1=w1 j2=w2 ...`.
inline std::string format_weight_graph(const WeightGraph& g)
{
    std::string out;
    for (Index i = 0; i < g.n(); ++i) {
        out += std::to_string(i);
        out += ':';
        for (Index r = 0; r < g.k(); ++r) {
            out += ' ';
            out += std::to_string(g.neighbors(i, r));
            out += '=';
            text::append_real(out, g.weights(i, r));
        }
        out += '\n';
    }
    return out;
}

} // namespace pml3er
