#pragma once

// Label enrichment by unconstrained propagation over the weighted kNN graph.
//
// Starting from F = Y, each iteration propagates labels along the graph,
// mixes back the original annotation, and renormalizes every row so that its
// largest candidate entry is 1 and its smallest entry is 0. The converged F
// is turned into a signed matrix: candidate entries keep their relevance
// degree in [0,1], non-candidate entries become an irrelevance degree in
// [-1,0].

#include "pml3er/common.hpp"
#include "pml3er/dataset.hpp"
#include "pml3er/knn.hpp"

#include <cmath>
#include <limits>

namespace pml3er {

struct PropagationConfig {
    double alpha = 0.05;
    int max_iters = 100;
    /// Stop once ||F_t - F_{t-1}||_F / max(1, ||F_{t-1}||_F) drops below this.
    double tol = 1e-6;

    void validate() const
    {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
        if (max_iters < 1) throw ConfigError("max_iters must be positive");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    }
};

struct EnrichmentResult {
    /// Signed enrichment matrix, n x l.
    Matrix yhat;
    /// Converged propagation matrix F*, entries in [0,1].
    Matrix f;
    int iterations = 0;
    bool converged = false;
};

/// alpha * V^T * F_prev + (1 - alpha) * F0.
inline Matrix propagate_step(const Matrix& f_prev, const Matrix& f0, const WeightGraph& g,
                             double alpha)
{
    detail::require_shape(f_prev.rows() == g.n() && f0.rows() == g.n() &&
                              f_prev.cols() == f0.cols(),
                          "propagate_step: shape mismatch");
    // (V^T F)_j = sum_i v_ij f_i: each instance pushes its row to its neighbors.
    Matrix vt_f = Matrix::Zero(f_prev.rows(), f_prev.cols());
    for (Index i = 0; i < g.n(); ++i)
        for (Index r = 0; r < g.k(); ++r)
            vt_f.row(g.neighbors(i, r)) += g.weights(i, r) * f_prev.row(i);
    return alpha * vt_f + (1.0 - alpha) * f0;
}

/// Per row: (f - min f) / (max over candidates - min f), capped at 1.
/// Rows with a spread below 1e-12 reset to the candidate indicator.
inline Matrix normalize_step(const Matrix& f, const LabelMatrix& candidates)
{
    detail::require_shape(f.rows() == candidates.rows() && f.cols() == candidates.cols(),
                          "normalize_step: shape mismatch");
    Matrix out(f.rows(), f.cols());
    for (Index i = 0; i < f.rows(); ++i) {
        if (!candidates.row(i).any())
            throw ValidationError("normalize_step: row " + std::to_string(i) +
                                  " has no candidate label");
        const double lo = f.row(i).minCoeff();
        double hi = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < f.cols(); ++j)
            if (candidates(i, j)) hi = std::max(hi, f(i, j));
        const double span = hi - lo;
        if (!(span >= 1e-12)) {
            out.row(i) = candidates.row(i).cast<double>().matrix();
            continue;
        }
        for (Index j = 0; j < f.cols(); ++j) out(i, j) = std::min(1.0, (f(i, j) - lo) / span);
    }
    return out;
}

/// Signed enrichment from the converged propagation matrix.
inline Matrix signed_enrichment(const Matrix& f, const LabelMatrix& candidates)
{
    return candidates.select(f.array(), f.array() - 1.0).matrix();
}

/// Runs propagation and normalization to convergence on a PML dataset.
inline EnrichmentResult enrich(const LabelMatrix& candidates, const WeightGraph& g,
                               const PropagationConfig& cfg)
{
    cfg.validate();
    detail::require_shape(candidates.rows() == g.n(), "enrich: graph size differs from dataset");
    const Matrix f0 = to_real(candidates);
    EnrichmentResult res;
    Matrix f = f0;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        Matrix next = normalize_step(propagate_step(f, f0, g, cfg.alpha), candidates);
        const double change = (next - f).norm() / std::max(1.0, f.norm());
        f = std::move(next);
        res.iterations = t;
        if (change < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    if (!f.allFinite()) throw NumericError("enrich: non-finite propagation result");
    res.yhat = signed_enrichment(f, candidates);
    res.f = std::move(f);
    return res;
}

inline EnrichmentResult enrich(const Dataset& ds, const WeightGraph& g,
                               const PropagationConfig& cfg)
{
    return enrich(ds.candidates(), g, cfg);
}

} // namespace pml3er
