#pragma once

// Brute-force reference for the multi-label metrics, written from the
// definitions with explicit pair sets and rank lists. Shared by the unit tests
// and the acceptance binary.

#include "pml3er/metrics.hpp"
#include "test_support.hpp"

#include <vector>

namespace pml3er::testkit {

inline MetricsReport oracle_metrics(const Matrix& s, const LabelMatrix& z, const LabelMatrix& y)
{
    const Index m = y.rows(), l = y.cols();
    double sacc = 0, ham = 0, oe = 0, rl = 0, ap = 0;
    Index used = 0, skipped = 0;
    for (Index i = 0; i < m; ++i) {
        bool same = true;
        for (Index j = 0; j < l; ++j)
            if (z(i, j) != y(i, j)) {
                same = false;
                ham += 1;
            }
        if (same) sacc += 1;

        std::vector<Index> rel, irr;
        for (Index j = 0; j < l; ++j) (y(i, j) ? rel : irr).push_back(j);
        if (rel.empty() || irr.empty()) {
            ++skipped;
            continue;
        }
        ++used;
        // rank(j) = 1 + number of labels placed before j.
        std::vector<Index> rank(static_cast<std::size_t>(l));
        for (Index j = 0; j < l; ++j) {
            Index before = 0;
            for (Index k = 0; k < l; ++k)
                if (s(i, k) > s(i, j) || (s(i, k) == s(i, j) && k < j)) ++before;
            rank[static_cast<std::size_t>(j)] = before + 1;
        }
        for (Index j = 0; j < l; ++j)
            if (rank[static_cast<std::size_t>(j)] == 1 && !y(i, j)) oe += 1;

        double bad = 0;
        for (Index u : rel)
            for (Index v : irr)
                if (s(i, u) <= s(i, v)) bad += 1;
        rl += bad / static_cast<double>(rel.size() * irr.size());

        double prec = 0;
        for (Index u : rel) {
            double above = 0;
            for (Index v : rel)
                if (rank[static_cast<std::size_t>(v)] <= rank[static_cast<std::size_t>(u)]) above += 1;
            prec += above / static_cast<double>(rank[static_cast<std::size_t>(u)]);
        }
        ap += prec / static_cast<double>(rel.size());
    }

    MetricsReport r;
    r.skipped_instances = skipped;
    r.saccuracy = sacc / static_cast<double>(m);
    r.hloss = ham / static_cast<double>(m * l);
    if (used > 0) {
        r.oerror = oe / static_cast<double>(used);
        r.rloss = rl / static_cast<double>(used);
        r.ap = ap / static_cast<double>(used);
    }
    double macro = 0, tp_all = 0, fp_all = 0, fn_all = 0;
    for (Index j = 0; j < l; ++j) {
        double tp = 0, fp = 0, fn = 0;
        for (Index i = 0; i < m; ++i) {
            if (z(i, j) && y(i, j)) tp += 1;
            if (z(i, j) && !y(i, j)) fp += 1;
            if (!z(i, j) && y(i, j)) fn += 1;
        }
        macro += (tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;
    }
    r.macro_f1 = macro / static_cast<double>(l);
    const double denom = 2 * tp_all + fp_all + fn_all;
    r.micro_f1 = denom > 0 ? 2 * tp_all / denom : 0.0;
    return r;
}

/// Random scores on a coarse grid so that ties are frequent.
inline Matrix tied_scores(Rng& rng, Index m, Index l)
{
    Matrix s(m, l);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < l; ++j) s(i, j) = static_cast<double>(rng.below(5)) / 4.0;
    return s;
}

inline LabelMatrix random_binary(Rng& rng, Index m, Index l, double p = 0.4)
{
    LabelMatrix y(m, l);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < l; ++j) y(i, j) = rng.uniform() < p;
    return y;
}

} // namespace pml3er::testkit
