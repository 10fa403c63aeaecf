#pragma once

// Shared fixtures for the test binaries: random matrices and a synthetic
// multi-label generator whose features are informative about the labels.

#include "pml3er/dataset.hpp"
#include "pml3er/random.hpp"

#include <cmath>
#include <cstdint>

namespace pml3er::testkit {

inline double normal(Rng& rng)
{
    // Box-Muller; u1 is kept away from 0.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0)
{
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = scale * (2.0 * rng.uniform() - 1.0);
    return m;
}

inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols)
{
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

/// Random binary matrix where every row has between 1 and l-1 ones.
inline LabelMatrix random_candidates(Rng& rng, Index n, Index l)
{
    LabelMatrix y(n, l);
    for (Index i = 0; i < n; ++i) {
        do {
            for (Index j = 0; j < l; ++j) y(i, j) = rng.uniform() < 0.4;
        } while (y.row(i).count() < 1 || y.row(i).count() > l - 1);
    }
    return y;
}

/// Clean multi-label data: each label owns a prototype direction, an instance
/// carries one to three labels (the later ones drawn near the first, giving
/// label correlation) and its features are the sum of its label prototypes
/// plus Gaussian noise.
inline Dataset synthetic_multilabel(Index n, Index d, Index l, std::uint64_t seed,
                                    double noise = 0.3)
{
    Rng rng(seed);
    const Matrix protos = gaussian_matrix(rng, l, d);
    Matrix x(n, d);
    LabelMatrix y = LabelMatrix::Constant(n, l, false);
    for (Index i = 0; i < n; ++i) {
        const auto first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(l)));
        y(i, first) = true;
        const auto extra = rng.below(3);
        for (std::uint64_t e = 0; e < extra; ++e) {
            const auto off = 1 + static_cast<Index>(rng.below(2));
            y(i, (first + off) % l) = true;
        }
        x.row(i).setZero();
        for (Index j = 0; j < l; ++j)
            if (y(i, j)) x.row(i) += protos.row(j);
        for (Index f = 0; f < d; ++f) x(i, f) += noise * normal(rng);
    }
    return Dataset(std::move(x), y, y);
}

} // namespace pml3er::testkit
