#pragma once

// Multi-label datasets with candidate (possibly noisy) labels, synthetic
// noise injection and seeded train/test splitting.

#include "pml3er/common.hpp"
#include "pml3er/random.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pml3er {

/// Feature matrix plus candidate labels and, when known, the ground truth.
///
/// Invariants (checked on construction):
///  - n, d, l > 0 and all shapes agree;
///  - every candidate row holds between 1 and l-1 labels;
///  - the ground truth, if present, is covered by the candidates.
class Dataset {
public:
    Dataset(Matrix features, LabelMatrix candidates,
            std::optional<LabelMatrix> truth = std::nullopt)
        : x_(std::move(features)), y_(std::move(candidates)), truth_(std::move(truth))
    {
        validate();
    }

    [[nodiscard]] Index n() const noexcept { return x_.rows(); }
    [[nodiscard]] Index d() const noexcept { return x_.cols(); }
    [[nodiscard]] Index l() const noexcept { return y_.cols(); }

    [[nodiscard]] const Matrix& features() const noexcept { return x_; }
    [[nodiscard]] const LabelMatrix& candidates() const noexcept { return y_; }
    [[nodiscard]] bool has_truth() const noexcept { return truth_.has_value(); }
    [[nodiscard]] const LabelMatrix& truth() const
    {
        if (!truth_) throw StateError("dataset carries no ground-truth labels");
        return *truth_;
    }

    /// Rows `idx` (in order) as a new dataset.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> idx) const
    {
        const auto m = static_cast<Index>(idx.size());
        Matrix xs(m, d());
        LabelMatrix ys(m, l());
        std::optional<LabelMatrix> ts;
        if (truth_) ts.emplace(m, l());
        for (Index r = 0; r < m; ++r) {
            const auto i = static_cast<Index>(idx[static_cast<std::size_t>(r)]);
            if (i < 0 || i >= n()) throw RangeError("subset index out of range");
            xs.row(r) = x_.row(i);
            ys.row(r) = y_.row(i);
            if (ts) ts->row(r) = truth_->row(i);
        }
        return Dataset(std::move(xs), std::move(ys), std::move(ts));
    }

    /// Same labels, replaced features (e.g. with an appended bias column).
    [[nodiscard]] Dataset with_features(Matrix features) const
    {
        return Dataset(std::move(features), y_, truth_);
    }

private:
    void validate() const
    {
        if (x_.rows() == 0 || x_.cols() == 0 || y_.cols() == 0)
            throw ValidationError("dataset dimensions n, d, l must be positive");
        if (y_.rows() != x_.rows())
            throw ValidationError("feature and label matrices disagree on instance count");
        if (!x_.allFinite()) throw ValidationError("feature matrix holds non-finite values");
        for (Index i = 0; i < y_.rows(); ++i) {
            const auto c = y_.row(i).count();
            if (c < 1)
                throw ValidationError("instance " + std::to_string(i) + " has no candidate label");
            if (c > l() - 1)
                throw ValidationError("instance " + std::to_string(i) +
                                      " is annotated with every label");
        }
        if (truth_) {
            if (truth_->rows() != y_.rows() || truth_->cols() != y_.cols())
                throw ValidationError("ground-truth matrix shape differs from candidates");
            if ((*truth_ && !y_).any())
                throw ValidationError("ground-truth label outside the candidate set");
        }
    }

    Matrix x_;
    LabelMatrix y_;
    std::optional<LabelMatrix> truth_;
};

struct NoiseConfig {
    /// Noise labels added per instance, as a percentage of its true label count.
    int percent = 100;
    std::uint64_t seed = 0;
};

struct SplitSpec {
    double train_fraction = 0.5;
    std::uint64_t seed = 0;
};

/// Number of noise labels for an instance with `g` true labels out of `l`:
/// g*a/100 rounded half up, capped so that at most l-1 labels are candidates.
inline Index noise_label_count(Index g, Index l, int percent)
{
    const auto wanted = (g * percent + 50) / 100;
    return std::max<Index>(0, std::min<Index>(wanted, l - 1 - g));
}

/// Turns the ground truth into a synthetic PML candidate matrix.
///
/// Per instance, noise labels are drawn uniformly without replacement from
/// the labels outside its ground truth. The ground truth itself is kept.
inline Dataset inject_noise(const Dataset& ds, const NoiseConfig& cfg)
{
    if (cfg.percent < 0) throw ConfigError("noise percentage must be non-negative");
    if (!ds.has_truth()) throw StateError("noise injection needs ground-truth labels");
    const LabelMatrix& truth = ds.truth();
    const Index l = ds.l();
    LabelMatrix y = truth;
    Rng rng(cfg.seed);
    std::vector<Index> pool;
    pool.reserve(static_cast<std::size_t>(l));
    for (Index i = 0; i < ds.n(); ++i) {
        const Index g = truth.row(i).count();
        if (g < 1)
            throw ValidationError("instance " + std::to_string(i) + " has no ground-truth label");
        const Index m = noise_label_count(g, l, cfg.percent);
        if (m == 0) continue;
        pool.clear();
        for (Index j = 0; j < l; ++j)
            if (!truth(i, j)) pool.push_back(j);
        // Partial Fisher-Yates: the first m slots become the sample.
        for (Index s = 0; s < m; ++s) {
            const auto remaining = static_cast<std::uint64_t>(pool.size()) - static_cast<std::uint64_t>(s);
            const auto pick = static_cast<std::size_t>(s) + static_cast<std::size_t>(rng.below(remaining));
            std::swap(pool[static_cast<std::size_t>(s)], pool[pick]);
            y(i, pool[static_cast<std::size_t>(s)]) = true;
        }
    }
    return Dataset(ds.features(), std::move(y), truth);
}

/// Index partition of a seeded split: the first ceil(n * fraction) entries of
/// a random permutation train, the rest test.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec)
{
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    if (n < 2) throw ConfigError("splitting needs at least two instances");
    Rng rng(spec.seed);
    auto perm = rng.permutation(n);
    auto n_train = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * spec.train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    SplitIndices out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return out;
}

inline std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec)
{
    auto idx = split_indices(static_cast<std::size_t>(ds.n()), spec);
    return {ds.subset(idx.train), ds.subset(idx.test)};
}

/// Appends a constant-1 feature column.
inline Matrix with_bias_column(const Matrix& x)
{
    Matrix out(x.rows(), x.cols() + 1);
    out.leftCols(x.cols()) = x;
    out.col(x.cols()).setOnes();
    return out;
}

} // namespace pml3er
