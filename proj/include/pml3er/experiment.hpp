#pragma once

// End-to-end pipeline and benchmark protocol: synthetic noise, repeated
// train/test splits, per-split cross-validated choice of lambda2, the two
// learning stages, and evaluation against the ground truth.
//
// Seeds form a tree rooted at the master seed: noise injection draws from
// ("noise"), split s from ("split", s), and within a split the partition and
// the cross-validation folds draw from their own children. Adding splits
// therefore never changes the results of earlier ones.

#include "pml3er/dataset.hpp"
#include "pml3er/enrichment.hpp"
#include "pml3er/knn.hpp"
#include "pml3er/metrics.hpp"
#include "pml3er/random.hpp"
#include "pml3er/trainer.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pml3er {

struct ExperimentConfig {
    int noise_percent = 100;
    int splits = 5;
    double split_fraction = 0.5;
    KnnConfig knn{};
    PropagationConfig propagation{};
    /// lambda2 inside is ignored; it comes from `lambda2` or the grid search.
    TrainerConfig trainer{};
    std::vector<double> lambda2_grid{10.0, 100.0};
    /// When set, skips cross-validation and uses this value.
    std::optional<double> lambda2{};
    int cv_folds = 5;
    bool add_bias = false;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (noise_percent < 0) throw ConfigError("noise percentage must be non-negative");
        if (splits < 1) throw ConfigError("split count must be at least 1");
        if (!(split_fraction > 0.0 && split_fraction < 1.0))
            throw ConfigError("split fraction must lie strictly between 0 and 1");
        if (!lambda2 && lambda2_grid.empty()) throw ConfigError("lambda2 grid is empty");
        for (double v : lambda2_grid)
            if (!(v > 0.0)) throw ConfigError("lambda2 grid values must be positive");
        if (cv_folds < 2) throw ConfigError("cv_folds must be at least 2");
        if (knn.k < 1) throw ConfigError("k must be positive");
        propagation.validate();
        TrainerConfig t = trainer;
        t.lambda2 = lambda2.value_or(1.0);
        t.validate();
    }
};

namespace detail {

/// Re-throws the active exception with `stage` prefixed, keeping its type.
[[noreturn]] inline void rethrow_with_stage(const std::string& stage)
{
    const auto msg = [&](const std::exception& e) { return stage + ": " + e.what(); };
    try {
        throw;
    } catch (const ParseError& e) {
        throw ParseError(msg(e), e.line());
    } catch (const RangeError& e) {
        throw RangeError(msg(e));
    } catch (const ValidationError& e) {
        throw ValidationError(msg(e));
    } catch (const ConfigError& e) {
        throw ConfigError(msg(e));
    } catch (const StateError& e) {
        throw StateError(msg(e));
    } catch (const ShapeError& e) {
        throw ShapeError(msg(e));
    } catch (const NumericError& e) {
        throw NumericError(msg(e));
    } catch (const IoError& e) {
        throw IoError(msg(e));
    }
}

template <typename Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const Error&) {
        rethrow_with_stage(stage);
    }
}

inline Matrix model_features(const Matrix& x, bool add_bias)
{
    return add_bias ? with_bias_column(x) : x;
}

} // namespace detail

/// Stage one on a candidate matrix: kNN graph, then propagation.
inline EnrichmentResult enrich_labels(const Matrix& x, const LabelMatrix& candidates,
                                      const KnnConfig& knn, const PropagationConfig& prop)
{
    return detail::staged("enrichment", [&] {
        const auto graph = build_weight_graph(x, knn);
        return enrich(candidates, graph, prop);
    });
}

/// Stage two from a precomputed enrichment.
inline FitResult train_on_enrichment(const Matrix& x, const Matrix& yhat,
                                     const LabelMatrix& candidates, TrainerConfig cfg,
                                     double lambda2, bool add_bias)
{
    cfg.lambda2 = lambda2;
    return detail::staged("training", [&] {
        auto res = fit(detail::model_features(x, add_bias), yhat, candidates, cfg);
        res.model.bias = add_bias;
        return res;
    });
}

/// Contiguous folds over a seeded permutation; sizes differ by at most one,
/// the first n % folds folds being the larger ones.
inline std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, int folds,
                                                            std::uint64_t seed)
{
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (n < static_cast<std::size_t>(folds))
        throw ConfigError("cross-validation: " + std::to_string(n) + " instances for " +
                          std::to_string(folds) + " folds");
    Rng rng(seed);
    const auto perm = rng.permutation(n);
    const auto f = static_cast<std::size_t>(folds);
    std::vector<std::vector<std::size_t>> out(f);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < f; ++k) {
        const std::size_t size = n / f + (k < n % f ? 1 : 0);
        out[k].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                      perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return out;
}

namespace detail {

/// Index of the highest score; the first one wins a tie.
inline std::size_t best_score_index(const std::vector<std::pair<double, double>>& scores)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i].second > scores[best].second) best = i;
    return best;
}

} // namespace detail

struct Lambda2Selection {
    double lambda2 = 0.0;
    /// Mean held-out AP per grid value, in ascending lambda2 order (empty when
    /// the grid has a single value).
    std::vector<std::pair<double, double>> scores;
};

/// Picks lambda2 from `grid` by k-fold cross-validation on the training
/// instances. Held-out folds are scored by average precision against their
/// candidate labels; ties go to the smaller lambda2.
inline Lambda2Selection select_lambda2(const Dataset& train, std::vector<double> grid, int folds,
                                       std::uint64_t seed, const ExperimentConfig& cfg)
{
    if (grid.empty()) throw ConfigError("lambda2 grid is empty");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() == 1) return {grid.front(), {}};

    const auto parts = fold_partition(static_cast<std::size_t>(train.n()), folds, seed);
    std::vector<double> total(grid.size(), 0.0);
    for (std::size_t f = 0; f < parts.size(); ++f) {
        std::vector<std::size_t> fit_idx;
        for (std::size_t g = 0; g < parts.size(); ++g)
            if (g != f) fit_idx.insert(fit_idx.end(), parts[g].begin(), parts[g].end());
        const Dataset fit_part = train.subset(fit_idx);
        const Dataset held = train.subset(parts[f]);
        // Stage one does not depend on lambda2, so it is shared across the grid.
        const auto enr = enrich_labels(fit_part.features(), fit_part.candidates(), cfg.knn,
                                       cfg.propagation);
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const auto res = train_on_enrichment(fit_part.features(), enr.yhat,
                                                 fit_part.candidates(), cfg.trainer, grid[gi],
                                                 cfg.add_bias);
            const auto pred = predict(res.model, held.features());
            total[gi] += average_precision(pred.scores, held.candidates());
        }
    }
    Lambda2Selection sel;
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        sel.scores.emplace_back(grid[gi], total[gi] / static_cast<double>(parts.size()));
    sel.lambda2 = grid[detail::best_score_index(sel.scores)];
    return sel;
}

struct SplitOutcome {
    Model model;
    MetricsReport report;
    double lambda2 = 0.0;
    std::vector<double> trace;
};

/// Both learning stages on `train`, evaluated on `test` against ground truth.
inline SplitOutcome run_pipeline(const Dataset& train, const Dataset& test,
                                 const ExperimentConfig& cfg, std::uint64_t split_seed)
{
    SplitOutcome out;
    out.lambda2 = cfg.lambda2 ? *cfg.lambda2
                              : detail::staged("lambda2 selection", [&] {
                                    return select_lambda2(train, cfg.lambda2_grid, cfg.cv_folds,
                                                          derive_seed(split_seed, "cv"), cfg)
                                        .lambda2;
                                });
    const auto enr =
        enrich_labels(train.features(), train.candidates(), cfg.knn, cfg.propagation);
    auto res = train_on_enrichment(train.features(), enr.yhat, train.candidates(), cfg.trainer,
                                   out.lambda2, cfg.add_bias);
    out.model = std::move(res.model);
    out.trace = std::move(res.trace);
    out.report = detail::staged("evaluation", [&] {
        const auto pred = predict(out.model, test.features());
        return evaluate(pred.scores, pred.labels, test.truth());
    });
    return out;
}

/// One split of the benchmark protocol on an already-noisy dataset.
inline SplitOutcome run_split(const Dataset& pml, const ExperimentConfig& cfg, int split_index)
{
    const auto split_seed = derive_seed(cfg.seed, "split", static_cast<std::uint64_t>(split_index));
    const auto [train, test] =
        split(pml, SplitSpec{cfg.split_fraction, derive_seed(split_seed, "partition")});
    return run_pipeline(train, test, cfg, split_seed);
}

struct BenchmarkResult {
    std::vector<SplitOutcome> splits;
    MetricSummary summary;

    [[nodiscard]] std::vector<MetricsReport> reports() const
    {
        std::vector<MetricsReport> r;
        for (const auto& s : splits) r.push_back(s.report);
        return r;
    }
};

/// Synthetic noise once per dataset (from the master seed), then every split.
inline Dataset make_pml_dataset(const Dataset& clean, const ExperimentConfig& cfg)
{
    return detail::staged("noise injection", [&] {
        return inject_noise(clean, NoiseConfig{cfg.noise_percent, derive_seed(cfg.seed, "noise")});
    });
}

inline BenchmarkResult run_benchmark(const Dataset& clean, const ExperimentConfig& cfg)
{
    cfg.validate();
    const Dataset pml = make_pml_dataset(clean, cfg);
    BenchmarkResult res;
    for (int s = 0; s < cfg.splits; ++s)
        res.splits.push_back(detail::staged("split " + std::to_string(s),
                                            [&] { return run_split(pml, cfg, s); }));
    res.summary = aggregate(res.reports());
    return res;
}

} // namespace pml3er
