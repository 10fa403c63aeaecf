#pragma once

// The seven multi-label evaluation metrics, plus mean/std aggregation and
// report serialization.
//
// Ranking conventions: labels are ranked by descending score with ties broken
// by the smaller label index; in ranking loss a tied relevant/irrelevant pair
// counts as mis-ordered. Instances whose true label set is empty or full have
// no relevant/irrelevant pairs and are left out of one-error, ranking loss and
// average precision.

#include "pml3er/common.hpp"
#include "pml3er/text.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace pml3er {

struct MetricsReport {
    double saccuracy = 0.0;
    double hloss = 0.0;
    double oerror = 0.0;
    double rloss = 0.0;
    double ap = 0.0;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    Index skipped_instances = 0;

    static constexpr std::array<std::string_view, 7> names = {
        "saccuracy", "hloss", "oerror", "rloss", "ap", "macro_f1", "micro_f1"};

    [[nodiscard]] std::array<double, 7> values() const
    {
        return {saccuracy, hloss, oerror, rloss, ap, macro_f1, micro_f1};
    }
    static MetricsReport from_values(const std::array<double, 7>& v, Index skipped = 0)
    {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], skipped};
    }
};

namespace detail {

/// Label order by descending score, ties to the smaller index.
inline std::vector<Index> rank_order(const Eigen::Ref<const Vector>& s)
{
    std::vector<Index> order(static_cast<std::size_t>(s.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s(a) > s(b); });
    return order;
}

inline double f1(double tp, double fp, double fn)
{
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

} // namespace detail

inline MetricsReport evaluate(const Matrix& scores, const LabelMatrix& labels,
                              const LabelMatrix& truth)
{
    detail::require_shape(scores.rows() == truth.rows() && scores.cols() == truth.cols() &&
                              labels.rows() == truth.rows() && labels.cols() == truth.cols(),
                          "evaluate: scores, labels and truth disagree in shape");
    const Index m = truth.rows(), l = truth.cols();
    if (m == 0) throw ValidationError("evaluate: no instances");
    if (l == 0) throw ValidationError("evaluate: no labels");

    MetricsReport r;
    Index exact = 0, mismatches = 0, ranked = 0;
    double oerr = 0.0, rloss = 0.0, ap = 0.0;
    std::vector<Index> rank(static_cast<std::size_t>(l));

    for (Index i = 0; i < m; ++i) {
        const auto diff = (labels.row(i) != truth.row(i)).count();
        mismatches += diff;
        if (diff == 0) ++exact;

        const Index rel = truth.row(i).count();
        if (rel == 0 || rel == l) {
            ++r.skipped_instances;
            continue;
        }
        ++ranked;
        const Vector s = scores.row(i).transpose();
        const auto order = detail::rank_order(s);
        if (!truth(i, order[0])) oerr += 1.0;

        // rank[j] is the 1-based position of label j.
        for (std::size_t p = 0; p < order.size(); ++p)
            rank[static_cast<std::size_t>(order[p])] = static_cast<Index>(p) + 1;

        Index bad_pairs = 0;
        for (Index u = 0; u < l; ++u) {
            if (!truth(i, u)) continue;
            for (Index v = 0; v < l; ++v)
                if (!truth(i, v) && s(u) <= s(v)) ++bad_pairs;
        }
        rloss += static_cast<double>(bad_pairs) / static_cast<double>(rel * (l - rel));

        // Walking down the ranking, the k-th relevant label found at position p
        // contributes k / p.
        double prec = 0.0;
        Index seen = 0;
        for (std::size_t p = 0; p < order.size(); ++p) {
            if (!truth(i, order[p])) continue;
            ++seen;
            prec += static_cast<double>(seen) / static_cast<double>(p + 1);
        }
        ap += prec / static_cast<double>(rel);
    }

    r.saccuracy = static_cast<double>(exact) / static_cast<double>(m);
    r.hloss = static_cast<double>(mismatches) / static_cast<double>(m * l);
    if (ranked > 0) {
        r.oerror = oerr / static_cast<double>(ranked);
        r.rloss = rloss / static_cast<double>(ranked);
        r.ap = ap / static_cast<double>(ranked);
    }

    double tp_all = 0, fp_all = 0, fn_all = 0, macro = 0;
    for (Index j = 0; j < l; ++j) {
        const double tp = static_cast<double>((labels.col(j) && truth.col(j)).count());
        const double fp = static_cast<double>((labels.col(j) && !truth.col(j)).count());
        const double fn = static_cast<double>((!labels.col(j) && truth.col(j)).count());
        macro += detail::f1(tp, fp, fn);
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;
    }
    r.macro_f1 = macro / static_cast<double>(l);
    r.micro_f1 = detail::f1(tp_all, fp_all, fn_all);
    return r;
}

/// Average precision alone, for model selection.
inline double average_precision(const Matrix& scores, const LabelMatrix& truth)
{
    const LabelMatrix none = LabelMatrix::Constant(truth.rows(), truth.cols(), false);
    return evaluate(scores, none, truth).ap;
}

struct MetricSummary {
    MetricsReport mean;
    MetricsReport std;
};

/// Per-metric mean and sample (n-1) standard deviation; std is 0 for a single
/// report.
inline MetricSummary aggregate(const std::vector<MetricsReport>& reports)
{
    if (reports.empty()) throw ValidationError("aggregate: no reports");
    const auto n = static_cast<double>(reports.size());
    std::array<double, 7> mean{}, sd{};
    Index skipped = 0;
    for (const auto& r : reports) {
        const auto v = r.values();
        for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
        skipped += r.skipped_instances;
    }
    for (auto& m : mean) m /= n;
    if (reports.size() > 1) {
        for (const auto& r : reports) {
            const auto v = r.values();
            for (std::size_t k = 0; k < v.size(); ++k) sd[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
        }
        for (auto& s : sd) s = std::sqrt(s / (n - 1.0));
    }
    return {MetricsReport::from_values(mean, skipped), MetricsReport::from_values(sd)};
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& r)
{
    nlohmann::ordered_json j;
    const auto v = r.values();
    for (std::size_t k = 0; k < v.size(); ++k) j[std::string(MetricsReport::names[k])] = v[k];
    j["skipped_instances"] = r.skipped_instances;
    return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j)
{
    std::array<double, 7> v{};
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = j.at(std::string(MetricsReport::names[k])).get<double>();
    return MetricsReport::from_values(v, j.value("skipped_instances", Index{0}));
}

inline std::string csv_header()
{
    std::string out = "split";
    for (auto n : MetricsReport::names) {
        out += ',';
        out += n;
    }
    out += ",skipped_instances\n";
    return out;
}

inline std::string csv_row(std::string_view label, const MetricsReport& r, bool with_skipped = true)
{
    std::string out(label);
    for (double v : r.values()) {
        out += ',';
        text::append_real(out, v);
    }
    out += ',';
    if (with_skipped) out += std::to_string(r.skipped_instances);
    out += '\n';
    return out;
}

/// One row per split followed by `mean` and `std` rows.
inline std::string reports_to_csv(const std::vector<MetricsReport>& splits)
{
    std::string out = csv_header();
    for (std::size_t s = 0; s < splits.size(); ++s) out += csv_row(std::to_string(s), splits[s]);
    const auto agg = aggregate(splits);
    out += csv_row("mean", agg.mean);
    out += csv_row("std", agg.std, false);
    return out;
}

inline nlohmann::ordered_json reports_to_json(const std::vector<MetricsReport>& splits)
{
    nlohmann::ordered_json j;
    j["splits"] = nlohmann::ordered_json::array();
    for (const auto& r : splits) j["splits"].push_back(report_to_json(r));
    const auto agg = aggregate(splits);
    j["mean"] = report_to_json(agg.mean);
    auto sd = report_to_json(agg.std);
    sd.erase("skipped_instances");
    j["std"] = sd;
    return j;
}

} // namespace pml3er
