#pragma once

// Text formats for datasets.
//
// sparse-multilabel:
//   #n d l
//   L f:v f:v ...            (L = comma-separated 0-based label indices)
//   Lcand|Ltruth f:v ...     (PML form: candidates, then ground truth)
//
// dense-csv:
//   #n d l
//   x1,...,xd;y1,...,yl
//   x1,...,xd;c1,...,cl;t1,...,tl   (PML form)
//
// A file without a truth block loads with ground truth equal to its labels.

#include "pml3er/dataset.hpp"
#include "pml3er/text.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pml3er {

enum class DataFormat { sparse_multilabel, dense_csv };

inline DataFormat parse_data_format(std::string_view s)
{
    if (s == "sparse" || s == "sparse-multilabel") return DataFormat::sparse_multilabel;
    if (s == "dense" || s == "dense-csv" || s == "csv") return DataFormat::dense_csv;
    throw ConfigError("unknown dataset format '" + std::string(s) + "'");
}

namespace detail {

inline void parse_label_list(std::string_view s, Index l, LabelMatrix& y, Index row,
                             std::size_t line_no)
{
    if (text::trim(s).empty()) return;
    for (auto tok : text::split(s, ',')) {
        const auto j = text::parse_int<long long>(tok, line_no);
        if (j < 0 || j >= l)
            throw RangeError("line " + std::to_string(line_no) + ": label index " +
                             std::to_string(j) + " outside [0, " + std::to_string(l) + ")");
        y(row, static_cast<Index>(j)) = true;
    }
}

inline void parse_binary_block(std::string_view s, Index l, LabelMatrix& y, Index row,
                               std::size_t line_no)
{
    auto cells = text::split(s, ',');
    if (static_cast<Index>(cells.size()) != l)
        throw ParseError("expected " + std::to_string(l) + " label values", line_no);
    for (Index j = 0; j < l; ++j) {
        const auto c = text::trim(cells[static_cast<std::size_t>(j)]);
        if (c == "1")
            y(row, j) = true;
        else if (c != "0")
            throw ParseError("label values must be 0 or 1", line_no);
    }
}

struct RawDataset {
    Matrix x;
    LabelMatrix cand;
    LabelMatrix truth;
};

inline RawDataset parse_sparse(const std::vector<std::string>& lines, Index n, Index d,
                               Index l, std::size_t first)
{
    RawDataset raw{Matrix::Zero(n, d), LabelMatrix::Constant(n, l, false),
                   LabelMatrix::Constant(n, l, false)};
    Index row = 0;
    for (std::size_t k = first; k < lines.size(); ++k) {
        const std::size_t line_no = k + 1;
        std::string_view s = lines[k];
        if (text::trim(s).empty()) continue;
        if (row == n) throw ParseError("more instances than declared in header", line_no);
        auto toks = text::tokens(s);
        std::size_t ft = 0;
        const bool has_labels =
            !(s.front() == ' ' || s.front() == '\t') && toks[0].find(':') == std::string_view::npos;
        if (!has_labels)
            throw ValidationError("line " + std::to_string(line_no) + ": empty label set");
        {
            auto block = toks[0];
            ft = 1;
            const auto bar = block.find('|');
            auto cand = block.substr(0, bar);
            if (text::trim(cand).empty())
                throw ValidationError("line " + std::to_string(line_no) + ": empty label set");
            parse_label_list(cand, l, raw.cand, row, line_no);
            if (bar == std::string_view::npos)
                raw.truth.row(row) = raw.cand.row(row);
            else
                parse_label_list(block.substr(bar + 1), l, raw.truth, row, line_no);
        }
        std::vector<bool> seen(static_cast<std::size_t>(d), false);
        for (; ft < toks.size(); ++ft) {
            const auto colon = toks[ft].find(':');
            if (colon == std::string_view::npos)
                throw ParseError("feature token '" + std::string(toks[ft]) + "' lacks ':'", line_no);
            const auto f = text::parse_int<long long>(toks[ft].substr(0, colon), line_no);
            if (f < 0 || f >= d)
                throw RangeError("line " + std::to_string(line_no) + ": feature index " +
                                 std::to_string(f) + " outside [0, " + std::to_string(d) + ")");
            if (seen[static_cast<std::size_t>(f)])
                throw ParseError("duplicate feature index " + std::to_string(f), line_no);
            seen[static_cast<std::size_t>(f)] = true;
            raw.x(row, static_cast<Index>(f)) = text::parse_real(toks[ft].substr(colon + 1), line_no);
        }
        ++row;
    }
    if (row != n)
        throw ParseError("header declares " + std::to_string(n) + " instances, found " +
                             std::to_string(row),
                         lines.size());
    return raw;
}

inline RawDataset parse_dense(const std::vector<std::string>& lines, Index n, Index d, Index l,
                              std::size_t first)
{
    RawDataset raw{Matrix::Zero(n, d), LabelMatrix::Constant(n, l, false),
                   LabelMatrix::Constant(n, l, false)};
    Index row = 0;
    for (std::size_t k = first; k < lines.size(); ++k) {
        const std::size_t line_no = k + 1;
        auto s = text::trim(lines[k]);
        if (s.empty()) continue;
        if (row == n) throw ParseError("more instances than declared in header", line_no);
        auto blocks = text::split(s, ';');
        if (blocks.size() != 2 && blocks.size() != 3)
            throw ParseError("expected 'features;labels' or 'features;candidates;truth'", line_no);
        auto cells = text::split(blocks[0], ',');
        if (static_cast<Index>(cells.size()) != d)
            throw ParseError("expected " + std::to_string(d) + " feature values", line_no);
        for (Index j = 0; j < d; ++j)
            raw.x(row, j) = text::parse_real(cells[static_cast<std::size_t>(j)], line_no);
        parse_binary_block(blocks[1], l, raw.cand, row, line_no);
        if (!raw.cand.row(row).any())
            throw ValidationError("line " + std::to_string(line_no) + ": empty label set");
        if (blocks.size() == 3)
            parse_binary_block(blocks[2], l, raw.truth, row, line_no);
        else
            raw.truth.row(row) = raw.cand.row(row);
        ++row;
    }
    if (row != n)
        throw ParseError("header declares " + std::to_string(n) + " instances, found " +
                             std::to_string(row),
                         lines.size());
    return raw;
}

inline void append_label_list(std::string& out, const LabelMatrix& y, Index i)
{
    bool first = true;
    for (Index j = 0; j < y.cols(); ++j) {
        if (!y(i, j)) continue;
        if (!first) out += ',';
        out += std::to_string(j);
        first = false;
    }
}

inline void append_binary(std::string& out, const LabelMatrix& y, Index i)
{
    for (Index j = 0; j < y.cols(); ++j) {
        if (j) out += ',';
        out += y(i, j) ? '1' : '0';
    }
}

} // namespace detail

/// Guesses the format from the first body line: dense rows contain ';'.
inline DataFormat detect_data_format(const std::vector<std::string>& lines)
{
    for (std::size_t k = 1; k < lines.size(); ++k) {
        auto s = text::trim(lines[k]);
        if (s.empty()) continue;
        return s.find(';') != std::string_view::npos ? DataFormat::dense_csv
                                                     : DataFormat::sparse_multilabel;
    }
    return DataFormat::sparse_multilabel;
}

inline Dataset parse_dataset(const std::vector<std::string>& lines, DataFormat format)
{
    if (lines.empty()) throw ParseError("empty dataset file", 1);
    auto h = text::parse_header(lines[0], 3, 1);
    if (h[0] == 0 || h[1] == 0 || h[2] == 0)
        throw ValidationError("dataset dimensions n, d, l must be positive");
    const auto n = static_cast<Index>(h[0]), d = static_cast<Index>(h[1]),
               l = static_cast<Index>(h[2]);
    auto raw = format == DataFormat::sparse_multilabel ? detail::parse_sparse(lines, n, d, l, 1)
                                                       : detail::parse_dense(lines, n, d, l, 1);
    return Dataset(std::move(raw.x), std::move(raw.cand), std::move(raw.truth));
}

inline Dataset load_dataset(const std::string& path, DataFormat format)
{
    return parse_dataset(text::read_lines(path), format);
}

inline Dataset load_dataset(const std::string& path)
{
    auto lines = text::read_lines(path);
    return parse_dataset(lines, detect_data_format(lines));
}

inline std::string format_dataset(const Dataset& ds, DataFormat format)
{
    const auto& x = ds.features();
    const auto& y = ds.candidates();
    const bool pml = ds.has_truth() && (ds.truth() != y).any();
    std::string out = "#" + std::to_string(ds.n()) + " " + std::to_string(ds.d()) + " " +
                      std::to_string(ds.l()) + "\n";
    for (Index i = 0; i < ds.n(); ++i) {
        if (format == DataFormat::sparse_multilabel) {
            detail::append_label_list(out, y, i);
            if (pml) {
                out += '|';
                detail::append_label_list(out, ds.truth(), i);
            }
            for (Index f = 0; f < ds.d(); ++f) {
                const double v = x(i, f);
                if (v == 0.0 && !std::signbit(v)) continue;
                out += ' ';
                out += std::to_string(f);
                out += ':';
                text::append_real(out, v);
            }
        } else {
            for (Index f = 0; f < ds.d(); ++f) {
                if (f) out += ',';
                text::append_real(out, x(i, f));
            }
            out += ';';
            detail::append_binary(out, y, i);
            if (pml) {
                out += ';';
                detail::append_binary(out, ds.truth(), i);
            }
        }
        out += '\n';
    }
    return out;
}

inline void save_dataset(const Dataset& ds, const std::string& path, DataFormat format)
{
    text::write_file(path, format_dataset(ds, format));
}

} // namespace pml3er
