#pragma once

// Small text helpers shared by the file formats. Reals are written in the
// shortest form that parses back to the identical double, so every format
// round-trips bit-exactly.

#include "pml3er/common.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace pml3er::text {

inline std::string format_real(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void append_real(std::string& out, double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

/// Splits on runs of spaces/tabs, dropping empty tokens.
inline std::vector<std::string_view> tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const auto b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

inline double parse_real(std::string_view s, std::size_t line)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError("invalid real number '" + std::string(s) + "'", line);
    return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t line)
{
    s = trim(s);
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ParseError("invalid integer '" + std::string(s) + "'", line);
    return v;
}

/// Reads a whole file into lines, stripping a trailing '\r' from each.
inline std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

/// Parses a `#a b c ...` header into exactly `count` non-negative integers.
inline std::vector<std::size_t> parse_header(std::string_view line, std::size_t count,
                                             std::size_t line_no)
{
    line = trim(line);
    if (line.empty() || line.front() != '#')
        throw ParseError("expected header line starting with '#'", line_no);
    auto toks = tokens(line.substr(1));
    if (toks.size() != count)
        throw ParseError("header must contain " + std::to_string(count) + " integers",
                         line_no);
    std::vector<std::size_t> out;
    for (auto t : toks) out.push_back(parse_int<std::size_t>(t, line_no));
    return out;
}

/// Dense matrix as CSV rows under a `#rows cols` header.
inline std::string matrix_to_csv(const Matrix& m)
{
    std::string out = "#" + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            append_real(out, m(i, j));
        }
        out += '\n';
    }
    return out;
}

/// Parses `rows` CSV rows of `cols` reals starting at `lines[first]`.
inline Matrix parse_csv_block(const std::vector<std::string>& lines, std::size_t first,
                              std::size_t rows, std::size_t cols)
{
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::size_t r = 0;
    for (std::size_t k = first; k < lines.size(); ++k) {
        auto s = trim(lines[k]);
        if (s.empty()) continue;
        if (r == rows) throw ParseError("more rows than declared in header", k + 1);
        auto cells = split(s, ',');
        if (cells.size() != cols)
            throw ParseError("expected " + std::to_string(cols) + " values, found " +
                                 std::to_string(cells.size()),
                             k + 1);
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Index>(r), static_cast<Index>(j)) = parse_real(cells[j], k + 1);
        ++r;
    }
    if (r != rows)
        throw ParseError("expected " + std::to_string(rows) + " rows, found " + std::to_string(r),
                         lines.size());
    return m;
}

inline Matrix read_matrix_csv(const std::string& path)
{
    auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("empty file", 1);
    auto h = parse_header(lines[0], 2, 1);
    return parse_csv_block(lines, 1, h[0], h[1]);
}

} // namespace pml3er::text
