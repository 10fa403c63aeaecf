#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pml3er {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Binary label matrix; `true` marks a (candidate or ground-truth) label.
using LabelMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/* Error hierarchy. Every failure raised by the library derives from Error so
 * callers can catch one type; the CLI maps the concrete kinds to exit codes. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class RangeError : public Error {
    using Error::Error;
};
class ValidationError : public Error {
    using Error::Error;
};
class ConfigError : public Error {
    using Error::Error;
};
class StateError : public Error {
    using Error::Error;
};
class ShapeError : public Error {
    using Error::Error;
};
class NumericError : public Error {
    using Error::Error;
};
class IoError : public Error {
    using Error::Error;
};

namespace detail {

inline void require_shape(bool ok, const char* what)
{
    if (!ok) throw ShapeError(what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m)
{
    return m.derived().allFinite();
}

} // namespace detail

inline LabelMatrix to_labels(const Matrix& m) { return m.array() != 0.0; }
inline Matrix to_real(const LabelMatrix& y) { return y.cast<double>().matrix(); }

} // namespace pml3er
