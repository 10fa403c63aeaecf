#pragma once

// Joint estimation of ground-truth confidences C, label correlations B and a
// linear predictor W from features X and the signed enrichment Yhat:
//
//   min  ||Yhat - C B||_F^2 + ||C - X W||_F^2 + lambda1 ||B||_* + lambda2 ||W||_F^2
//   s.t. 0 <= C <= Y
//
// by alternating updates. C takes the clamped closed-form minimizer, B is
// refined by a few ADMM passes with singular value thresholding, and W is the
// ridge-regression solution.

#include "pml3er/common.hpp"
#include "pml3er/text.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <vector>

namespace pml3er {

struct TrainerConfig {
    double lambda1 = 1.0;
    double lambda2 = 10.0;
    double tau = 1.0;
    int admm_iters = 5;
    int outer_max = 50;
    double outer_tol = 1e-5;

    void validate() const
    {
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(tau > 0.0))
            throw ConfigError("lambda1, lambda2 and tau must be positive");
        if (admm_iters < 1 || outer_max < 1) throw ConfigError("iteration caps must be >= 1");
        if (!(outer_tol >= 0.0)) throw ConfigError("outer_tol must be non-negative");
    }
};

struct TrainerState {
    Matrix c;     ///< n x l confidences, 0 <= C <= Y
    Matrix b;     ///< l x l label correlations
    Matrix bhat;  ///< l x l ADMM auxiliary copy of B
    Matrix theta; ///< l x l ADMM multipliers
    Matrix w;     ///< d x l predictor
};

struct Model {
    Matrix w;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    /// The last row of W multiplies an implicit constant-1 feature.
    bool bias = false;

    [[nodiscard]] Index input_dim() const noexcept { return w.rows() - (bias ? 1 : 0); }
    [[nodiscard]] Index labels() const noexcept { return w.cols(); }
};

struct FitResult {
    Model model;
    TrainerState state;
    /// Objective before the first update and after every outer iteration.
    std::vector<double> trace;
};

struct Prediction {
    Matrix scores;
    LabelMatrix labels;
};

namespace detail {

inline Vector singular_values(const Matrix& m)
{
    Eigen::BDCSVD<Matrix> svd(m);
    Vector s = svd.singularValues();
    if (!s.allFinite()) throw NumericError("SVD produced non-finite singular values");
    return s;
}

template <typename Solver>
void check_factorization(const Solver& s, const char* what)
{
    if (s.info() != Eigen::Success) throw NumericError(what);
}

} // namespace detail

inline double nuclear_norm(const Matrix& m) { return detail::singular_values(m).sum(); }

/// Singular value thresholding: the proximal operator of t * ||.||_*.
inline Matrix svt(const Matrix& m, double threshold)
{
    if (!m.allFinite()) throw NumericError("svt: non-finite input");
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = (svd.singularValues().array() - threshold).cwiseMax(0.0).matrix();
    Matrix out = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    if (!out.allFinite()) throw NumericError("svt: SVD did not converge");
    return out;
}

/// ||Yhat - C B||^2 + ||C - X W||^2 + lambda1 ||B||_* + lambda2 ||W||^2.
inline double objective(const TrainerState& s, const Matrix& x, const Matrix& yhat,
                        double lambda1, double lambda2)
{
    detail::require_shape(s.c.rows() == yhat.rows() && s.c.cols() == s.b.rows() &&
                              s.b.cols() == yhat.cols() && x.rows() == s.c.rows() &&
                              x.cols() == s.w.rows() && s.w.cols() == s.c.cols(),
                          "objective: shape mismatch");
    const double fit_term = (yhat - s.c * s.b).squaredNorm();
    const double pred_term = (s.c - x * s.w).squaredNorm();
    const double value =
        fit_term + pred_term + lambda1 * nuclear_norm(s.b) + lambda2 * s.w.squaredNorm();
    if (!std::isfinite(value)) throw NumericError("objective: non-finite value");
    return value;
}

inline double objective(const TrainerState& s, const Matrix& x, const Matrix& yhat,
                        const TrainerConfig& cfg)
{
    return objective(s, x, yhat, cfg.lambda1, cfg.lambda2);
}

/// Unclamped minimizer over C: (Yhat B^T + X W)(B B^T + I)^{-1}.
inline Matrix unconstrained_c(const Matrix& b, const Matrix& w, const Matrix& x,
                              const Matrix& yhat)
{
    const Index l = b.rows();
    const Matrix gram = b * b.transpose() + Matrix::Identity(l, l);
    Eigen::LLT<Matrix> llt(gram);
    detail::check_factorization(llt, "update_C: B B^T + I is not positive definite");
    const Matrix rhs = yhat * b.transpose() + x * w;
    // gram is symmetric, so C' = rhs * gram^{-1} = (gram^{-1} rhs^T)^T.
    return llt.solve(rhs.transpose()).transpose();
}

/// Clamps to [0,1] and zeroes every non-candidate entry.
inline Matrix project_confidences(const Matrix& c, const LabelMatrix& candidates)
{
    detail::require_shape(c.rows() == candidates.rows() && c.cols() == candidates.cols(),
                          "project_confidences: shape mismatch");
    return candidates.select(c.array().cwiseMax(0.0).cwiseMin(1.0), 0.0).matrix();
}

inline Matrix update_c(const Matrix& b, const Matrix& w, const Matrix& x, const Matrix& yhat,
                       const LabelMatrix& candidates)
{
    Matrix c = project_confidences(unconstrained_c(b, w, x, yhat), candidates);
    if (!c.allFinite()) throw NumericError("update_C: non-finite confidences");
    return c;
}

/// One ADMM pass for min_B ||Yhat - C B||^2 + lambda1 ||B||_*, updating
/// (Bhat, B, Theta) in place.
class AdmmCorrelation {
public:
    AdmmCorrelation(const Matrix& c, const Matrix& yhat, double tau)
        : tau_(tau), rhs_base_(2.0 * c.transpose() * yhat)
    {
        if (!(tau > 0.0)) throw ConfigError("ADMM penalty tau must be positive");
        const Index l = c.cols();
        llt_.compute(2.0 * c.transpose() * c + tau * Matrix::Identity(l, l));
        detail::check_factorization(llt_, "ADMM: 2 C^T C + tau I is not positive definite");
    }

    /// Minimizer of the augmented Lagrangian over Bhat.
    [[nodiscard]] Matrix bhat_step(const Matrix& b, const Matrix& theta) const
    {
        return llt_.solve(rhs_base_ + tau_ * b + theta);
    }

    void pass(Matrix& bhat, Matrix& b, Matrix& theta, double lambda1, int iteration) const
    {
        bhat = bhat_step(b, theta);
        try {
            b = svt(bhat - theta / tau_, lambda1 / tau_);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (ADMM iteration " +
                               std::to_string(iteration) + ")");
        }
        theta += tau_ * (b - bhat);
    }

private:
    double tau_;
    Matrix rhs_base_;
    Eigen::LLT<Matrix> llt_;
};

inline void update_b_admm(TrainerState& s, const Matrix& yhat, double lambda1, double tau,
                          int iters)
{
    const AdmmCorrelation admm(s.c, yhat, tau);
    for (int t = 1; t <= iters; ++t) admm.pass(s.bhat, s.b, s.theta, lambda1, t);
}

/// Closed-form ridge regression W = (X^T X + lambda I)^{-1} X^T C with the
/// factorization cached across right-hand sides. When n < d the equivalent
/// dual form W = X^T (X X^T + lambda I)^{-1} C is used, which factors the
/// smaller n x n matrix.
class RidgeSolver {
public:
    RidgeSolver(const Matrix& x, double lambda) : x_(x), lambda_(lambda), dual_(x.rows() < x.cols())
    {
        if (!(lambda >= 0.0)) throw ConfigError("ridge weight must be non-negative");
        if (dual_)
            llt_.compute(x_ * x_.transpose() + lambda * Matrix::Identity(x_.rows(), x_.rows()));
        else
            llt_.compute(x_.transpose() * x_ + lambda * Matrix::Identity(x_.cols(), x_.cols()));
        detail::check_factorization(llt_, "ridge: system matrix is not positive definite");
    }

    [[nodiscard]] Matrix solve(const Matrix& c) const
    {
        detail::require_shape(c.rows() == x_.rows(), "ridge: target row count differs from X");
        Matrix w;
        if (dual_) {
            Matrix a = llt_.solve(c);
            // One step of iterative refinement.
            a += llt_.solve(c - x_ * (x_.transpose() * a) - lambda_ * a);
            w = x_.transpose() * a;
        } else {
            const Matrix rhs = x_.transpose() * c;
            w = llt_.solve(rhs);
            w += llt_.solve(rhs - x_.transpose() * (x_ * w) - lambda_ * w);
        }
        if (!w.allFinite()) throw NumericError("ridge: non-finite solution");
        return w;
    }

    /// Gradient of ||C - X W||^2 + lambda ||W||^2 with respect to W.
    [[nodiscard]] Matrix gradient(const Matrix& c, const Matrix& w) const
    {
        return 2.0 * (x_.transpose() * (x_ * w - c)) + 2.0 * lambda_ * w;
    }

private:
    Matrix x_;
    double lambda_;
    bool dual_;
    Eigen::LLT<Matrix> llt_;
};

inline Matrix update_w(const Matrix& x, const Matrix& c, double lambda2)
{
    return RidgeSolver(x, lambda2).solve(c);
}

/// Frobenius norm of the ridge gradient at W, for residual checks.
inline double ridge_gradient_norm(const Matrix& x, const Matrix& c, const Matrix& w, double lambda2)
{
    return (2.0 * (x.transpose() * (x * w - c)) + 2.0 * lambda2 * w).norm();
}

/// Starting point: C = positive part of Yhat on candidates, B = Bhat = I,
/// Theta = 0, W = 0.
inline TrainerState initial_state(Index d, const Matrix& yhat, const LabelMatrix& candidates)
{
    const Index l = yhat.cols();
    TrainerState s;
    s.c = project_confidences(yhat.cwiseMax(0.0), candidates);
    s.b = Matrix::Identity(l, l);
    s.bhat = s.b;
    s.theta = Matrix::Zero(l, l);
    s.w = Matrix::Zero(d, l);
    return s;
}

inline FitResult fit(const Matrix& x, const Matrix& yhat, const LabelMatrix& candidates,
                     const TrainerConfig& cfg)
{
    cfg.validate();
    detail::require_shape(x.rows() == yhat.rows() && yhat.rows() == candidates.rows() &&
                              yhat.cols() == candidates.cols(),
                          "fit: X, Yhat and Y disagree in shape");
    if (!x.allFinite() || !yhat.allFinite()) throw NumericError("fit: non-finite input");

    FitResult res;
    res.state = initial_state(x.cols(), yhat, candidates);
    TrainerState& s = res.state;
    const RidgeSolver ridge(x, cfg.lambda2);

    double prev = objective(s, x, yhat, cfg);
    res.trace.push_back(prev);
    for (int it = 1; it <= cfg.outer_max; ++it) {
        s.c = update_c(s.b, s.w, x, yhat, candidates);
        update_b_admm(s, yhat, cfg.lambda1, cfg.tau, cfg.admm_iters);
        s.w = ridge.solve(s.c);
        const double cur = objective(s, x, yhat, cfg);
        res.trace.push_back(cur);
        const double change = std::abs(cur - prev) / std::max(1.0, std::abs(prev));
        prev = cur;
        if (change < cfg.outer_tol) break;
    }
    res.model = Model{s.w, cfg.lambda1, cfg.lambda2, false};
    return res;
}

/// Scores X W; a label is predicted when its score is at least 0.5.
inline Prediction predict(const Model& model, const Matrix& x)
{
    if (x.cols() != model.input_dim())
        throw ShapeError("predict: model expects " + std::to_string(model.input_dim()) +
                         " features, got " + std::to_string(x.cols()));
    Prediction p;
    if (model.bias) {
        p.scores = x * model.w.topRows(model.input_dim());
        p.scores.rowwise() += model.w.row(model.input_dim());
    } else {
        p.scores = x * model.w;
    }
    p.labels = p.scores.array() >= 0.5;
    return p;
}

/// `#d l lambda1 lambda2[ bias]` followed by the rows of W as CSV.
inline std::string format_model(const Model& m)
{
    std::string out = "#" + std::to_string(m.w.rows()) + " " + std::to_string(m.w.cols()) + " " +
                      text::format_real(m.lambda1) + " " + text::format_real(m.lambda2);
    if (m.bias) out += " bias";
    out += '\n';
    for (Index i = 0; i < m.w.rows(); ++i) {
        for (Index j = 0; j < m.w.cols(); ++j) {
            if (j) out += ',';
            text::append_real(out, m.w(i, j));
        }
        out += '\n';
    }
    return out;
}

inline Model parse_model(const std::vector<std::string>& lines)
{
    if (lines.empty()) throw ParseError("empty model file", 1);
    auto head = text::trim(lines[0]);
    if (head.empty() || head.front() != '#') throw ParseError("expected model header", 1);
    auto toks = text::tokens(head.substr(1));
    if (toks.size() != 4 && !(toks.size() == 5 && toks[4] == "bias"))
        throw ParseError("model header must be '#d l lambda1 lambda2 [bias]'", 1);
    Model m;
    const auto d = text::parse_int<std::size_t>(toks[0], 1);
    const auto l = text::parse_int<std::size_t>(toks[1], 1);
    m.lambda1 = text::parse_real(toks[2], 1);
    m.lambda2 = text::parse_real(toks[3], 1);
    m.bias = toks.size() == 5;
    m.w = text::parse_csv_block(lines, 1, d, l);
    return m;
}

inline void save_model(const Model& m, const std::string& path)
{
    text::write_file(path, format_model(m));
}

inline Model load_model(const std::string& path) { return parse_model(text::read_lines(path)); }

inline std::string format_trace(const std::vector<double>& trace)
{
    std::string out = "iter,objective\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        text::append_real(out, trace[i]);
        out += '\n';
    }
    return out;
}

} // namespace pml3er
