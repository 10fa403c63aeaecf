#include "pml3er/knn.hpp"
#include "pml3er/nnls.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

using namespace pml3er;

namespace {

// O(n^2) reference neighbor scan with a full sort.
NeighborLists brute_force_knn(const Matrix& x, Index k)
{
    const Index n = x.rows();
    NeighborLists nb(n, k);
    for (Index i = 0; i < n; ++i) {
        std::vector<std::pair<double, Index>> cand;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0.0;
            for (Index f = 0; f < x.cols(); ++f) s += (x(i, f) - x(j, f)) * (x(i, f) - x(j, f));
            cand.emplace_back(s, j);
        }
        std::sort(cand.begin(), cand.end());
        for (Index r = 0; r < k; ++r) nb(i, r) = cand[static_cast<std::size_t>(r)].second;
    }
    return nb;
}

double nnls_objective(const Matrix& a, const Vector& b, const Vector& x)
{
    return (a * x - b).squaredNorm();
}

// Exhaustive NNLS: the optimum is the unconstrained least-squares solution on
// some support; try every support and keep the best feasible one.
double enumerated_nnls_optimum(const Matrix& a, const Vector& b)
{
    const Index k = a.cols();
    double best = b.squaredNorm();
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<Index> cols;
        for (Index j = 0; j < k; ++j)
            if (mask & (1u << j)) cols.push_back(j);
        Matrix sub(a.rows(), static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Index>(c)) = a.col(cols[c]);
        const Vector z = sub.completeOrthogonalDecomposition().solve(b);
        if ((z.array() < 0.0).any()) continue;
        best = std::min(best, (sub * z - b).squaredNorm());
    }
    return best;
}

} // namespace

TEST(Knn, ThreePointsOnALine)
{
    Matrix x(3, 2);
    x << 0, 0, 1, 0, 5, 0;
    const auto nb = build_knn(x, 1);
    EXPECT_EQ(nb(0, 0), 1);
    EXPECT_EQ(nb(1, 0), 0);
    EXPECT_EQ(nb(2, 0), 1);
}

TEST(Knn, DuplicateRowsTieBreakToSmallerIndex)
{
    Matrix x(4, 2);
    x << 3, 3, 0, 0, 0, 0, 3, 3;
    const auto nb = build_knn(x, 1);
    EXPECT_EQ(nb(0, 0), 3);
    EXPECT_EQ(nb(3, 0), 0);
    EXPECT_EQ(nb(1, 0), 2);
    EXPECT_EQ(nb(2, 0), 1);

    Matrix same = Matrix::Ones(4, 3);
    const auto nb2 = build_knn(same, 2);
    EXPECT_EQ(nb2(0, 0), 1);
    EXPECT_EQ(nb2(0, 1), 2);
    EXPECT_EQ(nb2(3, 0), 0);
    EXPECT_EQ(nb2(3, 1), 1);
}

TEST(Knn, FullNeighborhood)
{
    Rng rng(3);
    const Matrix x = testkit::random_matrix(rng, 6, 2);
    const auto nb = build_knn(x, 5);
    for (Index i = 0; i < 6; ++i) {
        std::vector<Index> row(nb.row(i).data(), nb.row(i).data() + 5);
        std::sort(row.begin(), row.end());
        std::vector<Index> expect;
        for (Index j = 0; j < 6; ++j)
            if (j != i) expect.push_back(j);
        EXPECT_EQ(row, expect);
    }
}

TEST(Knn, RejectsBadK)
{
    const Matrix x = Matrix::Random(4, 2);
    EXPECT_THROW(build_knn(x, 4), ConfigError);
    EXPECT_THROW(build_knn(x, 0), ConfigError);
    Matrix bad = x;
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(build_knn(bad, 1), NumericError);
}

TEST(Knn, AgreesWithBruteForceScan)
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        const Index n = 2 + static_cast<Index>(rng.below(199));
        const Index d = 1 + static_cast<Index>(rng.below(8));
        Matrix x = testkit::random_matrix(rng, n, d);
        // Coarse grid values produce plenty of exact distance ties.
        if (seed % 2) x = (x * 2.0).array().round().matrix();
        const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::min<Index>(n - 1, 12))));
        const auto fast = build_knn(x, k);
        const auto ref = brute_force_knn(x, k);
        ASSERT_TRUE(fast == ref) << "seed " << seed;
        for (Index i = 0; i < n; ++i)
            for (Index r = 0; r < k; ++r) EXPECT_NE(fast(i, r), i);
    }
}

TEST(Nnls, ExactSingleNeighbor)
{
    Vector x(2);
    x << 0.3, -1.2;
    const Vector v = solve_weights(x, x.transpose());
    ASSERT_EQ(v.size(), 1);
    EXPECT_NEAR(v(0), 1.0, 1e-14);
}

TEST(Nnls, SymmetricPairSplitsEvenly)
{
    Vector x(2);
    x << 1, 0;
    Matrix nb(2, 2);
    nb << 1, 1, 1, -1;
    const Vector v = solve_weights(x, nb);
    EXPECT_NEAR(v(0), 0.5, 1e-14);
    EXPECT_NEAR(v(1), 0.5, 1e-14);
}

TEST(Nnls, OpposingNeighborIsClippedToZero)
{
    Vector x(2);
    x << 1, 0;
    Matrix nb(1, 2);
    nb << -1, 0;
    const Vector v = solve_weights(x, nb);
    EXPECT_EQ(v(0), 0.0);
}

TEST(Nnls, NonFiniteInputThrows)
{
    Vector x(2);
    x << 1, std::numeric_limits<double>::infinity();
    EXPECT_THROW(solve_weights(x, Matrix::Ones(1, 2)), NumericError);
}

TEST(Nnls, MatchesExhaustiveSupportEnumeration)
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        const Index k = 1 + static_cast<Index>(rng.below(8));
        const Index d = 1 + static_cast<Index>(rng.below(12));
        const Matrix a = testkit::random_matrix(rng, d, k);
        const Vector b = testkit::random_matrix(rng, d, 1);
        const auto res = nnls(a, b);
        EXPECT_TRUE(res.converged);
        EXPECT_GE(res.x.minCoeff(), 0.0);
        EXPECT_LE(nnls_objective(a, b, res.x), enumerated_nnls_optimum(a, b) + 1e-10)
            << "seed " << seed;
    }
}

TEST(Nnls, KktAndActiveSetReproduction)
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed + 1000);
        const Index k = 1 + static_cast<Index>(rng.below(10));
        const Index d = 1 + static_cast<Index>(rng.below(20));
        const Matrix a = testkit::random_matrix(rng, d, k);
        const Vector b = testkit::random_matrix(rng, d, 1);
        const Vector v = nnls(a, b).x;
        EXPECT_LE(nnls_kkt_residual(a, b, v), 1e-8) << "seed " << seed;

        // Unconstrained least squares on the support reproduces the weights.
        std::vector<Index> support;
        for (Index j = 0; j < k; ++j)
            if (v(j) > 0.0) support.push_back(j);
        if (support.empty()) continue;
        Matrix sub(d, static_cast<Index>(support.size()));
        for (std::size_t c = 0; c < support.size(); ++c) sub.col(static_cast<Index>(c)) = a.col(support[c]);
        const Vector z = sub.colPivHouseholderQr().solve(b);
        for (std::size_t c = 0; c < support.size(); ++c)
            EXPECT_NEAR(z(static_cast<Index>(c)), v(support[c]), 1e-8);
    }
}

TEST(Nnls, DuplicateColumnsStayFeasibleAndOptimal)
{
    Matrix a(3, 3);
    a << 1, 1, 0, 2, 2, 1, 0, 0, 1;
    Vector b(3);
    b << 1, 2, 0.5;
    const Vector v = nnls(a, b).x;
    EXPECT_GE(v.minCoeff(), 0.0);
    EXPECT_LE(nnls_kkt_residual(a, b, v), 1e-8);
    EXPECT_NEAR(nnls_objective(a, b, v), enumerated_nnls_optimum(a, b), 1e-12);
}

TEST(NormalizeRows, DirectDivision)
{
    NeighborLists nb(1, 3);
    nb << 1, 2, 3;
    Matrix raw(1, 3);
    raw << 2, 2, 0;
    const auto g = normalize_rows(nb, raw);
    EXPECT_EQ(g.weights(0, 0), 0.5);
    EXPECT_EQ(g.weights(0, 1), 0.5);
    EXPECT_EQ(g.weights(0, 2), 0.0);
}

TEST(NormalizeRows, ZeroRowFallsBackToUniform)
{
    NeighborLists nb(1, 2);
    nb << 1, 2;
    const auto g = normalize_rows(nb, Matrix::Zero(1, 2));
    EXPECT_EQ(g.weights(0, 0), 0.5);
    EXPECT_EQ(g.weights(0, 1), 0.5);
}

TEST(NormalizeRows, NormalizedRowIsUnchanged)
{
    NeighborLists nb(1, 4);
    nb << 1, 2, 3, 4;
    Matrix raw(1, 4);
    raw << 0.25, 0.5, 0.125, 0.125;
    const auto g = normalize_rows(nb, raw);
    EXPECT_TRUE((g.weights.array() == raw.array()).all());
    EXPECT_THROW(normalize_rows(nb, -raw), ValidationError);
}

TEST(WeightGraph, InvariantsOnRandomData)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const Index n = 30, d = 5, k = 6;
        const Matrix x = testkit::random_matrix(rng, n, d);
        const auto g = build_weight_graph(x, {k, seed % 2 == 1});
        const Matrix v = g.to_dense();
        EXPECT_GE(v.minCoeff(), 0.0);
        for (Index i = 0; i < n; ++i) {
            EXPECT_EQ(v(i, i), 0.0);
            EXPECT_NEAR(v.row(i).sum(), 1.0, 1e-12);
            EXPECT_EQ((v.row(i).array() != 0.0).count(), (g.weights.row(i).array() != 0.0).count());
        }
        // The raw solve is never worse than the zero or uniform weights.
        const Matrix xs = seed % 2 ? standardize_columns(x) : x;
        const Matrix raw = reconstruction_weights(xs, g.neighbors);
        for (Index i = 0; i < n; ++i) {
            Matrix a(d, k);
            for (Index r = 0; r < k; ++r) a.col(r) = xs.row(g.neighbors(i, r)).transpose();
            const Vector b = xs.row(i).transpose();
            const double got = nnls_objective(a, b, raw.row(i).transpose());
            EXPECT_LE(got, b.squaredNorm() + 1e-12);
            EXPECT_LE(got, nnls_objective(a, b, Vector::Constant(k, 1.0 / k)) + 1e-12);
        }
    }
}

TEST(WeightGraph, DebugFormat)
{
    WeightGraph g{NeighborLists(2, 1), Matrix::Ones(2, 1)};
    g.neighbors << 1, 0;
    EXPECT_EQ(format_weight_graph(g), "0: 1=1\n1: 0=1\n");
}

TEST(WeightGraph, StandardizeColumns)
{
    Matrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const Matrix z = standardize_columns(x);
    EXPECT_NEAR(z.col(0).sum(), 0.0, 1e-15);
    EXPECT_NEAR(z.col(0).squaredNorm() / 3.0, 1.0, 1e-14);
    EXPECT_TRUE(z.col(1).isZero());
}
