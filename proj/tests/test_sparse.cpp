#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chac/errors.hpp"
#include "chac/sparse.hpp"

namespace chac {
namespace {

// Dense Gaussian elimination with partial pivoting, used as the reference solver.
std::vector<double> dense_lu_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        }
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<Triplet> random_system(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> col(0, n - 1);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0 + u(rng)});
        for (int k = 0; k < 6; ++k) t.push_back({i, col(rng), u(rng)});
    }
    return t;
}

TEST(SparseMat, FromTripletsSumsDuplicates) {
    const std::vector<Triplet> t = {{0, 0, 1.0}, {1, 2, 2.0}, {0, 0, 3.0}, {1, 0, -1.0}};
    const SparseMat a = from_triplets(2, 3, t);
    EXPECT_EQ(a.nnz(), 3u);
    EXPECT_DOUBLE_EQ(a.at(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(a.at(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(a.at(1, 2), 2.0);
    EXPECT_DOUBLE_EQ(a.at(0, 2), 0.0);
    EXPECT_EQ(a.find(0, 1), SparseMat::npos);
}

TEST(SparseMat, AssemblyIsIndependentOfTripletOrder) {
    std::mt19937_64 rng(3);
    std::vector<Triplet> t = random_system(50, rng);
    const SparseMat a = from_triplets(50, 50, t);
    std::shuffle(t.begin(), t.end(), rng);
    const SparseMat b = from_triplets(50, 50, t);
    EXPECT_EQ(a.row_offsets(), b.row_offsets());
    EXPECT_EQ(a.col_indices(), b.col_indices());
    EXPECT_EQ(a.values(), b.values());
}

TEST(SparseMat, OutOfRangeTripletThrows) {
    const std::vector<Triplet> t = {{2, 0, 1.0}};
    EXPECT_THROW(from_triplets(2, 2, t), IndexOutOfRange);
}

TEST(SparseMat, MatvecDimensionMismatchThrows) {
    const std::vector<Triplet> t = {{0, 0, 1.0}};
    const SparseMat a = from_triplets(2, 2, t);
    const std::vector<double> x(3, 1.0);
    EXPECT_THROW(matvec(a, x), InvalidParameter);
}

TEST(SolveDirect, MatchesDenseEliminationOnRandomSystem) {
    constexpr std::size_t n = 200;
    std::mt19937_64 rng(42);
    const std::vector<Triplet> t = random_system(n, rng);
    const SparseMat a = from_triplets(n, n, t);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (const Triplet& e : t) dense[e.row][e.col] += e.value;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> b(n);
    for (double& v : b) v = u(rng);

    const std::vector<double> x = solve_direct(a, b);
    const std::vector<double> ref = dense_lu_solve(dense, b);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        err = std::max(err, std::abs(x[i] - ref[i]));
        scale = std::max(scale, std::abs(ref[i]));
    }
    EXPECT_LE(err, 1e-10 * scale);

    const std::vector<double> r = matvec(a, x);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r[i], b[i], 1e-11);
}

TEST(SolveDirect, SingularMatrixReportsPivot) {
    const std::vector<Triplet> t = {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 4.0}, {2, 2, 1.0}};
    const SparseMat a = from_triplets(3, 3, t);
    const std::vector<double> b = {1.0, 2.0, 3.0};
    try {
        (void)solve_direct(a, b);
        FAIL() << "expected SingularMatrix";
    } catch (const SingularMatrix& ex) {
        EXPECT_LT(ex.pivot(), 3u);
    }
}

TEST(SolveDirect, StructurallyEmptyRowIsSingular) {
    const std::vector<Triplet> t = {{0, 0, 1.0}, {1, 0, 1.0}};
    const SparseMat a = from_triplets(2, 2, t);
    const std::vector<double> b = {1.0, 1.0};
    EXPECT_THROW((void)solve_direct(a, b), SingularMatrix);
}

TEST(SolveDirect, NonSquareOrWrongRhsThrows) {
    const std::vector<Triplet> t = {{0, 0, 1.0}};
    const std::vector<double> b2 = {1.0, 1.0};
    EXPECT_THROW((void)solve_direct(from_triplets(2, 3, t), b2), InvalidParameter);
    const std::vector<double> b3 = {1.0, 1.0, 1.0};
    EXPECT_THROW((void)solve_direct(from_triplets(2, 2, t), b3), InvalidParameter);
}

TEST(SparseLU, RefactorizationWithSamePatternUsesNewValues) {
    std::mt19937_64 rng(5);
    std::vector<Triplet> t = random_system(60, rng);
    SparseMat a = from_triplets(60, 60, t);
    SparseLU lu(a);
    std::vector<double> b(60, 1.0);
    const std::vector<double> x1 = lu.solve(b);
    for (double& v : a.values()) v *= 2.0;
    lu.factorize(a);
    const std::vector<double> x2 = lu.solve(b);
    for (std::size_t i = 0; i < x1.size(); ++i) EXPECT_NEAR(x2[i], 0.5 * x1[i], 1e-12 * (1.0 + std::abs(x1[i])));
}

}  // namespace
}  // namespace chac
