#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace chac {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix.  Column indices are sorted and unique within
/// each row; explicit zeros are allowed.
class SparseMat {
public:
    SparseMat() = default;
    SparseMat(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
              std::vector<std::size_t> col_indices, std::vector<double> values);

    [[nodiscard]] std::size_t n_rows() const noexcept { return n_rows_; }
    [[nodiscard]] std::size_t n_cols() const noexcept { return n_cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }

    [[nodiscard]] const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    [[nodiscard]] const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return values_; }

    /// Position of (row, col) in values(), or npos when structurally zero.
    [[nodiscard]] std::size_t find(std::size_t row, std::size_t col) const;
    /// Entry (row, col); zero when outside the pattern.
    [[nodiscard]] double at(std::size_t row, std::size_t col) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// Duplicates are summed in a fixed order, so the result does not depend on the
/// order of `triplets`.
SparseMat from_triplets(std::size_t n_rows, std::size_t n_cols, std::span<const Triplet> triplets);

std::vector<double> matvec(const SparseMat& a, std::span<const double> x);

/// LU factorization with partial pivoting and a fill-reducing column ordering.
///
/// The symbolic analysis is kept between calls to factorize() as long as the
/// sparsity pattern does not change, which is the common case for Newton
/// iterations on a fixed mesh.
class SparseLU {
public:
    SparseLU();
    ~SparseLU();
    SparseLU(SparseLU&&) noexcept;
    SparseLU& operator=(SparseLU&&) noexcept;
    SparseLU(const SparseLU&) = delete;
    SparseLU& operator=(const SparseLU&) = delete;

    explicit SparseLU(const SparseMat& a) : SparseLU() { factorize(a); }

    /// Throws SingularMatrix when a zero pivot is encountered.
    void factorize(const SparseMat& a);

    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;

    [[nodiscard]] bool factorized() const noexcept;
    [[nodiscard]] std::size_t size() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot factorize-and-solve.
std::vector<double> solve_direct(const SparseMat& a, std::span<const double> b);

}  // namespace chac
