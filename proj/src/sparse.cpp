#include "chac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

#include <suitesparse/umfpack.h>

#include "chac/errors.hpp"

namespace chac {

SparseMat::SparseMat(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
        throw InvalidParameter("SparseMat: inconsistent CSR arrays");
    }
    for (std::size_t r = 0; r < n_rows_; ++r) {
        if (row_offsets_[r] > row_offsets_[r + 1]) {
            throw InvalidParameter("SparseMat: row offsets not monotone");
        }
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            if (col_indices_[k] >= n_cols_) {
                throw IndexOutOfRange("SparseMat: column index out of range");
            }
            if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1]) {
                throw InvalidParameter("SparseMat: column indices must be sorted and unique");
            }
        }
    }
}

std::size_t SparseMat::find(std::size_t row, std::size_t col) const {
    if (row >= n_rows_ || col >= n_cols_) {
        throw IndexOutOfRange("SparseMat::find: (" + std::to_string(row) + ", " + std::to_string(col) +
                              ") out of range");
    }
    const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row]);
    const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row + 1]);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) {
        return npos;
    }
    return static_cast<std::size_t>(it - col_indices_.begin());
}

double SparseMat::at(std::size_t row, std::size_t col) const {
    const std::size_t k = find(row, col);
    return k == npos ? 0.0 : values_[k];
}

SparseMat from_triplets(std::size_t n_rows, std::size_t n_cols, std::span<const Triplet> triplets) {
    for (const Triplet& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw IndexOutOfRange("from_triplets: entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                                  std::to_string(n_cols));
        }
    }
    // Sorting by (row, col, value) makes the summation order, and hence the
    // rounding, independent of the input order.
    std::vector<Triplet> sorted(triplets.begin(), triplets.end());
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return a.value < b.value;
    });

    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(sorted.size());
    vals.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size();) {
        const std::size_t r = sorted[k].row;
        const std::size_t c = sorted[k].col;
        double sum = 0.0;
        for (; k < sorted.size() && sorted[k].row == r && sorted[k].col == c; ++k) {
            sum += sorted[k].value;
        }
        cols.push_back(c);
        vals.push_back(sum);
        ++offsets[r + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return SparseMat(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

std::vector<double> matvec(const SparseMat& a, std::span<const double> x) {
    if (x.size() != a.n_cols()) {
        throw InvalidParameter("matvec: dimension mismatch (" + std::to_string(a.n_cols()) + " columns, vector of " +
                               std::to_string(x.size()) + ")");
    }
    const auto& off = a.row_offsets();
    const auto& col = a.col_indices();
    const auto& val = a.values();
    std::vector<double> y(a.n_rows(), 0.0);
    for (std::size_t r = 0; r < a.n_rows(); ++r) {
        double s = 0.0;
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
            s += val[k] * x[col[k]];
        }
        y[r] = s;
    }
    return y;
}

// UMFPACK works on compressed columns; the CSR arrays of A are the CSC arrays of
// A^T, so we factor A^T and solve with the transposed system.
struct SparseLU::Impl {
    int n = 0;
    std::vector<int> ap;
    std::vector<int> ai;
    std::vector<double> ax;
    void* symbolic = nullptr;
    void* numeric = nullptr;
    double control[UMFPACK_CONTROL];

    Impl() {
        umfpack_di_defaults(control);
        // nested dissection: markedly less fill than AMD/COLAMD on the 2D FE stencils
        control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
    }
    ~Impl() { release(); }

    void release_numeric() {
        if (numeric != nullptr) {
            umfpack_di_free_numeric(&numeric);
            numeric = nullptr;
        }
    }
    void release() {
        release_numeric();
        if (symbolic != nullptr) {
            umfpack_di_free_symbolic(&symbolic);
            symbolic = nullptr;
        }
    }
};

SparseLU::SparseLU() : impl_(std::make_unique<Impl>()) {}
SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

bool SparseLU::factorized() const noexcept { return impl_ && impl_->numeric != nullptr; }
std::size_t SparseLU::size() const noexcept { return impl_ ? static_cast<std::size_t>(impl_->n) : 0; }

void SparseLU::factorize(const SparseMat& a) {
    if (a.n_rows() != a.n_cols()) {
        throw InvalidParameter("SparseLU: matrix must be square");
    }
    if (a.nnz() > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
        throw InvalidParameter("SparseLU: matrix too large for 32-bit indices");
    }
    Impl& m = *impl_;
    const int n = static_cast<int>(a.n_rows());
    std::vector<int> ap(a.row_offsets().begin(), a.row_offsets().end());
    std::vector<int> ai(a.col_indices().begin(), a.col_indices().end());
    const bool same_pattern = m.symbolic != nullptr && n == m.n && ap == m.ap && ai == m.ai;
    m.release_numeric();
    if (!same_pattern) {
        m.release();
        m.n = n;
        m.ap = std::move(ap);
        m.ai = std::move(ai);
    }
    m.ax = a.values();
    if (n == 0) {
        return;
    }

    double info[UMFPACK_INFO];
    if (!same_pattern) {
        // the fill-reducing ordering draws from a process-wide random state
        static std::mutex ordering_mutex;
        const std::lock_guard<std::mutex> lock(ordering_mutex);
        const int status =
            umfpack_di_symbolic(n, n, m.ap.data(), m.ai.data(), m.ax.data(), &m.symbolic, m.control, info);
        if (status != UMFPACK_OK) {
            m.release();
            throw SingularMatrix(0, "SparseLU: symbolic analysis failed (UMFPACK status " +
                                        std::to_string(status) + ")");
        }
    }
    const int status =
        umfpack_di_numeric(m.ap.data(), m.ai.data(), m.ax.data(), m.symbolic, &m.numeric, m.control, info);
    if (status == UMFPACK_WARNING_singular_matrix) {
        std::vector<double> diag(static_cast<std::size_t>(n));
        umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                               diag.data(), nullptr, nullptr, m.numeric);
        std::size_t pivot = 0;
        while (pivot < diag.size() && diag[pivot] != 0.0) {
            ++pivot;
        }
        m.release_numeric();
        throw SingularMatrix(pivot, "SparseLU: matrix is singular (zero pivot at elimination step " +
                                        std::to_string(pivot) + ")");
    }
    if (status != UMFPACK_OK) {
        m.release_numeric();
        throw SingularMatrix(0, "SparseLU: numeric factorization failed (UMFPACK status " +
                                    std::to_string(status) + ")");
    }
}

std::vector<double> SparseLU::solve(std::span<const double> b) const {
    const Impl& m = *impl_;
    if (b.size() != static_cast<std::size_t>(m.n)) {
        throw InvalidParameter("SparseLU::solve: right-hand side has wrong length");
    }
    std::vector<double> x(b.size(), 0.0);
    if (m.n == 0) {
        return x;
    }
    if (m.numeric == nullptr) {
        throw InvalidParameter("SparseLU::solve: no factorization available");
    }
    double info[UMFPACK_INFO];
    const int status = umfpack_di_solve(UMFPACK_Aat, m.ap.data(), m.ai.data(), m.ax.data(), x.data(), b.data(),
                                        m.numeric, m.control, info);
    if (status != UMFPACK_OK) {
        throw SingularMatrix(0, "SparseLU::solve: UMFPACK status " + std::to_string(status));
    }
    return x;
}

std::vector<double> solve_direct(const SparseMat& a, std::span<const double> b) {
    if (a.n_rows() != a.n_cols()) {
        throw InvalidParameter("solve_direct: matrix must be square");
    }
    if (b.size() != a.n_rows()) {
        throw InvalidParameter("solve_direct: right-hand side has wrong length");
    }
    const SparseLU lu(a);
    return lu.solve(b);
}

}  // namespace chac
