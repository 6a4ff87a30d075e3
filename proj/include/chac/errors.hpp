#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace chac {

/// Raised when a caller passes a value outside an operation's precondition.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an index (element, row, column) is out of range.
class IndexOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Raised when two objects that must share a lineage (space, mesh, time grid) do not.
class LineageMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrix : public std::runtime_error {
public:
    SingularMatrix(std::size_t pivot, const std::string& what)
        : std::runtime_error(what), pivot_(pivot) {}

    [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(int iterations, std::vector<double> history, const std::string& what)
        : std::runtime_error(what), iterations_(iterations), history_(std::move(history)) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    int iterations_;
    std::vector<double> history_;
};

/// Wraps a solver failure with the index of the time step (or ladder level) that failed.
class StepFailure : public std::runtime_error {
public:
    StepFailure(std::size_t index, const std::string& what)
        : std::runtime_error(what), index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace chac
