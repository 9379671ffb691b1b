#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgcm {

enum class ErrorKind {
    missing_file,
    missing_column,
    parse_error,
    empty_data,
    non_finite,
    degenerate_split,
    index_out_of_range,
    too_few_samples,
    invalid_hyperparameter,
    dimension_mismatch,
    length_mismatch,
    degenerate_residuals,
    empty_input,
    not_decomposable,
    invalid_parameter,
    invalid_p,
    usage_error,
};

const char* error_kind_name(ErrorKind kind);

class WgcmError : public std::runtime_error {
public:
    WgcmError(ErrorKind kind, const std::string& message);
    ErrorKind kind() const { return kind_; }
    const char* kind_name() const { return error_kind_name(kind_); }

private:
    ErrorKind kind_;
};

// Identifies one statistic in the j-major (j, l, k) ordering.
struct StatLabel {
    std::size_t j = 0;
    std::size_t l = 0;
    std::size_t k = 0;

    bool operator==(const StatLabel&) const = default;
};

class DegenerateResidualsError : public WgcmError {
public:
    explicit DegenerateResidualsError(const std::string& message, StatLabel label = {});
    const StatLabel& label() const { return label_; }

private:
    StatLabel label_;
};

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix from_columns(const std::vector<std::vector<double>>& columns);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_.data() + i * cols_, cols_);
    }
    std::vector<double> column(std::size_t j) const;

    const std::vector<double>& data() const { return data_; }
    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Neumaier-compensated accumulator; keeps long sums reproducible to ~1e-12
// at the sizes used here (K ~ 1e3 statistics over n ~ 1e5 rows).
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_mean(std::span<const double> values);
// mean of the elementwise product a[i] * b[i]
double compensated_product_mean(std::span<const double> a, std::span<const double> b);

// Runs fn(0..count-1) on up to `threads` workers. Tasks must be independent;
// the caller owns making the aggregate order-insensitive. The first exception
// thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace wgcm
