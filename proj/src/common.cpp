#include "wgcm/common.hpp"

#include <atomic>
#include <thread>

namespace wgcm {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::missing_file: return "MissingFile";
        case ErrorKind::missing_column: return "MissingColumn";
        case ErrorKind::parse_error: return "ParseError";
        case ErrorKind::empty_data: return "EmptyData";
        case ErrorKind::non_finite: return "NonFinite";
        case ErrorKind::degenerate_split: return "DegenerateSplit";
        case ErrorKind::index_out_of_range: return "IndexOutOfRange";
        case ErrorKind::too_few_samples: return "TooFewSamples";
        case ErrorKind::invalid_hyperparameter: return "InvalidHyperparameter";
        case ErrorKind::dimension_mismatch: return "DimensionMismatch";
        case ErrorKind::length_mismatch: return "LengthMismatch";
        case ErrorKind::degenerate_residuals: return "DegenerateResiduals";
        case ErrorKind::empty_input: return "EmptyInput";
        case ErrorKind::not_decomposable: return "NotDecomposable";
        case ErrorKind::invalid_parameter: return "InvalidParameter";
        case ErrorKind::invalid_p: return "InvalidP";
        case ErrorKind::usage_error: return "UsageError";
    }
    return "Unknown";
}

WgcmError::WgcmError(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

DegenerateResidualsError::DegenerateResidualsError(const std::string& message, StatLabel label)
    : WgcmError(ErrorKind::degenerate_residuals, message), label_(label) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) {
        return Matrix();
    }
    const std::size_t n = columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != n) {
            throw WgcmError(ErrorKind::length_mismatch, "columns differ in length");
        }
    }
    Matrix m(n, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            m(i, j) = columns[j][i];
        }
    }
    return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        out[i] = (*this)(i, j);
    }
    return out;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double compensated_mean(std::span<const double> values) {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return values.empty() ? 0.0 : s.value() / static_cast<double>(values.size());
}

double compensated_product_mean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw WgcmError(ErrorKind::length_mismatch, "product mean over unequal lengths");
    }
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return a.empty() ? 0.0 : s.value() / static_cast<double>(a.size());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(threads, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        first_error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wgcm
