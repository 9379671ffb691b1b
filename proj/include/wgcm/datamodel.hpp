#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgcm/common.hpp"

namespace wgcm {

// Immutable n-row table of X (n x dX), Y (n x dY), Z (n x dZ).
// All blocks share the row count; non-finite entries are rejected.
class Dataset {
public:
    Dataset(Matrix x, Matrix y, Matrix z,
            std::vector<std::string> x_names = {},
            std::vector<std::string> y_names = {},
            std::vector<std::string> z_names = {});

    std::size_t n() const { return x_.rows(); }
    std::size_t dx() const { return x_.cols(); }
    std::size_t dy() const { return y_.cols(); }
    std::size_t dz() const { return z_.cols(); }

    const Matrix& x() const { return x_; }
    const Matrix& y() const { return y_; }
    const Matrix& z() const { return z_; }

    const std::vector<std::string>& x_names() const { return x_names_; }
    const std::vector<std::string>& y_names() const { return y_names_; }
    const std::vector<std::string>& z_names() const { return z_names_; }

private:
    Matrix x_;
    Matrix y_;
    Matrix z_;
    std::vector<std::string> x_names_;
    std::vector<std::string> y_names_;
    std::vector<std::string> z_names_;
};

// Seeded two-way row partition. Index order inside each part keeps the
// shuffled order produced by the seed.
struct SplitPlan {
    std::vector<std::size_t> indices_a;
    std::vector<std::size_t> indices_main;
    std::uint64_t seed = 0;
    double fraction = 0.0;
};

struct ColumnSpec {
    std::vector<std::string> x_cols;
    std::vector<std::string> y_cols;
    std::vector<std::string> z_cols;
};

// Comma-separated, UTF-8, one header row, '.' decimals, scientific
// notation accepted. Missing or unparseable cells are hard errors.
Dataset load_csv(const std::string& path, const ColumnSpec& spec);

// a_n = max(1, floor(fraction * n)); deterministic for equal (n, fraction, seed).
SplitPlan split(const Dataset& ds, double fraction, std::uint64_t seed);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace wgcm
