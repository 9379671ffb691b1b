#include "wgcm/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "wgcm/rng.hpp"

namespace wgcm {

Dataset::Dataset(Matrix x, Matrix y, Matrix z,
                 std::vector<std::string> x_names,
                 std::vector<std::string> y_names,
                 std::vector<std::string> z_names)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)),
      x_names_(std::move(x_names)), y_names_(std::move(y_names)), z_names_(std::move(z_names)) {
    if (x_.rows() == 0) {
        throw WgcmError(ErrorKind::empty_data, "dataset has zero rows");
    }
    if (x_.rows() != y_.rows() || x_.rows() != z_.rows()) {
        throw WgcmError(ErrorKind::dimension_mismatch, "x, y, z row counts differ");
    }
    if (x_.cols() == 0 || y_.cols() == 0 || z_.cols() == 0) {
        throw WgcmError(ErrorKind::dimension_mismatch, "all blocks need at least one column");
    }
    if (!x_.all_finite() || !y_.all_finite() || !z_.all_finite()) {
        throw WgcmError(ErrorKind::non_finite, "dataset contains NaN or infinite entries");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t data_row, const std::string& col_name) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        throw WgcmError(ErrorKind::parse_error,
                        "cannot parse cell at row " + std::to_string(data_row) +
                            ", column '" + col_name + "': '" + cell + "'");
    }
    if (!std::isfinite(value)) {
        throw WgcmError(ErrorKind::non_finite,
                        "non-finite cell at row " + std::to_string(data_row) +
                            ", column '" + col_name + "'");
    }
    return value;
}

struct BlockPlan {
    std::vector<std::size_t> file_cols;
    std::vector<std::string> names;
};

BlockPlan resolve_block(const std::vector<std::string>& wanted,
                        const std::unordered_map<std::string, std::size_t>& header_index) {
    BlockPlan plan;
    for (const auto& name : wanted) {
        auto it = header_index.find(name);
        if (it == header_index.end()) {
            throw WgcmError(ErrorKind::missing_column, "column '" + name + "' not in header");
        }
        plan.file_cols.push_back(it->second);
        plan.names.push_back(name);
    }
    return plan;
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnSpec& spec) {
    std::ifstream in(path);
    if (!in) {
        throw WgcmError(ErrorKind::missing_file, "cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw WgcmError(ErrorKind::empty_data, "file '" + path + "' is empty");
    }
    const auto header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> header_index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        header_index.emplace(trim(header[i]), i);
    }
    if (spec.x_cols.empty() || spec.y_cols.empty() || spec.z_cols.empty()) {
        throw WgcmError(ErrorKind::invalid_parameter, "x, y, z column lists must be non-empty");
    }
    const BlockPlan xb = resolve_block(spec.x_cols, header_index);
    const BlockPlan yb = resolve_block(spec.y_cols, header_index);
    const BlockPlan zb = resolve_block(spec.z_cols, header_index);

    std::vector<std::vector<double>> x_cols(xb.file_cols.size());
    std::vector<std::vector<double>> y_cols(yb.file_cols.size());
    std::vector<std::vector<double>> z_cols(zb.file_cols.size());

    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++data_row;
        const auto cells = split_csv_line(line);
        auto read_block = [&](const BlockPlan& plan, std::vector<std::vector<double>>& out) {
            for (std::size_t j = 0; j < plan.file_cols.size(); ++j) {
                const std::size_t c = plan.file_cols[j];
                if (c >= cells.size()) {
                    throw WgcmError(ErrorKind::parse_error,
                                    "row " + std::to_string(data_row) + " has too few cells");
                }
                out[j].push_back(parse_cell(cells[c], data_row, plan.names[j]));
            }
        };
        read_block(xb, x_cols);
        read_block(yb, y_cols);
        read_block(zb, z_cols);
    }
    if (data_row == 0) {
        throw WgcmError(ErrorKind::empty_data, "file '" + path + "' has no data rows");
    }
    return Dataset(Matrix::from_columns(x_cols), Matrix::from_columns(y_cols),
                   Matrix::from_columns(z_cols), xb.names, yb.names, zb.names);
}

SplitPlan split(const Dataset& ds, double fraction, std::uint64_t seed) {
    const std::size_t n = ds.n();
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw WgcmError(ErrorKind::invalid_parameter, "fraction must be in (0, 1)");
    }
    if (n < 2) {
        throw WgcmError(ErrorKind::degenerate_split, "need at least 2 rows to split");
    }
    const std::size_t a_n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
    if (a_n >= n) {
        throw WgcmError(ErrorKind::degenerate_split, "main part would be empty");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);
    SplitPlan plan;
    plan.indices_a.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(a_n));
    plan.indices_main.assign(perm.begin() + static_cast<std::ptrdiff_t>(a_n), perm.end());
    plan.seed = seed;
    plan.fraction = fraction;
    return plan;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
    if (indices.empty()) {
        throw WgcmError(ErrorKind::empty_data, "subset with no rows");
    }
    for (std::size_t idx : indices) {
        if (idx >= ds.n()) {
            throw WgcmError(ErrorKind::index_out_of_range,
                            "row index " + std::to_string(idx) + " out of range");
        }
    }
    auto take = [&](const Matrix& src) {
        Matrix out(indices.size(), src.cols());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            for (std::size_t j = 0; j < src.cols(); ++j) {
                out(i, j) = src(indices[i], j);
            }
        }
        return out;
    };
    return Dataset(take(ds.x()), take(ds.y()), take(ds.z()),
                   ds.x_names(), ds.y_names(), ds.z_names());
}

}  // namespace wgcm
