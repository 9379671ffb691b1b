#pragma once

#include <vector>

#include "wgcm/common.hpp"
#include "wgcm/weights.hpp"

namespace wgcm {

// Per-observation weighted residual products R_i = eps_i * xi_i * w(z_i).
struct ResidualProducts {
    std::vector<double> r;
    StatLabel label;
};

// T = tau_n / tau_d with tau_n = sum(R) / sqrt(n) and tau_d the plug-in
// standard deviation sqrt(mean(R^2) - mean(R)^2).
struct TestStatistic {
    double t = 0.0;
    double tau_n = 0.0;
    double tau_d = 0.0;
    StatLabel label;
};

// Estimated correlation matrix of the statistic vector; symmetric with unit
// diagonal up to rounding.
struct CorrelationMatrix {
    Matrix sigma_hat;
    std::vector<StatLabel> labels;

    std::size_t size() const { return sigma_hat.rows(); }
    // Validates symmetry (1e-12), unit diagonal (1e-12) and the entry range.
    static CorrelationMatrix checked(Matrix sigma, std::vector<StatLabel> labels = {});
};

ResidualProducts residual_products(const std::vector<double>& eps, const std::vector<double>& xi,
                                   const std::vector<double>& w_values, StatLabel label = {});

TestStatistic t_statistic(const ResidualProducts& rp);

// Relative variance floor below which residual products are degenerate.
inline constexpr double kVarianceFloor = 1e-14;

struct StatisticBundle {
    std::vector<TestStatistic> stats;
    std::vector<ResidualProducts> products;
};

// All statistics T_{jlk} in j-major (j, then l, then k) order. grids[j][l]
// supplies the weight functions for the (X_j, Y_l) pair.
StatisticBundle statistic_vector(const Matrix& eps, const Matrix& xi,
                                 const std::vector<std::vector<const WeightGrid*>>& grids,
                                 const Matrix& z);

CorrelationMatrix correlation_matrix(const std::vector<ResidualProducts>& rps);

double max_abs_statistic(const std::vector<TestStatistic>& ts);

}  // namespace wgcm
