#include "wgcm/statistic.hpp"

#include <cmath>
#include <string>

namespace wgcm {

ResidualProducts residual_products(const std::vector<double>& eps, const std::vector<double>& xi,
                                   const std::vector<double>& w_values, StatLabel label) {
    if (eps.size() != xi.size() || eps.size() != w_values.size()) {
        throw WgcmError(ErrorKind::length_mismatch, "residual product inputs differ in length");
    }
    if (eps.size() < 2) {
        throw WgcmError(ErrorKind::too_few_samples, "residual products need n >= 2");
    }
    ResidualProducts rp;
    rp.label = label;
    rp.r.resize(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        rp.r[i] = eps[i] * xi[i] * w_values[i];
    }
    return rp;
}

namespace {

std::string label_text(const StatLabel& label) {
    return "(j=" + std::to_string(label.j) + ", l=" + std::to_string(label.l) +
           ", k=" + std::to_string(label.k) + ")";
}

struct Moments {
    double mean = 0.0;
    double mean_sq = 0.0;
    double variance = 0.0;
    double tau_d = 0.0;
};

Moments moments_checked(const ResidualProducts& rp) {
    Moments m;
    m.mean = compensated_mean(rp.r);
    m.mean_sq = compensated_product_mean(rp.r, rp.r);
    m.variance = m.mean_sq - m.mean * m.mean;
    if (!(m.variance > kVarianceFloor * m.mean_sq)) {
        throw DegenerateResidualsError(
            "residual products " + label_text(rp.label) + " have (near-)zero variance",
            rp.label);
    }
    m.tau_d = std::sqrt(m.variance);
    return m;
}

}  // namespace

TestStatistic t_statistic(const ResidualProducts& rp) {
    if (rp.r.size() < 2) {
        throw WgcmError(ErrorKind::too_few_samples, "t statistic needs n >= 2");
    }
    const Moments m = moments_checked(rp);
    TestStatistic ts;
    ts.label = rp.label;
    ts.tau_n = m.mean * std::sqrt(static_cast<double>(rp.r.size()));
    ts.tau_d = m.tau_d;
    ts.t = ts.tau_n / ts.tau_d;
    return ts;
}

StatisticBundle statistic_vector(const Matrix& eps, const Matrix& xi,
                                 const std::vector<std::vector<const WeightGrid*>>& grids,
                                 const Matrix& z) {
    const std::size_t n = eps.rows();
    if (xi.rows() != n || z.rows() != n) {
        throw WgcmError(ErrorKind::dimension_mismatch, "eps, xi, z row counts differ");
    }
    if (grids.size() != eps.cols()) {
        throw WgcmError(ErrorKind::dimension_mismatch, "grid rows must match eps columns");
    }
    StatisticBundle bundle;
    for (std::size_t j = 0; j < eps.cols(); ++j) {
        if (grids[j].size() != xi.cols()) {
            throw WgcmError(ErrorKind::dimension_mismatch, "grid cols must match xi columns");
        }
        for (std::size_t l = 0; l < xi.cols(); ++l) {
            const WeightGrid& grid = *grids[j][l];
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const std::vector<double> w = grid.functions[k].evaluate_all(z);
                ResidualProducts rp;
                rp.label = StatLabel{j, l, k};
                rp.r.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    rp.r[i] = eps(i, j) * xi(i, l) * w[i];
                }
                bundle.stats.push_back(t_statistic(rp));
                bundle.products.push_back(std::move(rp));
            }
        }
    }
    if (bundle.stats.empty()) {
        throw WgcmError(ErrorKind::empty_input, "no statistics requested");
    }
    return bundle;
}

CorrelationMatrix CorrelationMatrix::checked(Matrix sigma, std::vector<StatLabel> labels) {
    const std::size_t k = sigma.rows();
    if (k == 0 || sigma.cols() != k) {
        throw WgcmError(ErrorKind::invalid_parameter, "correlation matrix must be square");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (std::abs(sigma(i, i) - 1.0) > 1e-12) {
            throw WgcmError(ErrorKind::invalid_parameter, "correlation diagonal must be 1");
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12) {
                throw WgcmError(ErrorKind::invalid_parameter, "correlation matrix not symmetric");
            }
            if (sigma(i, j) < -1.0 - 1e-9 || sigma(i, j) > 1.0 + 1e-9) {
                throw WgcmError(ErrorKind::invalid_parameter, "correlation entry outside [-1, 1]");
            }
        }
    }
    CorrelationMatrix out;
    out.sigma_hat = std::move(sigma);
    out.labels = std::move(labels);
    if (out.labels.empty()) {
        out.labels.resize(k);
    }
    return out;
}

CorrelationMatrix correlation_matrix(const std::vector<ResidualProducts>& rps) {
    if (rps.empty()) {
        throw WgcmError(ErrorKind::empty_input, "correlation over no residual vectors");
    }
    const std::size_t k = rps.size();
    const std::size_t n = rps.front().r.size();
    std::vector<Moments> m(k);
    std::vector<StatLabel> labels(k);
    for (std::size_t a = 0; a < k; ++a) {
        if (rps[a].r.size() != n) {
            throw WgcmError(ErrorKind::length_mismatch, "residual vectors differ in length");
        }
        m[a] = moments_checked(rps[a]);
        labels[a] = rps[a].label;
    }
    Matrix sigma(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        sigma(a, a) = m[a].variance / (m[a].tau_d * m[a].tau_d);
        for (std::size_t b = a + 1; b < k; ++b) {
            const double cross = compensated_product_mean(rps[a].r, rps[b].r);
            const double value = (cross - m[a].mean * m[b].mean) / (m[a].tau_d * m[b].tau_d);
            sigma(a, b) = value;
            sigma(b, a) = value;
        }
    }
    return CorrelationMatrix::checked(std::move(sigma), std::move(labels));
}

double max_abs_statistic(const std::vector<TestStatistic>& ts) {
    if (ts.empty()) {
        throw WgcmError(ErrorKind::empty_input, "max over empty statistic list");
    }
    double best = 0.0;
    for (const auto& s : ts) {
        best = std::max(best, std::abs(s.t));
    }
    return best;
}

}  // namespace wgcm
