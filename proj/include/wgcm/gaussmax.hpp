#pragma once

#include <cstdint>
#include <vector>

#include "wgcm/statistic.hpp"

namespace wgcm {

// Two-sided tail 2*(1 - Phi(|t|)).
double normal_two_sided_p(double t);

// min(1, k * 2*(1 - Phi(s))) for s >= 0.
double bonferroni_p(double s, int k);

// Monte-Carlo sampler for S = max_k |T_k| with T ~ N(0, Sigma). The draw set
// is generated eagerly from per-draw substreams, so p-values and quantiles
// from one sampler share the same sample and are independent of threading.
class MaxGaussianSampler {
public:
    const Matrix& cholesky_factor() const { return cholesky_; }
    double jitter_used() const { return jitter_; }
    int draws() const { return draws_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& sorted_max_samples() const { return sorted_samples_; }

private:
    friend MaxGaussianSampler build_sampler(const CorrelationMatrix&, int, std::uint64_t,
                                            unsigned);
    Matrix cholesky_;
    double jitter_ = 0.0;
    int draws_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> sorted_samples_;
};

// Cholesky of Sigma + jitter*I, escalating jitter through
// {0, 1e-10, 1e-9, ..., 1e-6} until the factorization succeeds.
MaxGaussianSampler build_sampler(const CorrelationMatrix& sigma_hat, int draws,
                                 std::uint64_t seed, unsigned threads = 1);

struct GaussianMaxP {
    double p_hat = 0.0;
    double mc_stderr = 0.0;
};

// Add-one estimator (1 + #{S_b >= s}) / (B + 1); never returns 0.
GaussianMaxP gaussian_max_p(const MaxGaussianSampler& sampler, double s);

// Empirical alpha-quantile of the drawn S sample (order statistic at
// ceil(alpha * B)).
double gaussian_max_quantile(const MaxGaussianSampler& sampler, double alpha);

}  // namespace wgcm
