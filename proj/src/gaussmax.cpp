#include "wgcm/gaussmax.hpp"

#include <algorithm>
#include <cmath>

#include "wgcm/normal.hpp"
#include "wgcm/rng.hpp"

namespace wgcm {

double normal_two_sided_p(double t) {
    if (!std::isfinite(t)) {
        throw WgcmError(ErrorKind::non_finite, "statistic is not finite");
    }
    // 2*(1 - Phi(|t|)) evaluated as erfc to keep the tail accurate
    return std::erfc(std::abs(t) / std::sqrt(2.0));
}

double bonferroni_p(double s, int k) {
    if (!std::isfinite(s)) {
        throw WgcmError(ErrorKind::non_finite, "statistic is not finite");
    }
    if (s < 0.0 || k < 1) {
        throw WgcmError(ErrorKind::invalid_parameter, "bonferroni_p needs s >= 0 and k >= 1");
    }
    return std::min(1.0, static_cast<double>(k) * normal_two_sided_p(s));
}

namespace {

// Plain lower-triangular Cholesky; returns false on a non-positive pivot.
bool try_cholesky(const Matrix& a, double jitter, Matrix& l_out) {
    const std::size_t k = a.rows();
    Matrix l(k, k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j) + (i == j ? jitter : 0.0);
            for (std::size_t t = 0; t < j; ++t) {
                sum -= l(i, t) * l(j, t);
            }
            if (i == j) {
                if (sum <= 0.0) return false;
                l(i, j) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    l_out = std::move(l);
    return true;
}

}  // namespace

MaxGaussianSampler build_sampler(const CorrelationMatrix& sigma_hat, int draws,
                                 std::uint64_t seed, unsigned threads) {
    if (draws < 1) {
        throw WgcmError(ErrorKind::invalid_parameter, "draws must be >= 1");
    }
    const std::size_t k = sigma_hat.size();
    static const double jitter_ladder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

    MaxGaussianSampler sampler;
    bool ok = false;
    for (double jitter : jitter_ladder) {
        if (try_cholesky(sigma_hat.sigma_hat, jitter, sampler.cholesky_)) {
            sampler.jitter_ = jitter;
            ok = true;
            break;
        }
    }
    if (!ok) {
        throw WgcmError(ErrorKind::not_decomposable,
                        "correlation matrix not decomposable at jitter 1e-6; "
                        "check for duplicate weight functions");
    }
    sampler.draws_ = draws;
    sampler.seed_ = seed;
    sampler.sorted_samples_.resize(static_cast<std::size_t>(draws));

    const Matrix& l = sampler.cholesky_;
    auto draw_one = [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::vector<double> g(k);
        for (std::size_t i = 0; i < k; ++i) g[i] = rng.normal();
        double best = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j <= i; ++j) {
                v += l(i, j) * g[j];
            }
            best = std::max(best, std::abs(v));
        }
        sampler.sorted_samples_[b] = best;
    };
    parallel_for(static_cast<std::size_t>(draws), threads, draw_one);
    std::sort(sampler.sorted_samples_.begin(), sampler.sorted_samples_.end());
    return sampler;
}

GaussianMaxP gaussian_max_p(const MaxGaussianSampler& sampler, double s) {
    if (!std::isfinite(s)) {
        throw WgcmError(ErrorKind::non_finite, "statistic is not finite");
    }
    const auto& samples = sampler.sorted_max_samples();
    const auto first = std::lower_bound(samples.begin(), samples.end(), s);
    const std::size_t count = static_cast<std::size_t>(samples.end() - first);
    const double b = static_cast<double>(samples.size());
    GaussianMaxP out;
    out.p_hat = (1.0 + static_cast<double>(count)) / (b + 1.0);
    out.mc_stderr = std::sqrt(out.p_hat * (1.0 - out.p_hat) / b);
    return out;
}

double gaussian_max_quantile(const MaxGaussianSampler& sampler, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw WgcmError(ErrorKind::invalid_parameter, "alpha must be in (0, 1)");
    }
    const auto& samples = sampler.sorted_max_samples();
    const double b = static_cast<double>(samples.size());
    // floor+1 rather than ceil so that integer alpha*b resolves upward; any
    // alpha >= (b-1)/b then returns the sample maximum
    std::size_t idx1 = static_cast<std::size_t>(std::floor(alpha * b)) + 1;
    idx1 = std::min(std::max<std::size_t>(idx1, 1), samples.size());
    return samples[idx1 - 1];
}

}  // namespace wgcm
