#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wgcm/datamodel.hpp"

namespace wgcm {

enum class SimFamily { motivating, s1d, s10d_add, s10d_nonadd, example74 };

const char* sim_family_name(SimFamily family);
SimFamily sim_family_from_name(const std::string& name);

// Parameters of one synthetic data-generating process. `alternative` adds
// h_{c1,c2}(X) to Y on top of the base process.
struct SimSetting {
    SimFamily family = SimFamily::s1d;
    double lambda = 0.5;               // motivating
    double b1 = 0.0;                   // s1d / s10d families
    double b2 = 0.0;
    std::optional<std::pair<double, double>> alternative;  // (c1, c2)
    std::size_t d = 50;                // example74 predictor count
    std::size_t n = 100;
    std::uint64_t seed = 0;
};

// lambda*x + 0.5*(1-lambda)*x^2
double h_lambda(double x, double lam);

// (1-b2)*h2(t,b1) - b2*h1(t,b1,b2) with
//   h1(t,b1,b2) = (b1*cos(3*b2*t) + (1-b1)*sin(3*b2*t)) * exp(-t^2/2)
//   h2(t,b1)    = 0.3*(b1*|t| + (1-b1)*t)
double h_b(double t, double b1, double b2);

Dataset generate(const SimSetting& setting);

struct ReplicateOutcome {
    std::size_t replicate = 0;
    std::uint64_t dataset_seed = 0;
    double p = 1.0;
    bool reject = false;
    bool failed = false;
    std::string error;
};

struct RejectionRateResult {
    double rate = 0.0;
    std::size_t reject_count = 0;
    std::size_t n_failed = 0;
    std::vector<ReplicateOutcome> per_replicate;
};

// runner(ds, test_seed) -> p-value. Failed replicates (WgcmError from the
// runner) are recorded and excluded from the denominator.
using TestRunner = std::function<double(const Dataset&, std::uint64_t)>;

RejectionRateResult rejection_rate(const SimSetting& setting_template, const TestRunner& runner,
                                   double alpha, std::size_t replicates, std::uint64_t base_seed,
                                   unsigned threads = 1);

}  // namespace wgcm
