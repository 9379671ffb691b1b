#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wgcm/datamodel.hpp"
#include "wgcm/gaussmax.hpp"
#include "wgcm/regress.hpp"
#include "wgcm/statistic.hpp"
#include "wgcm/weights.hpp"

namespace wgcm {

enum class Method { gcm, wgcm_fix, wgcm_est, mwgcm_fix, mwgcm_est };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

struct PerStatistic {
    StatLabel label;
    double t = 0.0;
    std::string weight_json;
};

struct McInfo {
    int draws = 0;
    double stderr_p = 0.0;
    double jitter_used = 0.0;
};

struct TestResult {
    Method method = Method::gcm;
    double statistic = 0.0;  // T for single-statistic methods, S_n for max methods
    double p_value = 1.0;
    std::optional<double> p_bonferroni;
    std::vector<PerStatistic> per_statistic;
    std::size_t k_total = 0;
    std::size_t n_main = 0;
    std::optional<std::size_t> n_weight_est;
    std::optional<McInfo> mc;
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, double> training_mse;
    std::vector<std::string> warnings;

    std::string to_json_string() const;
};

TestResult gcm_test(const Dataset& ds, const RegressorSpec& reg);

TestResult wgcm_fix_test(const Dataset& ds, const RegressorSpec& reg, int k0, int draws,
                         std::uint64_t seed, unsigned threads = 1);

TestResult wgcm_est_test(const Dataset& ds, const RegressorSpec& reg_xy,
                         const RegressorSpec& reg_h, double fraction, std::uint64_t seed);

TestResult mwgcm_fix_test(const Dataset& ds, const RegressorSpec& reg, int k0, int draws,
                          std::uint64_t seed, unsigned threads = 1);

TestResult mwgcm_est_test(const Dataset& ds, const RegressorSpec& reg_xy,
                          const RegressorSpec& reg_h, double fraction, int draws,
                          std::uint64_t seed, unsigned threads = 1);

// Step-down Holm adjustment, returned in input order.
std::vector<double> holm_adjust(const std::vector<double>& pvals);

// One bundle of method parameters; drives run_test, variable selection and
// the simulation lab.
struct TestConfig {
    Method method = Method::gcm;
    RegressorSpec reg;
    RegressorSpec reg_h;  // second-stage regressor for the estimated weight
    int k0 = 7;
    double fraction = 0.3;
    int draws = 10000;
};

TestResult run_test(const Dataset& ds, const TestConfig& config, std::uint64_t seed,
                    unsigned threads = 1);

// Adapter for the simulation lab: dataset -> p-value.
std::function<double(const Dataset&, std::uint64_t)> make_test_runner(const TestConfig& config);

struct SelectionEntry {
    std::size_t index = 0;
    double statistic = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    bool selected = false;
    bool failed = false;
    std::string warning;
};

struct SelectionResult {
    std::vector<SelectionEntry> per_variable;
    std::vector<std::size_t> selected;
    double alpha = 0.0;
};

// Tests X_j independent of y given the remaining columns, for every j, and
// Holm-adjusts the p-values. A variable whose test fails is reported with
// p = 1 and a warning instead of aborting the sweep.
SelectionResult select_variables(const std::vector<double>& y, const Matrix& x,
                                 const TestConfig& config, double alpha, std::uint64_t seed,
                                 unsigned threads = 1);

}  // namespace wgcm
