#include "wgcm/citests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "wgcm/normal.hpp"
#include "wgcm/rng.hpp"

namespace wgcm {

const char* method_name(Method method) {
    switch (method) {
        case Method::gcm: return "gcm";
        case Method::wgcm_fix: return "wgcm_fix";
        case Method::wgcm_est: return "wgcm_est";
        case Method::mwgcm_fix: return "mwgcm_fix";
        case Method::mwgcm_est: return "mwgcm_est";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "gcm") return Method::gcm;
    if (name == "wgcm_fix" || name == "wgcm-fix") return Method::wgcm_fix;
    if (name == "wgcm_est" || name == "wgcm-est") return Method::wgcm_est;
    if (name == "mwgcm_fix" || name == "mwgcm-fix") return Method::mwgcm_fix;
    if (name == "mwgcm_est" || name == "mwgcm-est") return Method::mwgcm_est;
    throw WgcmError(ErrorKind::invalid_parameter, "unknown method '" + name + "'");
}

namespace {

// Residuals of every column of `targets` regressed on z. Column j is fitted
// with the labeled substream derive(derive(seed, role), j).
Matrix residual_matrix(const Matrix& targets, const Matrix& z, const RegressorSpec& reg,
                       std::uint64_t seed, const char* role, const char* mse_prefix,
                       std::map<std::string, double>& training_mse) {
    Matrix out(targets.rows(), targets.cols());
    for (std::size_t j = 0; j < targets.cols(); ++j) {
        RegressorSpec spec_j = reg;
        spec_j.seed = derive_seed(derive_seed(seed, role), j);
        const std::vector<double> target = targets.column(j);
        const FittedModel model = fit(spec_j, z, target);
        const std::vector<double> res = residuals(model, z, target);
        for (std::size_t i = 0; i < out.rows(); ++i) {
            out(i, j) = res[i];
        }
        training_mse[std::string(mse_prefix) + "." + std::to_string(j)] = model.training_mse();
    }
    return out;
}

std::vector<PerStatistic> collect_per_statistic(
    const StatisticBundle& bundle, const std::vector<std::vector<const WeightGrid*>>& grids) {
    std::vector<PerStatistic> out;
    out.reserve(bundle.stats.size());
    for (const auto& st : bundle.stats) {
        PerStatistic ps;
        ps.label = st.label;
        ps.t = st.t;
        ps.weight_json = grids[st.label.j][st.label.l]->functions[st.label.k].to_json_string();
        out.push_back(std::move(ps));
    }
    return out;
}

TestResult fix_test_core(const Dataset& ds, const RegressorSpec& reg, int k0, int draws,
                         std::uint64_t seed, unsigned threads, Method method_id) {
    if (ds.n() < static_cast<std::size_t>(k0) + 2) {
        throw WgcmError(ErrorKind::too_few_samples, "need n >= k0 + 2");
    }
    TestResult result;
    result.method = method_id;
    result.n_main = ds.n();
    result.seeds["user"] = seed;
    result.seeds["mc"] = derive_seed(seed, "mc");

    const WeightGrid grid = quantile_sign_grid(ds.z(), k0);
    const Matrix eps =
        residual_matrix(ds.x(), ds.z(), reg, seed, "reg.f", "f", result.training_mse);
    const Matrix xi =
        residual_matrix(ds.y(), ds.z(), reg, seed, "reg.g", "g", result.training_mse);

    std::vector<std::vector<const WeightGrid*>> grids(
        ds.dx(), std::vector<const WeightGrid*>(ds.dy(), &grid));
    const StatisticBundle bundle = statistic_vector(eps, xi, grids, ds.z());

    result.k_total = bundle.stats.size();
    result.statistic = max_abs_statistic(bundle.stats);
    result.per_statistic = collect_per_statistic(bundle, grids);

    const CorrelationMatrix sigma = correlation_matrix(bundle.products);
    const MaxGaussianSampler sampler = build_sampler(sigma, draws, result.seeds["mc"], threads);
    const GaussianMaxP p = gaussian_max_p(sampler, result.statistic);
    result.p_value = p.p_hat;
    result.p_bonferroni = bonferroni_p(result.statistic, static_cast<int>(result.k_total));
    result.mc = McInfo{draws, p.mc_stderr, sampler.jitter_used()};
    return result;
}

// Shared weight-estimation step: one split, one estimated sign weight per
// (j, l) pair, statistics on the main part.
struct EstParts {
    Dataset ds_a;
    Dataset ds_main;
    std::size_t a_n = 0;
};

EstParts split_for_estimation(const Dataset& ds, double fraction, std::uint64_t seed) {
    const SplitPlan plan = split(ds, fraction, derive_seed(seed, "split"));
    EstParts parts{subset(ds, plan.indices_a), subset(ds, plan.indices_main),
                   plan.indices_a.size()};
    if (parts.ds_a.n() < kMinWeightTrainingSize) {
        throw WgcmError(ErrorKind::too_few_samples,
                        "weight-estimation part has fewer than " +
                            std::to_string(kMinWeightTrainingSize) + " rows");
    }
    if (parts.ds_main.n() < 4) {
        throw WgcmError(ErrorKind::too_few_samples, "main part has fewer than 4 rows");
    }
    return parts;
}

TestResult est_test_core(const Dataset& ds, const RegressorSpec& reg_xy,
                         const RegressorSpec& reg_h, double fraction, int draws,
                         std::uint64_t seed, unsigned threads, Method method_id) {
    TestResult result;
    result.method = method_id;
    result.seeds["user"] = seed;
    result.seeds["split"] = derive_seed(seed, "split");

    EstParts parts = split_for_estimation(ds, fraction, seed);
    result.n_weight_est = parts.a_n;
    result.n_main = parts.ds_main.n();

    // one estimated weight per (j, l), fitted on the auxiliary part
    std::vector<std::vector<WeightGrid>> grids_store(ds.dx(), std::vector<WeightGrid>(ds.dy()));
    for (std::size_t j = 0; j < ds.dx(); ++j) {
        for (std::size_t l = 0; l < ds.dy(); ++l) {
            RegressorSpec spec_xy_jl = reg_xy;
            spec_xy_jl.seed = derive_seed(derive_seed(derive_seed(seed, "est.xy"), j), l);
            RegressorSpec spec_h_jl = reg_h;
            spec_h_jl.seed = derive_seed(derive_seed(derive_seed(seed, "est.h"), j), l);
            WeightFunction w = estimate_sign_weight_columns(
                parts.ds_a.z(), parts.ds_a.x().column(j), parts.ds_a.y().column(l),
                spec_xy_jl, spec_h_jl);
            grids_store[j][l].k0 = 0;
            grids_store[j][l].functions.push_back(std::move(w));
        }
    }
    std::vector<std::vector<const WeightGrid*>> grids(ds.dx(),
                                                      std::vector<const WeightGrid*>(ds.dy()));
    for (std::size_t j = 0; j < ds.dx(); ++j) {
        for (std::size_t l = 0; l < ds.dy(); ++l) {
            grids[j][l] = &grids_store[j][l];
        }
    }

    const Matrix eps = residual_matrix(parts.ds_main.x(), parts.ds_main.z(), reg_xy, seed,
                                       "reg.f", "f", result.training_mse);
    const Matrix xi = residual_matrix(parts.ds_main.y(), parts.ds_main.z(), reg_xy, seed,
                                      "reg.g", "g", result.training_mse);
    const StatisticBundle bundle = statistic_vector(eps, xi, grids, parts.ds_main.z());
    result.k_total = bundle.stats.size();
    result.per_statistic = collect_per_statistic(bundle, grids);

    if (method_id == Method::wgcm_est) {
        result.statistic = bundle.stats.front().t;
        result.p_value = normal_two_sided_p(result.statistic);
    } else {
        result.statistic = max_abs_statistic(bundle.stats);
        result.seeds["mc"] = derive_seed(seed, "mc");
        const CorrelationMatrix sigma = correlation_matrix(bundle.products);
        const MaxGaussianSampler sampler =
            build_sampler(sigma, draws, result.seeds["mc"], threads);
        const GaussianMaxP p = gaussian_max_p(sampler, result.statistic);
        result.p_value = p.p_hat;
        result.p_bonferroni = bonferroni_p(result.statistic, static_cast<int>(result.k_total));
        result.mc = McInfo{draws, p.mc_stderr, sampler.jitter_used()};
    }
    return result;
}

void require_univariate(const Dataset& ds, const char* what) {
    if (ds.dx() != 1 || ds.dy() != 1) {
        throw WgcmError(ErrorKind::dimension_mismatch,
                        std::string(what) + " expects univariate X and Y");
    }
}

}  // namespace

TestResult gcm_test(const Dataset& ds, const RegressorSpec& reg) {
    require_univariate(ds, "gcm_test");
    if (ds.n() < 4) {
        throw WgcmError(ErrorKind::too_few_samples, "gcm_test needs n >= 4");
    }
    TestResult result;
    result.method = Method::gcm;
    result.n_main = ds.n();
    result.seeds["user"] = reg.seed;

    const Matrix eps =
        residual_matrix(ds.x(), ds.z(), reg, reg.seed, "reg.f", "f", result.training_mse);
    const Matrix xi =
        residual_matrix(ds.y(), ds.z(), reg, reg.seed, "reg.g", "g", result.training_mse);

    WeightGrid unit;
    unit.k0 = 0;
    unit.functions.push_back(WeightFunction::constant_one());
    std::vector<std::vector<const WeightGrid*>> grids(1, {&unit});
    const StatisticBundle bundle = statistic_vector(eps, xi, grids, ds.z());

    result.k_total = 1;
    result.statistic = bundle.stats.front().t;
    result.p_value = normal_two_sided_p(result.statistic);
    result.per_statistic = collect_per_statistic(bundle, grids);
    return result;
}

TestResult wgcm_fix_test(const Dataset& ds, const RegressorSpec& reg, int k0, int draws,
                         std::uint64_t seed, unsigned threads) {
    require_univariate(ds, "wgcm_fix_test");
    return fix_test_core(ds, reg, k0, draws, seed, threads, Method::wgcm_fix);
}

TestResult mwgcm_fix_test(const Dataset& ds, const RegressorSpec& reg, int k0, int draws,
                          std::uint64_t seed, unsigned threads) {
    return fix_test_core(ds, reg, k0, draws, seed, threads, Method::mwgcm_fix);
}

TestResult wgcm_est_test(const Dataset& ds, const RegressorSpec& reg_xy,
                         const RegressorSpec& reg_h, double fraction, std::uint64_t seed) {
    require_univariate(ds, "wgcm_est_test");
    return est_test_core(ds, reg_xy, reg_h, fraction, /*draws=*/1, seed, 1, Method::wgcm_est);
}

TestResult mwgcm_est_test(const Dataset& ds, const RegressorSpec& reg_xy,
                          const RegressorSpec& reg_h, double fraction, int draws,
                          std::uint64_t seed, unsigned threads) {
    return est_test_core(ds, reg_xy, reg_h, fraction, draws, seed, threads, Method::mwgcm_est);
}

std::vector<double> holm_adjust(const std::vector<double>& pvals) {
    const std::size_t m = pvals.size();
    for (double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw WgcmError(ErrorKind::invalid_p, "p-value outside [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
    std::vector<double> adjusted(m, 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double scaled = static_cast<double>(m - i) * pvals[order[i]];
        running = std::max(running, scaled);
        adjusted[order[i]] = std::min(1.0, running);
    }
    return adjusted;
}

TestResult run_test(const Dataset& ds, const TestConfig& config, std::uint64_t seed,
                    unsigned threads) {
    switch (config.method) {
        case Method::gcm: {
            RegressorSpec reg = config.reg;
            reg.seed = seed;
            return gcm_test(ds, reg);
        }
        case Method::wgcm_fix:
            return wgcm_fix_test(ds, config.reg, config.k0, config.draws, seed, threads);
        case Method::wgcm_est:
            return wgcm_est_test(ds, config.reg, config.reg_h, config.fraction, seed);
        case Method::mwgcm_fix:
            return mwgcm_fix_test(ds, config.reg, config.k0, config.draws, seed, threads);
        case Method::mwgcm_est:
            return mwgcm_est_test(ds, config.reg, config.reg_h, config.fraction, config.draws,
                                  seed, threads);
    }
    throw WgcmError(ErrorKind::invalid_parameter, "unknown method");
}

std::function<double(const Dataset&, std::uint64_t)> make_test_runner(const TestConfig& config) {
    return [config](const Dataset& ds, std::uint64_t seed) {
        return run_test(ds, config, seed, 1).p_value;
    };
}

SelectionResult select_variables(const std::vector<double>& y, const Matrix& x,
                                 const TestConfig& config, double alpha, std::uint64_t seed,
                                 unsigned threads) {
    const std::size_t d = x.cols();
    const std::size_t n = x.rows();
    if (d < 2) {
        throw WgcmError(ErrorKind::invalid_parameter, "selection needs at least 2 predictors");
    }
    if (n != y.size()) {
        throw WgcmError(ErrorKind::dimension_mismatch, "x rows and y length differ");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw WgcmError(ErrorKind::invalid_parameter, "alpha must be in [0, 1]");
    }

    SelectionResult result;
    result.alpha = alpha;
    result.per_variable.resize(d);

    parallel_for(d, threads, [&](std::size_t j) {
        SelectionEntry entry;
        entry.index = j;
        try {
            Matrix xj(n, 1);
            Matrix ym(n, 1);
            Matrix rest(n, d - 1);
            for (std::size_t i = 0; i < n; ++i) {
                xj(i, 0) = x(i, j);
                ym(i, 0) = y[i];
                std::size_t c = 0;
                for (std::size_t t = 0; t < d; ++t) {
                    if (t == j) continue;
                    rest(i, c++) = x(i, t);
                }
            }
            const Dataset ds(std::move(xj), std::move(ym), std::move(rest));
            const TestResult tr =
                run_test(ds, config, derive_seed(derive_seed(seed, "var"), j), 1);
            entry.statistic = tr.statistic;
            entry.p_raw = tr.p_value;
        } catch (const WgcmError& e) {
            entry.p_raw = 1.0;
            entry.failed = true;
            entry.warning = e.what();
        }
        result.per_variable[j] = std::move(entry);
    });

    std::vector<double> raw(d);
    for (std::size_t j = 0; j < d; ++j) raw[j] = result.per_variable[j].p_raw;
    const std::vector<double> adjusted = holm_adjust(raw);
    for (std::size_t j = 0; j < d; ++j) {
        result.per_variable[j].p_adjusted = adjusted[j];
        result.per_variable[j].selected =
            !result.per_variable[j].failed && adjusted[j] <= alpha;
        if (result.per_variable[j].selected) {
            result.selected.push_back(j);
        }
    }
    return result;
}

std::string TestResult::to_json_string() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["method"] = method_name(method);
    j["statistic"] = statistic;
    j["p_value"] = p_value;
    j["p_bonferroni"] = p_bonferroni ? nlohmann::json(*p_bonferroni) : nlohmann::json(nullptr);
    j["k_total"] = k_total;
    j["n_main"] = n_main;
    j["n_weight_est"] =
        n_weight_est ? nlohmann::json(*n_weight_est) : nlohmann::json(nullptr);
    nlohmann::json per = nlohmann::json::array();
    for (const auto& ps : per_statistic) {
        per.push_back({{"j", ps.label.j},
                       {"l", ps.label.l},
                       {"k", ps.label.k},
                       {"t", ps.t},
                       {"weight", nlohmann::json::parse(ps.weight_json)}});
    }
    j["per_statistic"] = per;
    if (mc) {
        j["mc"] = {{"draws", mc->draws},
                   {"stderr", mc->stderr_p},
                   {"jitter_used", mc->jitter_used}};
    } else {
        j["mc"] = nullptr;
    }
    j["seeds"] = seeds;
    j["diagnostics"] = {{"training_mse", training_mse}, {"warnings", warnings}};
    return j.dump(2);
}

}  // namespace wgcm
