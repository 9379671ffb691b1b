#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wgcm/citests.hpp"
#include "wgcm/datamodel.hpp"
#include "wgcm/rng.hpp"
#include "wgcm/simlab.hpp"

namespace {

using namespace wgcm;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::degenerate_residuals:
        case ErrorKind::degenerate_split:
        case ErrorKind::not_decomposable:
            return 3;
        case ErrorKind::usage_error:
        case ErrorKind::invalid_parameter:
        case ErrorKind::invalid_hyperparameter:
        case ErrorKind::invalid_p:
            return 1;
        default:
            return 2;
    }
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& csv, const char* name) {
    std::vector<double> out;
    for (const auto& item : split_list(csv)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw WgcmError(ErrorKind::usage_error,
                            std::string("cannot parse ") + name + " value '" + item + "'");
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw WgcmError(ErrorKind::missing_file, "cannot write '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw WgcmError(ErrorKind::missing_file, "cannot move output into '" + path + "'");
    }
}

struct CommonOpts {
    std::string method = "wgcm-fix";
    std::string regressor = "boosted";
    int k0 = 7;
    double fraction = 0.3;
    int draws = 10000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    int knn_k = 5;
    double bandwidth = 0.0;  // 0 keeps the automatic choice
    std::string out;

    unsigned effective_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1;
    }

    RegressorSpec regressor_spec() const {
        RegressorSpec spec;
        spec.kind = regressor_kind_from_name(regressor);
        spec.knn.k = knn_k;
        if (bandwidth > 0.0) spec.kernel.bandwidth = bandwidth;
        return spec;
    }

    TestConfig test_config() const {
        TestConfig config;
        config.method = method_from_name(method);
        config.reg = regressor_spec();
        config.reg_h = config.reg;
        config.k0 = k0;
        config.fraction = fraction;
        config.draws = draws;
        return config;
    }
};

void add_common_options(CLI::App* cmd, CommonOpts& opts, bool with_method = true) {
    if (with_method) {
        cmd->add_option("--method", opts.method,
                        "gcm|wgcm-fix|wgcm-est|mwgcm-fix|mwgcm-est");
    }
    cmd->add_option("--regressor", opts.regressor, "boosted|kernel|knn|mean");
    cmd->add_option("--k0", opts.k0, "sign-weight cuts per Z dimension");
    cmd->add_option("--fraction", opts.fraction, "weight-estimation split fraction");
    cmd->add_option("--draws", opts.draws, "Monte-Carlo draws for the max calibration");
    cmd->add_option("--alpha", opts.alpha, "significance level");
    cmd->add_option("--seed", opts.seed, "master seed (WGCM_SEED env overrides)");
    cmd->add_option("--threads", opts.threads, "worker threads (default: cores)");
    cmd->add_option("--knn-k", opts.knn_k, "neighbors for the knn regressor");
    cmd->add_option("--bandwidth", opts.bandwidth, "kernel bandwidth (omit for auto)");
    cmd->add_option("--out", opts.out, "output path (default: stdout)");
}

void apply_seed_env(CommonOpts& opts) {
    const char* env = std::getenv("WGCM_SEED");
    if (env == nullptr || *env == '\0') return;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
        throw WgcmError(ErrorKind::usage_error, "WGCM_SEED is not an integer");
    }
    opts.seed = static_cast<std::uint64_t>(v);
}

// ----------------------------------------------------------------- test

struct TestCmd {
    CommonOpts common;
    std::string csv;
    std::string x_cols;
    std::string y_cols;
    std::string z_cols;
};

int run_test_cmd(const TestCmd& cmd) {
    ColumnSpec columns{split_list(cmd.x_cols), split_list(cmd.y_cols), split_list(cmd.z_cols)};
    const Dataset ds = load_csv(cmd.csv, columns);
    const TestResult result =
        run_test(ds, cmd.common.test_config(), cmd.common.seed, cmd.common.effective_threads());
    write_output(cmd.common.out, result.to_json_string() + "\n");
    return 0;
}

// ----------------------------------------------------------------- select

struct SelectCmd {
    CommonOpts common;
    std::string csv;
    std::string target;
    std::string predictors;  // empty = every non-target column
    std::string format = "json";
};

int run_select_cmd(const SelectCmd& cmd) {
    std::vector<std::string> x_names = split_list(cmd.predictors);
    if (x_names.empty()) {
        std::ifstream in(cmd.csv);
        if (!in) {
            throw WgcmError(ErrorKind::missing_file, "cannot open '" + cmd.csv + "'");
        }
        std::string header;
        std::getline(in, header);
        for (const auto& name : split_list(header)) {
            std::string trimmed = name;
            while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) {
                trimmed.pop_back();
            }
            if (trimmed != cmd.target) x_names.push_back(trimmed);
        }
    }
    if (x_names.size() < 2) {
        throw WgcmError(ErrorKind::usage_error, "selection needs at least 2 predictors");
    }
    // z block is a placeholder; selection conditions on the remaining predictors
    ColumnSpec columns{x_names, {cmd.target}, {x_names.front()}};
    const Dataset ds = load_csv(cmd.csv, columns);

    const SelectionResult sel =
        select_variables(ds.y().column(0), ds.x(), cmd.common.test_config(), cmd.common.alpha,
                         cmd.common.seed, cmd.common.effective_threads());

    if (cmd.format == "csv") {
        std::string out = "index,name,statistic,p_raw,p_adjusted,selected,failed\n";
        for (const auto& e : sel.per_variable) {
            out += std::to_string(e.index) + "," + x_names[e.index] + "," +
                   format_double(e.statistic) + "," + format_double(e.p_raw) + "," +
                   format_double(e.p_adjusted) + "," + (e.selected ? "1" : "0") + "," +
                   (e.failed ? "1" : "0") + "\n";
        }
        write_output(cmd.common.out, out);
        return 0;
    }
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = "select";
    j["method"] = cmd.common.method;
    j["alpha"] = cmd.common.alpha;
    j["seed"] = cmd.common.seed;
    j["n"] = ds.n();
    j["d"] = ds.dx();
    nlohmann::json per = nlohmann::json::array();
    for (const auto& e : sel.per_variable) {
        per.push_back({{"index", e.index},
                       {"name", x_names[e.index]},
                       {"statistic", e.statistic},
                       {"p_raw", e.p_raw},
                       {"p_adjusted", e.p_adjusted},
                       {"selected", e.selected},
                       {"failed", e.failed},
                       {"warning", e.warning}});
    }
    j["per_variable"] = per;
    nlohmann::json selected = nlohmann::json::array();
    for (std::size_t idx : sel.selected) selected.push_back(x_names[idx]);
    j["selected"] = selected;
    write_output(cmd.common.out, j.dump(2) + "\n");
    return 0;
}

// ----------------------------------------------------------------- simulate

struct SimulateCmd {
    CommonOpts common;
    std::string setting = "s1d";
    std::string lambdas;
    std::string b1s = "0";
    std::string b2s = "0";
    std::string c1s;
    std::string c2s;
    std::string methods = "gcm,wgcm-est,wgcm-fix";
    std::size_t n = 200;
    std::size_t replicates = 0;
    std::string per_replicate_out;
    std::string format = "csv";
    bool null_only = false;  // set by the null-calibration command
};

struct SimRow {
    SimSetting setting;
    std::string method;
    RejectionRateResult outcome;
};

std::vector<SimSetting> build_settings(const SimulateCmd& cmd) {
    const SimFamily family = sim_family_from_name(cmd.setting);
    if (family == SimFamily::example74) {
        throw WgcmError(ErrorKind::usage_error,
                        "example74 is a selection benchmark; use the select command");
    }
    std::vector<SimSetting> settings;
    if (family == SimFamily::motivating) {
        const std::vector<double> lambdas =
            cmd.lambdas.empty() ? std::vector<double>{0.0, 0.5, 1.0}
                                : parse_double_list(cmd.lambdas, "--lambda");
        for (double lam : lambdas) {
            SimSetting s;
            s.family = family;
            s.lambda = lam;
            s.n = cmd.n;
            settings.push_back(s);
        }
        return settings;
    }
    const std::vector<double> b1s = parse_double_list(cmd.b1s, "--b1");
    const std::vector<double> b2s = parse_double_list(cmd.b2s, "--b2");
    const bool has_alt = !cmd.c1s.empty() || !cmd.c2s.empty();
    if (has_alt && (cmd.c1s.empty() || cmd.c2s.empty())) {
        throw WgcmError(ErrorKind::usage_error, "--c1 and --c2 must be given together");
    }
    if (has_alt && cmd.null_only) {
        throw WgcmError(ErrorKind::usage_error,
                        "null-calibration runs the null process; drop --c1/--c2");
    }
    std::vector<std::pair<double, double>> alts;
    if (has_alt) {
        for (double c1 : parse_double_list(cmd.c1s, "--c1")) {
            for (double c2 : parse_double_list(cmd.c2s, "--c2")) {
                alts.emplace_back(c1, c2);
            }
        }
    }
    for (double b1 : b1s) {
        for (double b2 : b2s) {
            SimSetting base;
            base.family = family;
            base.b1 = b1;
            base.b2 = b2;
            base.n = cmd.n;
            if (alts.empty()) {
                settings.push_back(base);
            } else {
                for (const auto& alt : alts) {
                    SimSetting s = base;
                    s.alternative = alt;
                    settings.push_back(s);
                }
            }
        }
    }
    return settings;
}

nlohmann::json setting_json(const SimSetting& s) {
    nlohmann::json j;
    j["family"] = sim_family_name(s.family);
    j["n"] = s.n;
    if (s.family == SimFamily::motivating) {
        j["lambda"] = s.lambda;
    } else {
        j["b1"] = s.b1;
        j["b2"] = s.b2;
    }
    if (s.alternative) {
        j["c1"] = s.alternative->first;
        j["c2"] = s.alternative->second;
    }
    return j;
}

std::string setting_csv_cells(const SimSetting& s) {
    const bool mot = s.family == SimFamily::motivating;
    std::string out = std::string(sim_family_name(s.family)) + ",";
    out += (mot ? format_double(s.lambda) : std::string()) + ",";
    out += (mot ? std::string() : format_double(s.b1)) + ",";
    out += (mot ? std::string() : format_double(s.b2)) + ",";
    out += (s.alternative ? format_double(s.alternative->first) : std::string()) + ",";
    out += (s.alternative ? format_double(s.alternative->second) : std::string()) + ",";
    out += std::to_string(s.n);
    return out;
}

int run_simulate_cmd(const SimulateCmd& cmd, const char* command_name) {
    if (cmd.replicates < 1) {
        throw WgcmError(ErrorKind::usage_error, "--replicates must be >= 1");
    }
    const std::vector<SimSetting> settings = build_settings(cmd);
    const std::vector<std::string> methods = split_list(cmd.methods);
    if (methods.empty()) {
        throw WgcmError(ErrorKind::usage_error, "--methods must name at least one method");
    }

    std::vector<SimRow> rows;
    const unsigned threads = cmd.common.effective_threads();
    for (std::size_t si = 0; si < settings.size(); ++si) {
        // one replicate seed stream per setting: every method sees the same data
        const std::uint64_t setting_seed =
            derive_seed(derive_seed(cmd.common.seed, "sim"), si);
        for (const auto& method : methods) {
            CommonOpts opts = cmd.common;
            opts.method = method;
            const TestConfig config = opts.test_config();
            SimRow row;
            row.setting = settings[si];
            row.method = method;
            row.outcome = rejection_rate(settings[si], make_test_runner(config),
                                         cmd.common.alpha, cmd.replicates, setting_seed,
                                         threads);
            std::cerr << "[" << command_name << "] setting " << (si + 1) << "/"
                      << settings.size() << " method " << method
                      << " rate=" << row.outcome.rate << "\n";
            rows.push_back(std::move(row));
        }
    }

    const double band =
        2.0 * std::sqrt(cmd.common.alpha * (1.0 - cmd.common.alpha) /
                        static_cast<double>(cmd.replicates));
    if (cmd.format == "json") {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["command"] = command_name;
        j["alpha"] = cmd.common.alpha;
        j["replicates"] = cmd.replicates;
        j["seed"] = cmd.common.seed;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json r;
            r["setting"] = setting_json(row.setting);
            r["method"] = row.method;
            r["rate"] = row.outcome.rate;
            r["rejections"] = row.outcome.reject_count;
            r["failures"] = row.outcome.n_failed;
            if (cmd.null_only) {
                r["band"] = {cmd.common.alpha - band, cmd.common.alpha + band};
            }
            arr.push_back(std::move(r));
        }
        j["rows"] = arr;
        write_output(cmd.common.out, j.dump(2) + "\n");
    } else {
        std::string out = "family,lambda,b1,b2,c1,c2,n,method,replicates,failures,rejections,rate";
        if (cmd.null_only) out += ",band_lo,band_hi";
        out += "\n";
        for (const auto& row : rows) {
            out += setting_csv_cells(row.setting) + "," + row.method + "," +
                   std::to_string(cmd.replicates) + "," + std::to_string(row.outcome.n_failed) +
                   "," + std::to_string(row.outcome.reject_count) + "," +
                   format_double(row.outcome.rate);
            if (cmd.null_only) {
                out += "," + format_double(cmd.common.alpha - band) + "," +
                       format_double(cmd.common.alpha + band);
            }
            out += "\n";
        }
        write_output(cmd.common.out, out);
    }

    if (!cmd.per_replicate_out.empty()) {
        std::string out =
            "family,lambda,b1,b2,c1,c2,n,method,replicate,dataset_seed,p,reject,failed\n";
        for (const auto& row : rows) {
            for (const auto& rep : row.outcome.per_replicate) {
                out += setting_csv_cells(row.setting) + "," + row.method + "," +
                       std::to_string(rep.replicate) + "," + std::to_string(rep.dataset_seed) +
                       "," + (rep.failed ? std::string() : format_double(rep.p)) + "," +
                       (rep.reject ? "1" : "0") + "," + (rep.failed ? "1" : "0") + "\n";
            }
        }
        write_output(cmd.per_replicate_out, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional-independence testing with weighted residual covariances"};
    app.require_subcommand(1);

    TestCmd test_cmd;
    auto* test_sub = app.add_subcommand("test", "run one CI test on a CSV dataset");
    test_sub->add_option("--csv", test_cmd.csv, "input CSV path")->required();
    test_sub->add_option("--x", test_cmd.x_cols, "comma-separated X columns")->required();
    test_sub->add_option("--y", test_cmd.y_cols, "comma-separated Y columns")->required();
    test_sub->add_option("--z", test_cmd.z_cols, "comma-separated Z columns")->required();
    add_common_options(test_sub, test_cmd.common);

    SelectCmd select_cmd;
    auto* select_sub = app.add_subcommand("select", "variable selection via per-predictor tests");
    select_sub->add_option("--csv", select_cmd.csv, "input CSV path")->required();
    select_sub->add_option("--y", select_cmd.target, "target column")->required();
    select_sub->add_option("--x", select_cmd.predictors,
                           "comma-separated predictors (default: all other columns)");
    select_sub->add_option("--format", select_cmd.format, "json|csv");
    add_common_options(select_sub, select_cmd.common);

    SimulateCmd sim_cmd;
    auto* sim_sub = app.add_subcommand("simulate", "rejection rates over synthetic settings");
    sim_sub->add_option("--setting", sim_cmd.setting, "motivating|s1d|s10d-add|s10d-nonadd");
    sim_sub->add_option("--lambda", sim_cmd.lambdas, "comma list (motivating)");
    sim_sub->add_option("--b1", sim_cmd.b1s, "comma list");
    sim_sub->add_option("--b2", sim_cmd.b2s, "comma list");
    sim_sub->add_option("--c1", sim_cmd.c1s, "comma list (alternative strength)");
    sim_sub->add_option("--c2", sim_cmd.c2s, "comma list (alternative wiggliness)");
    sim_sub->add_option("--methods", sim_cmd.methods, "comma list of test methods");
    sim_sub->add_option("--n", sim_cmd.n, "sample size per replicate");
    sim_sub->add_option("--replicates", sim_cmd.replicates, "replicates per cell")->required();
    sim_sub->add_option("--per-replicate", sim_cmd.per_replicate_out,
                        "write per-replicate p-values to this CSV");
    sim_sub->add_option("--format", sim_cmd.format, "csv|json summary format");
    add_common_options(sim_sub, sim_cmd.common, /*with_method=*/false);

    SimulateCmd null_cmd;
    null_cmd.null_only = true;
    auto* null_sub =
        app.add_subcommand("null-calibration", "rejection rates under the null process");
    null_sub->add_option("--setting", null_cmd.setting, "motivating|s1d|s10d-add|s10d-nonadd");
    null_sub->add_option("--lambda", null_cmd.lambdas, "comma list (motivating)");
    null_sub->add_option("--b1", null_cmd.b1s, "comma list");
    null_sub->add_option("--b2", null_cmd.b2s, "comma list");
    null_sub->add_option("--methods", null_cmd.methods, "comma list of test methods");
    null_sub->add_option("--n", null_cmd.n, "sample size per replicate");
    null_sub->add_option("--replicates", null_cmd.replicates, "replicates per cell")->required();
    null_sub->add_option("--per-replicate", null_cmd.per_replicate_out,
                         "write per-replicate p-values to this CSV");
    null_sub->add_option("--format", null_cmd.format, "csv|json summary format");
    add_common_options(null_sub, null_cmd.common, /*with_method=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (test_sub->parsed()) {
            apply_seed_env(test_cmd.common);
            return run_test_cmd(test_cmd);
        }
        if (select_sub->parsed()) {
            apply_seed_env(select_cmd.common);
            return run_select_cmd(select_cmd);
        }
        if (sim_sub->parsed()) {
            apply_seed_env(sim_cmd.common);
            return run_simulate_cmd(sim_cmd, "simulate");
        }
        if (null_sub->parsed()) {
            apply_seed_env(null_cmd.common);
            return run_simulate_cmd(null_cmd, "null-calibration");
        }
    } catch (const WgcmError& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "InternalError: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
