#include "wgcm/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "wgcm/rng.hpp"

namespace wgcm {

const char* regressor_kind_name(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::boosted_trees: return "boosted_trees";
        case RegressorKind::kernel_smoother: return "kernel_smoother";
        case RegressorKind::knn: return "knn";
        case RegressorKind::mean_only: return "mean_only";
    }
    return "unknown";
}

RegressorKind regressor_kind_from_name(const std::string& name) {
    if (name == "boosted_trees" || name == "boosted") return RegressorKind::boosted_trees;
    if (name == "kernel_smoother" || name == "kernel") return RegressorKind::kernel_smoother;
    if (name == "knn") return RegressorKind::knn;
    if (name == "mean_only" || name == "mean") return RegressorKind::mean_only;
    throw WgcmError(ErrorKind::invalid_parameter, "unknown regressor kind '" + name + "'");
}

namespace detail {

std::vector<double> RegressorImpl::predict(const Matrix& z) const {
    std::vector<double> out(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        out[i] = predict_row(z.row(i));
    }
    return out;
}

namespace {

double mean_of(std::span<const double> v) { return compensated_mean(v); }

double mse_against(std::span<const double> pred, std::span<const double> truth) {
    CompensatedSum s;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s.add(d * d);
    }
    return pred.empty() ? 0.0 : s.value() / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------- mean_only

class MeanOnlyImpl final : public RegressorImpl {
public:
    explicit MeanOnlyImpl(double mean) : mean_(mean) {}
    double predict_row(std::span<const double>) const override { return mean_; }

private:
    double mean_;
};

// ----------------------------------------------------------------------- knn

class KnnImpl final : public RegressorImpl {
public:
    KnnImpl(Matrix z, std::vector<double> targets, int k)
        : z_(std::move(z)), targets_(std::move(targets)), k_(k) {}

    double predict_row(std::span<const double> q) const override {
        const std::size_t n = z_.rows();
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            const auto row = z_.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double d = q[j] - row[j];
                d2 += d * d;
            }
            dist[i] = {d2, i};
        }
        // ties resolved toward the lower training index
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        CompensatedSum s;
        for (std::size_t i = 0; i < k; ++i) {
            s.add(targets_[dist[i].second]);
        }
        return s.value() / static_cast<double>(k);
    }

private:
    Matrix z_;
    std::vector<double> targets_;
    int k_;
};

// ----------------------------------------------------------- kernel smoother

class KernelImpl final : public RegressorImpl {
public:
    KernelImpl(Matrix z, std::vector<double> targets, std::vector<double> bandwidths,
               double fallback_mean)
        : z_(std::move(z)), targets_(std::move(targets)), bandwidths_(std::move(bandwidths)),
          fallback_mean_(fallback_mean) {}

    double predict_row(std::span<const double> q) const override {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < z_.rows(); ++i) {
            const double w = kernel_weight(q, z_.row(i));
            num += w * targets_[i];
            den += w;
        }
        if (den < 1e-300) return fallback_mean_;
        return num / den;
    }

    double kernel_weight(std::span<const double> a, std::span<const double> b) const {
        double e = 0.0;
        for (std::size_t d = 0; d < a.size(); ++d) {
            const double u = (a[d] - b[d]) / bandwidths_[d];
            e += u * u;
        }
        return std::exp(-0.5 * e);
    }

private:
    Matrix z_;
    std::vector<double> targets_;
    std::vector<double> bandwidths_;
    double fallback_mean_;
};

double column_sd(const Matrix& z, std::size_t d) {
    const std::size_t n = z.rows();
    if (n < 2) return 0.0;
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(z(i, d));
    const double m = s.value() / static_cast<double>(n);
    CompensatedSum sq;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = z(i, d) - m;
        sq.add(c * c);
    }
    return std::sqrt(sq.value() / static_cast<double>(n - 1));
}

double column_iqr(const Matrix& z, std::size_t d) {
    std::vector<double> col = z.column(d);
    std::sort(col.begin(), col.end());
    auto quantile = [&](double p) {
        const double h = p * static_cast<double>(col.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, col.size() - 1);
        const double frac = h - static_cast<double>(lo);
        return col[lo] * (1.0 - frac) + col[hi] * frac;
    };
    return quantile(0.75) - quantile(0.25);
}

// Silverman's rule of thumb per dimension: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
std::vector<double> silverman_bandwidths(const Matrix& z) {
    std::vector<double> h(z.cols());
    const double n_pow = std::pow(static_cast<double>(z.rows()), -0.2);
    for (std::size_t d = 0; d < z.cols(); ++d) {
        const double sd = column_sd(z, d);
        const double iqr = column_iqr(z, d);
        double a = std::min(sd, iqr / 1.34);
        if (a <= 0.0) a = sd;
        if (a <= 0.0) a = 1.0;
        h[d] = 0.9 * a * n_pow;
        if (h[d] <= 0.0) h[d] = 1.0;
    }
    return h;
}

// Balanced seeded fold assignment; returns fold id per row.
std::vector<int> make_folds(std::size_t n, int folds, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);
    std::vector<int> fold_of(n, 0);
    const std::size_t base = n / static_cast<std::size_t>(folds);
    const std::size_t extra = n % static_cast<std::size_t>(folds);
    std::size_t pos = 0;
    for (int f = 0; f < folds; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t t = 0; t < size; ++t) {
            fold_of[idx[pos++]] = f;
        }
    }
    return fold_of;
}

std::vector<double> choose_kernel_bandwidths(const Matrix& z, const std::vector<double>& target,
                                             const KernelSmootherParams& params,
                                             std::uint64_t seed) {
    const std::vector<double> base = silverman_bandwidths(z);
    static const double grid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const std::size_t n = z.rows();
    const int folds = params.cv_folds;
    if (n < static_cast<std::size_t>(2 * folds)) {
        return base;  // too small to cross-validate; keep the rule-of-thumb scale
    }
    const std::vector<int> fold_of = make_folds(n, folds, derive_seed(seed, "kernel.cv"));
    double best_err = std::numeric_limits<double>::infinity();
    double best_scale = 1.0;
    for (double scale : grid) {
        std::vector<double> h(base.size());
        for (std::size_t d = 0; d < h.size(); ++d) h[d] = base[d] * scale;
        CompensatedSum err;
        for (std::size_t i = 0; i < n; ++i) {
            double num = 0.0;
            double den = 0.0;
            CompensatedSum others;
            std::size_t n_others = 0;
            for (std::size_t t = 0; t < n; ++t) {
                if (fold_of[t] == fold_of[i]) continue;
                double e = 0.0;
                for (std::size_t d = 0; d < z.cols(); ++d) {
                    const double u = (z(i, d) - z(t, d)) / h[d];
                    e += u * u;
                }
                const double w = std::exp(-0.5 * e);
                num += w * target[t];
                den += w;
                others.add(target[t]);
                ++n_others;
            }
            const double pred = (den < 1e-300)
                                    ? others.value() / static_cast<double>(n_others)
                                    : num / den;
            const double d = pred - target[i];
            err.add(d * d);
        }
        if (err.value() < best_err) {
            best_err = err.value();
            best_scale = scale;
        }
    }
    std::vector<double> h(base.size());
    for (std::size_t d = 0; d < h.size(); ++d) h[d] = base[d] * best_scale;
    return h;
}

// -------------------------------------------------------------- boosted trees

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // left child takes z[feature] <= threshold
    double leaf_value = 0.0;
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(std::span<const double> z) const {
        int node = 0;
        while (nodes[node].feature >= 0) {
            node = (z[nodes[node].feature] <= nodes[node].threshold) ? nodes[node].left
                                                                     : nodes[node].right;
        }
        return nodes[node].leaf_value;
    }
};

struct NodeScan {
    std::size_t count = 0;
    double sum = 0.0;
    double last_value = 0.0;
};

struct NodeSplit {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct NodeStats {
    std::size_t count = 0;
    double sum = 0.0;
    bool open = false;  // still a split candidate on the current level
};

// Exact greedy level-wise regression tree on presorted feature orders.
// Scan order fixes all ties (first feature, then lowest threshold), which
// keeps tree construction deterministic.
Tree build_tree(const Matrix& z, const std::vector<double>& residual,
                const std::vector<std::vector<std::uint32_t>>& sorted_by_feature,
                int max_depth, int min_leaf) {
    const std::size_t n = z.rows();
    const std::size_t n_features = z.cols();
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, 0);

    std::vector<NodeStats> stats(1);
    stats[0].count = n;
    {
        CompensatedSum s;
        for (double r : residual) s.add(r);
        stats[0].sum = s.value();
        stats[0].open = true;
    }

    for (int depth = 0; depth < max_depth; ++depth) {
        bool any_open = false;
        for (const auto& st : stats) any_open |= st.open;
        if (!any_open) break;

        std::vector<NodeSplit> best(stats.size());
        std::vector<NodeScan> scan(stats.size());
        for (std::size_t f = 0; f < n_features; ++f) {
            for (auto& sc : scan) sc = NodeScan{};
            for (std::uint32_t i : sorted_by_feature[f]) {
                const int node = node_of[i];
                if (!stats[node].open) continue;
                NodeScan& sc = scan[node];
                const double v = z(i, f);
                if (sc.count > 0 && v > sc.last_value) {
                    const std::size_t nl = sc.count;
                    const std::size_t nr = stats[node].count - nl;
                    if (nl >= static_cast<std::size_t>(min_leaf) &&
                        nr >= static_cast<std::size_t>(min_leaf)) {
                        const double sl = sc.sum;
                        const double sr = stats[node].sum - sl;
                        const double gain = sl * sl / static_cast<double>(nl) +
                                            sr * sr / static_cast<double>(nr) -
                                            stats[node].sum * stats[node].sum /
                                                static_cast<double>(stats[node].count);
                        if (gain > best[node].gain) {
                            best[node].gain = gain;
                            best[node].feature = static_cast<int>(f);
                            best[node].threshold = sc.last_value;
                        }
                    }
                }
                sc.count += 1;
                sc.sum += residual[i];
                sc.last_value = v;
            }
        }

        // materialize the chosen splits and push samples one level down
        std::vector<int> left_id(stats.size(), -1);
        std::vector<int> right_id(stats.size(), -1);
        const std::size_t level_nodes = stats.size();
        for (std::size_t node = 0; node < level_nodes; ++node) {
            if (!stats[node].open || best[node].feature < 0) {
                stats[node].open = false;
                continue;
            }
            tree.nodes[node].feature = best[node].feature;
            tree.nodes[node].threshold = best[node].threshold;
            left_id[node] = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            right_id[node] = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes[node].left = left_id[node];
            tree.nodes[node].right = right_id[node];
            stats[node].open = false;
        }
        stats.resize(tree.nodes.size());
        for (std::size_t i = 0; i < n; ++i) {
            const int node = node_of[i];
            if (node < static_cast<int>(level_nodes) && left_id[node] >= 0) {
                const auto& parent = tree.nodes[node];
                const int child = (z(i, static_cast<std::size_t>(parent.feature)) <=
                                   parent.threshold)
                                      ? parent.left
                                      : parent.right;
                node_of[i] = child;
                stats[child].count += 1;
                stats[child].sum += residual[i];
                stats[child].open = true;
            }
        }
    }

    for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
        if (tree.nodes[node].feature < 0 && stats[node].count > 0) {
            tree.nodes[node].leaf_value = stats[node].sum / static_cast<double>(stats[node].count);
        }
    }
    return tree;
}

std::vector<std::vector<std::uint32_t>> presort_features(const Matrix& z) {
    std::vector<std::vector<std::uint32_t>> sorted(z.cols());
    for (std::size_t f = 0; f < z.cols(); ++f) {
        auto& idx = sorted[f];
        idx.resize(z.rows());
        std::iota(idx.begin(), idx.end(), std::uint32_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return z(a, f) < z(b, f);
        });
    }
    return sorted;
}

struct BoostRun {
    double intercept = 0.0;
    std::vector<Tree> trees;  // leaf values carry the shrinkage factor
    std::vector<double> train_curve;  // training MSE after 0..rounds trees
};

// Squared-loss gradient boosting. When monitor_z is set, boosting stops early
// once the holdout MSE has not improved for `patience` rounds and the run is
// truncated to the best round.
BoostRun run_boosting(const Matrix& z, const std::vector<double>& y,
                      const BoostedTreesParams& p, int rounds,
                      const Matrix* monitor_z, const std::vector<double>* monitor_y) {
    const std::size_t n = z.rows();
    const auto sorted = presort_features(z);
    BoostRun run;
    run.intercept = mean_of(y);

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - run.intercept;
    run.train_curve.push_back(mse_against(std::vector<double>(n, 0.0), residual));

    std::vector<double> monitor_pred;
    double best_monitor_mse = std::numeric_limits<double>::infinity();
    std::size_t best_rounds = 0;
    if (monitor_z != nullptr) {
        monitor_pred.assign(monitor_z->rows(), run.intercept);
        best_monitor_mse = mse_against(monitor_pred, *monitor_y);
    }

    for (int m = 0; m < rounds; ++m) {
        Tree tree = build_tree(z, residual, sorted, p.depth, p.min_samples_leaf);
        for (auto& node : tree.nodes) {
            if (node.feature < 0) node.leaf_value *= p.shrinkage;
        }
        CompensatedSum sq;
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] -= tree.predict_row(z.row(i));
            sq.add(residual[i] * residual[i]);
        }
        run.train_curve.push_back(sq.value() / static_cast<double>(n));
        run.trees.push_back(std::move(tree));

        if (monitor_z != nullptr) {
            for (std::size_t i = 0; i < monitor_z->rows(); ++i) {
                monitor_pred[i] += run.trees.back().predict_row(monitor_z->row(i));
            }
            const double mse = mse_against(monitor_pred, *monitor_y);
            if (mse < best_monitor_mse) {
                best_monitor_mse = mse;
                best_rounds = run.trees.size();
            } else if (run.trees.size() - best_rounds >=
                       static_cast<std::size_t>(p.patience)) {
                break;
            }
        }
    }
    if (monitor_z != nullptr && run.trees.size() > best_rounds) {
        run.trees.resize(best_rounds);
        run.train_curve.resize(best_rounds + 1);
    }
    return run;
}

class BoostedImpl final : public RegressorImpl {
public:
    BoostedImpl(BoostRun run) : run_(std::move(run)) {}

    double predict_row(std::span<const double> z) const override {
        double out = run_.intercept;
        for (const auto& tree : run_.trees) {
            out += tree.predict_row(z);
        }
        return out;
    }

    const BoostRun& run() const { return run_; }

private:
    BoostRun run_;
};

Matrix take_rows(const Matrix& src, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < src.cols(); ++j) {
            out(i, j) = src(rows[i], j);
        }
    }
    return out;
}

}  // namespace
}  // namespace detail

FittedModel::FittedModel(RegressorSpec spec, std::shared_ptr<const detail::RegressorImpl> impl,
                         std::size_t d_z, std::size_t n_train, double training_mse,
                         std::vector<double> training_curve)
    : spec_(std::move(spec)), impl_(std::move(impl)), d_z_(d_z), n_train_(n_train),
      training_mse_(training_mse), training_curve_(std::move(training_curve)) {}

std::vector<double> FittedModel::predict(const Matrix& z) const {
    if (z.cols() != d_z_) {
        throw WgcmError(ErrorKind::dimension_mismatch,
                        "predict with dZ=" + std::to_string(z.cols()) + ", trained on dZ=" +
                            std::to_string(d_z_));
    }
    return impl_->predict(z);
}

double FittedModel::predict_one(std::span<const double> z_row) const {
    if (z_row.size() != d_z_) {
        throw WgcmError(ErrorKind::dimension_mismatch, "predict_one with wrong dZ");
    }
    return impl_->predict_row(z_row);
}

namespace {

void validate_spec(const RegressorSpec& spec) {
    switch (spec.kind) {
        case RegressorKind::boosted_trees: {
            const auto& p = spec.boosted;
            if (p.depth < 1 || p.shrinkage <= 0.0 || p.shrinkage > 1.0 || p.max_rounds < 1 ||
                p.holdout_fraction <= 0.0 || p.holdout_fraction >= 1.0 || p.patience < 1 ||
                p.min_samples_leaf < 1) {
                throw WgcmError(ErrorKind::invalid_hyperparameter, "boosted_trees parameters");
            }
            break;
        }
        case RegressorKind::kernel_smoother: {
            const auto& p = spec.kernel;
            if ((p.bandwidth && *p.bandwidth <= 0.0) || p.cv_folds < 2) {
                throw WgcmError(ErrorKind::invalid_hyperparameter, "kernel_smoother parameters");
            }
            break;
        }
        case RegressorKind::knn:
            if (spec.knn.k < 1) {
                throw WgcmError(ErrorKind::invalid_hyperparameter, "knn needs k >= 1");
            }
            break;
        case RegressorKind::mean_only:
            break;
    }
}

}  // namespace

FittedModel fit(const RegressorSpec& spec, const Matrix& z, const std::vector<double>& target) {
    validate_spec(spec);
    if (z.rows() != target.size()) {
        throw WgcmError(ErrorKind::dimension_mismatch, "z rows and target length differ");
    }
    if (z.rows() == 0 || z.cols() == 0) {
        throw WgcmError(ErrorKind::too_few_samples, "fit needs at least one sample and column");
    }
    if (!z.all_finite()) {
        throw WgcmError(ErrorKind::non_finite, "z contains non-finite values");
    }
    for (double t : target) {
        if (!std::isfinite(t)) {
            throw WgcmError(ErrorKind::non_finite, "target contains non-finite values");
        }
    }

    std::shared_ptr<const detail::RegressorImpl> impl;
    std::vector<double> curve;
    switch (spec.kind) {
        case RegressorKind::mean_only:
            impl = std::make_shared<detail::MeanOnlyImpl>(detail::mean_of(target));
            break;
        case RegressorKind::knn:
            impl = std::make_shared<detail::KnnImpl>(z, target, spec.knn.k);
            break;
        case RegressorKind::kernel_smoother: {
            std::vector<double> h;
            if (spec.kernel.bandwidth) {
                h.assign(z.cols(), *spec.kernel.bandwidth);
            } else {
                h = detail::choose_kernel_bandwidths(z, target, spec.kernel, spec.seed);
            }
            impl = std::make_shared<detail::KernelImpl>(z, target, std::move(h),
                                                        detail::mean_of(target));
            break;
        }
        case RegressorKind::boosted_trees: {
            const std::size_t n = z.rows();
            const auto& p = spec.boosted;
            const std::size_t holdout = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(p.holdout_fraction *
                                                       static_cast<double>(n))));
            if (n < 4 || n - holdout < 2) {
                throw WgcmError(ErrorKind::too_few_samples, "boosted_trees needs n >= 4");
            }
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            Rng rng(derive_seed(spec.seed, "boost.holdout"));
            rng.shuffle(idx);
            std::vector<std::size_t> hold_rows(idx.begin(),
                                               idx.begin() + static_cast<std::ptrdiff_t>(holdout));
            std::vector<std::size_t> train_rows(idx.begin() + static_cast<std::ptrdiff_t>(holdout),
                                                idx.end());
            const Matrix z_train = detail::take_rows(z, train_rows);
            const Matrix z_hold = detail::take_rows(z, hold_rows);
            std::vector<double> y_train(train_rows.size());
            std::vector<double> y_hold(hold_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = target[train_rows[i]];
            for (std::size_t i = 0; i < hold_rows.size(); ++i) y_hold[i] = target[hold_rows[i]];

            const detail::BoostRun probe =
                detail::run_boosting(z_train, y_train, p, p.max_rounds, &z_hold, &y_hold);
            // refit on all rows with the round count the holdout selected
            detail::BoostRun final_run = detail::run_boosting(
                z, target, p, static_cast<int>(probe.trees.size()), nullptr, nullptr);
            curve = final_run.train_curve;
            impl = std::make_shared<detail::BoostedImpl>(std::move(final_run));
            break;
        }
    }
    const std::vector<double> pred = impl->predict(z);
    CompensatedSum sq;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - pred[i];
        sq.add(d * d);
    }
    const double training_mse = sq.value() / static_cast<double>(target.size());
    return FittedModel(spec, impl, z.cols(), z.rows(), training_mse, std::move(curve));
}

std::vector<double> predict(const FittedModel& model, const Matrix& z) {
    return model.predict(z);
}

std::vector<double> residuals(const FittedModel& model, const Matrix& z,
                              const std::vector<double>& target) {
    if (z.rows() != target.size()) {
        throw WgcmError(ErrorKind::dimension_mismatch, "z rows and target length differ");
    }
    std::vector<double> out = model.predict(z);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = target[i] - out[i];
    }
    return out;
}

double cross_fit_mse(const RegressorSpec& spec, const Matrix& z,
                     const std::vector<double>& target, int folds, std::uint64_t seed) {
    if (folds < 2) {
        throw WgcmError(ErrorKind::invalid_parameter, "folds must be >= 2");
    }
    const std::size_t n = z.rows();
    if (n < static_cast<std::size_t>(folds)) {
        throw WgcmError(ErrorKind::too_few_samples, "need n >= folds");
    }
    if (n != target.size()) {
        throw WgcmError(ErrorKind::dimension_mismatch, "z rows and target length differ");
    }
    const std::vector<int> fold_of = detail::make_folds(n, folds, seed);
    CompensatedSum err;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < n; ++i) {
            (fold_of[i] == f ? test_rows : train_rows).push_back(i);
        }
        const Matrix z_train = detail::take_rows(z, train_rows);
        const Matrix z_test = detail::take_rows(z, test_rows);
        std::vector<double> y_train(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = target[train_rows[i]];
        const FittedModel model = fit(spec, z_train, y_train);
        const std::vector<double> pred = model.predict(z_test);
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            const double d = pred[i] - target[test_rows[i]];
            err.add(d * d);
        }
    }
    return err.value() / static_cast<double>(n);
}

std::string RegressorSpec::to_json_string() const {
    nlohmann::json params;
    switch (kind) {
        case RegressorKind::boosted_trees:
            params = {{"depth", boosted.depth},
                      {"shrinkage", boosted.shrinkage},
                      {"max_rounds", boosted.max_rounds},
                      {"holdout_fraction", boosted.holdout_fraction},
                      {"patience", boosted.patience},
                      {"min_samples_leaf", boosted.min_samples_leaf}};
            break;
        case RegressorKind::kernel_smoother:
            params["bandwidth"] = kernel.bandwidth ? nlohmann::json(*kernel.bandwidth)
                                                   : nlohmann::json("auto");
            params["cv_folds"] = kernel.cv_folds;
            break;
        case RegressorKind::knn:
            params = {{"k", knn.k}};
            break;
        case RegressorKind::mean_only:
            params = nlohmann::json::object();
            break;
    }
    nlohmann::json j = {{"kind", regressor_kind_name(kind)}, {"params", params}, {"seed", seed}};
    return j.dump();
}

RegressorSpec RegressorSpec::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw WgcmError(ErrorKind::parse_error, std::string("regressor spec: ") + e.what());
    }
    RegressorSpec spec;
    try {
        spec.kind = regressor_kind_from_name(j.at("kind").get<std::string>());
        spec.seed = j.value("seed", std::uint64_t{0});
        const nlohmann::json params = j.value("params", nlohmann::json::object());
        switch (spec.kind) {
            case RegressorKind::boosted_trees:
                spec.boosted.depth = params.value("depth", spec.boosted.depth);
                spec.boosted.shrinkage = params.value("shrinkage", spec.boosted.shrinkage);
                spec.boosted.max_rounds = params.value("max_rounds", spec.boosted.max_rounds);
                spec.boosted.holdout_fraction =
                    params.value("holdout_fraction", spec.boosted.holdout_fraction);
                spec.boosted.patience = params.value("patience", spec.boosted.patience);
                spec.boosted.min_samples_leaf =
                    params.value("min_samples_leaf", spec.boosted.min_samples_leaf);
                break;
            case RegressorKind::kernel_smoother:
                if (params.contains("bandwidth") && params["bandwidth"].is_number()) {
                    spec.kernel.bandwidth = params["bandwidth"].get<double>();
                }
                spec.kernel.cv_folds = params.value("cv_folds", spec.kernel.cv_folds);
                break;
            case RegressorKind::knn:
                spec.knn.k = params.value("k", spec.knn.k);
                break;
            case RegressorKind::mean_only:
                break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw WgcmError(ErrorKind::parse_error, std::string("regressor spec: ") + e.what());
    }
    return spec;
}

}  // namespace wgcm
