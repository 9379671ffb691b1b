#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wgcm/common.hpp"

namespace wgcm {

enum class RegressorKind { boosted_trees, kernel_smoother, knn, mean_only };

const char* regressor_kind_name(RegressorKind kind);
RegressorKind regressor_kind_from_name(const std::string& name);

struct BoostedTreesParams {
    int depth = 3;
    double shrinkage = 0.1;
    int max_rounds = 500;
    double holdout_fraction = 0.2;
    int patience = 10;
    int min_samples_leaf = 5;
};

struct KernelSmootherParams {
    // nullopt = "auto": Silverman per dimension, scaled over a multiplicative
    // grid chosen by cross-validation.
    std::optional<double> bandwidth;
    int cv_folds = 5;
};

struct KnnParams {
    int k = 5;
};

struct RegressorSpec {
    RegressorKind kind = RegressorKind::mean_only;
    BoostedTreesParams boosted;
    KernelSmootherParams kernel;
    KnnParams knn;
    std::uint64_t seed = 0;

    std::string to_json_string() const;
    static RegressorSpec from_json_string(const std::string& text);
};

namespace detail {
class RegressorImpl {
public:
    virtual ~RegressorImpl() = default;
    virtual double predict_row(std::span<const double> z) const = 0;
    virtual std::vector<double> predict(const Matrix& z) const;
};
}  // namespace detail

// Immutable fitted regressor; predict is pure and thread-safe.
class FittedModel {
public:
    FittedModel(RegressorSpec spec, std::shared_ptr<const detail::RegressorImpl> impl,
                std::size_t d_z, std::size_t n_train, double training_mse,
                std::vector<double> training_curve = {});

    std::vector<double> predict(const Matrix& z) const;
    double predict_one(std::span<const double> z_row) const;

    const RegressorSpec& spec() const { return spec_; }
    double training_mse() const { return training_mse_; }
    std::size_t n_train() const { return n_train_; }
    std::size_t d_z() const { return d_z_; }
    // Per-round training MSE of the final boosted fit; empty for other kinds.
    const std::vector<double>& training_curve() const { return training_curve_; }

private:
    RegressorSpec spec_;
    std::shared_ptr<const detail::RegressorImpl> impl_;
    std::size_t d_z_;
    std::size_t n_train_;
    double training_mse_;
    std::vector<double> training_curve_;
};

FittedModel fit(const RegressorSpec& spec, const Matrix& z, const std::vector<double>& target);

std::vector<double> predict(const FittedModel& model, const Matrix& z);

// target - predict(model, z), elementwise.
std::vector<double> residuals(const FittedModel& model, const Matrix& z,
                              const std::vector<double>& target);

// Average held-out squared error over a seeded fold partition.
double cross_fit_mse(const RegressorSpec& spec, const Matrix& z,
                     const std::vector<double>& target, int folds, std::uint64_t seed);

}  // namespace wgcm
