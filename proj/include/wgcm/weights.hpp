#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wgcm/common.hpp"
#include "wgcm/datamodel.hpp"
#include "wgcm/regress.hpp"

namespace wgcm {

enum class WeightForm { constant_one, axis_sign, estimated_sign };

// Bounded weight function w: R^dZ -> R. The built-in forms all have bound 1:
// the constant weight, coordinate sign cuts sign(z_d - a) with sign(0) := +1,
// and the sign of an estimated conditional-mean model.
class WeightFunction {
public:
    static WeightFunction constant_one();
    static WeightFunction axis_sign(std::size_t dim, double threshold);
    static WeightFunction estimated_sign(FittedModel product_model, std::string provenance);

    WeightForm form() const { return form_; }
    std::size_t dim() const { return dim_; }
    double threshold() const { return threshold_; }
    double bound() const { return 1.0; }
    const std::string& provenance() const { return provenance_; }

    double evaluate(std::span<const double> z) const;
    // Evaluates over all rows of z; estimated weights run one batched predict.
    std::vector<double> evaluate_all(const Matrix& z) const;

    std::string to_json_string() const;

private:
    WeightFunction() = default;

    WeightForm form_ = WeightForm::constant_one;
    std::size_t dim_ = 0;
    double threshold_ = 0.0;
    std::shared_ptr<const FittedModel> model_;
    std::string provenance_;
};

double eval_weight(const WeightFunction& w, std::span<const double> z);

struct WeightGrid {
    std::vector<WeightFunction> functions;
    int k0 = 0;

    std::size_t size() const { return functions.size(); }
    std::string to_json_string() const;
};

// Constant weight followed by sign cuts at the empirical k/(k0+1)-quantiles
// (type-1, order statistic at ceil(k*n/(k0+1))) of every Z column. Exact
// duplicate (dim, threshold) pairs are dropped, keeping the first occurrence.
WeightGrid quantile_sign_grid(const Matrix& z, int k0);

// Method-of-moments weight estimate on an auxiliary sample: regress X and Y
// on Z, regress the residual products on Z, return the sign of that fit.
WeightFunction estimate_sign_weight(const Dataset& ds_a, const RegressorSpec& spec_xy,
                                    const RegressorSpec& spec_h);

// Column-level variant used by the multivariate tests: x and y are single
// columns already extracted from the auxiliary part.
WeightFunction estimate_sign_weight_columns(const Matrix& z_a, const std::vector<double>& x_a,
                                            const std::vector<double>& y_a,
                                            const RegressorSpec& spec_xy,
                                            const RegressorSpec& spec_h);

inline constexpr std::size_t kMinWeightTrainingSize = 20;

}  // namespace wgcm
