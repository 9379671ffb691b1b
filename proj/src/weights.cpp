#include "wgcm/weights.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wgcm/rng.hpp"

namespace wgcm {

WeightFunction WeightFunction::constant_one() {
    return WeightFunction();
}

WeightFunction WeightFunction::axis_sign(std::size_t dim, double threshold) {
    WeightFunction w;
    w.form_ = WeightForm::axis_sign;
    w.dim_ = dim;
    w.threshold_ = threshold;
    return w;
}

WeightFunction WeightFunction::estimated_sign(FittedModel product_model, std::string provenance) {
    WeightFunction w;
    w.form_ = WeightForm::estimated_sign;
    w.model_ = std::make_shared<FittedModel>(std::move(product_model));
    w.provenance_ = std::move(provenance);
    return w;
}

namespace {

inline double sign_plus(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

double WeightFunction::evaluate(std::span<const double> z) const {
    switch (form_) {
        case WeightForm::constant_one:
            return 1.0;
        case WeightForm::axis_sign:
            if (dim_ >= z.size()) {
                throw WgcmError(ErrorKind::dimension_mismatch, "axis_sign dimension out of range");
            }
            return z[dim_] < threshold_ ? -1.0 : 1.0;
        case WeightForm::estimated_sign:
            return sign_plus(model_->predict_one(z));
    }
    return 1.0;
}

std::vector<double> WeightFunction::evaluate_all(const Matrix& z) const {
    std::vector<double> out(z.rows());
    switch (form_) {
        case WeightForm::constant_one:
            std::fill(out.begin(), out.end(), 1.0);
            break;
        case WeightForm::axis_sign:
            if (dim_ >= z.cols()) {
                throw WgcmError(ErrorKind::dimension_mismatch, "axis_sign dimension out of range");
            }
            for (std::size_t i = 0; i < z.rows(); ++i) {
                out[i] = z(i, dim_) < threshold_ ? -1.0 : 1.0;
            }
            break;
        case WeightForm::estimated_sign: {
            const std::vector<double> pred = model_->predict(z);
            for (std::size_t i = 0; i < z.rows(); ++i) {
                out[i] = sign_plus(pred[i]);
            }
            break;
        }
    }
    return out;
}

std::string WeightFunction::to_json_string() const {
    nlohmann::json j;
    switch (form_) {
        case WeightForm::constant_one:
            j = {{"form", "const"}};
            break;
        case WeightForm::axis_sign:
            j = {{"form", "axis_sign"}, {"dim", dim_}, {"threshold", threshold_}};
            break;
        case WeightForm::estimated_sign:
            j = {{"form", "estimated"}, {"provenance", provenance_}};
            break;
    }
    return j.dump();
}

double eval_weight(const WeightFunction& w, std::span<const double> z) {
    for (double v : z) {
        if (!std::isfinite(v)) {
            throw WgcmError(ErrorKind::non_finite, "weight evaluated at non-finite z");
        }
    }
    return w.evaluate(z);
}

std::string WeightGrid::to_json_string() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& w : functions) {
        arr.push_back(nlohmann::json::parse(w.to_json_string()));
    }
    return arr.dump();
}

WeightGrid quantile_sign_grid(const Matrix& z, int k0) {
    if (k0 < 1) {
        throw WgcmError(ErrorKind::invalid_parameter, "k0 must be >= 1");
    }
    const std::size_t n = z.rows();
    if (n < static_cast<std::size_t>(k0) + 1) {
        throw WgcmError(ErrorKind::too_few_samples, "quantile grid needs n >= k0 + 1");
    }
    WeightGrid grid;
    grid.k0 = k0;
    grid.functions.push_back(WeightFunction::constant_one());
    std::vector<std::pair<std::size_t, double>> seen;
    for (std::size_t d = 0; d < z.cols(); ++d) {
        std::vector<double> col = z.column(d);
        std::sort(col.begin(), col.end());
        for (int k = 1; k <= k0; ++k) {
            // type-1 empirical quantile: 1-based order statistic ceil(k*n/(k0+1))
            const std::size_t num = static_cast<std::size_t>(k) * n;
            const std::size_t den = static_cast<std::size_t>(k0) + 1;
            std::size_t idx1 = (num + den - 1) / den;
            idx1 = std::min(std::max<std::size_t>(idx1, 1), n);
            const double threshold = col[idx1 - 1];
            const auto key = std::make_pair(d, threshold);
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);
            grid.functions.push_back(WeightFunction::axis_sign(d, threshold));
        }
    }
    return grid;
}

WeightFunction estimate_sign_weight_columns(const Matrix& z_a, const std::vector<double>& x_a,
                                            const std::vector<double>& y_a,
                                            const RegressorSpec& spec_xy,
                                            const RegressorSpec& spec_h) {
    const std::size_t n = z_a.rows();
    if (n < kMinWeightTrainingSize) {
        throw WgcmError(ErrorKind::too_few_samples,
                        "weight estimation needs n >= " + std::to_string(kMinWeightTrainingSize));
    }
    RegressorSpec spec_f = spec_xy;
    spec_f.seed = derive_seed(spec_xy.seed, "est.f");
    RegressorSpec spec_g = spec_xy;
    spec_g.seed = derive_seed(spec_xy.seed, "est.g");
    RegressorSpec spec_hh = spec_h;
    spec_hh.seed = derive_seed(spec_h.seed, "est.h");

    const FittedModel f_hat = fit(spec_f, z_a, x_a);
    const FittedModel g_hat = fit(spec_g, z_a, y_a);
    const std::vector<double> eps = residuals(f_hat, z_a, x_a);
    const std::vector<double> xi = residuals(g_hat, z_a, y_a);
    std::vector<double> products(n);
    for (std::size_t i = 0; i < n; ++i) {
        products[i] = eps[i] * xi[i];
    }
    FittedModel h_hat = fit(spec_hh, z_a, products);
    const std::string provenance =
        std::string("sign_of_h:") + regressor_kind_name(spec_h.kind) + ":n=" + std::to_string(n);
    return WeightFunction::estimated_sign(std::move(h_hat), provenance);
}

WeightFunction estimate_sign_weight(const Dataset& ds_a, const RegressorSpec& spec_xy,
                                    const RegressorSpec& spec_h) {
    if (ds_a.dx() != 1 || ds_a.dy() != 1) {
        throw WgcmError(ErrorKind::dimension_mismatch,
                        "weight estimation expects univariate X and Y");
    }
    return estimate_sign_weight_columns(ds_a.z(), ds_a.x().column(0), ds_a.y().column(0),
                                        spec_xy, spec_h);
}

}  // namespace wgcm
