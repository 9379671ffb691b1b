#include "wgcm/simlab.hpp"

#include <cmath>

#include "wgcm/rng.hpp"

namespace wgcm {

const char* sim_family_name(SimFamily family) {
    switch (family) {
        case SimFamily::motivating: return "motivating";
        case SimFamily::s1d: return "s1d";
        case SimFamily::s10d_add: return "s10d_add";
        case SimFamily::s10d_nonadd: return "s10d_nonadd";
        case SimFamily::example74: return "example74";
    }
    return "unknown";
}

SimFamily sim_family_from_name(const std::string& name) {
    if (name == "motivating") return SimFamily::motivating;
    if (name == "s1d" || name == "1d") return SimFamily::s1d;
    if (name == "s10d_add" || name == "s10d-add" || name == "10d-add") return SimFamily::s10d_add;
    if (name == "s10d_nonadd" || name == "s10d-nonadd" || name == "10d-nonadd") {
        return SimFamily::s10d_nonadd;
    }
    if (name == "example74") return SimFamily::example74;
    throw WgcmError(ErrorKind::invalid_parameter, "unknown simulation family '" + name + "'");
}

namespace {

void check_unit_interval(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw WgcmError(ErrorKind::invalid_parameter,
                        std::string(name) + " must be in [0, 1]");
    }
}

inline double sign_plus(double v) { return v < 0.0 ? -1.0 : 1.0; }

std::vector<double> draw_block(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = rng.normal();
    return out;
}

}  // namespace

double h_lambda(double x, double lam) {
    check_unit_interval(lam, "lambda");
    return lam * x + 0.5 * (1.0 - lam) * x * x;
}

double h_b(double t, double b1, double b2) {
    check_unit_interval(b1, "b1");
    check_unit_interval(b2, "b2");
    const double h1 = (b1 * std::cos(3.0 * b2 * t) + (1.0 - b1) * std::sin(3.0 * b2 * t)) *
                      std::exp(-t * t / 2.0);
    const double h2 = 0.3 * (b1 * std::abs(t) + (1.0 - b1) * t);
    return (1.0 - b2) * h2 - b2 * h1;
}

Dataset generate(const SimSetting& setting) {
    const std::size_t n = setting.n;
    if (n < 2) {
        throw WgcmError(ErrorKind::invalid_parameter, "n must be >= 2");
    }
    if (setting.alternative) {
        check_unit_interval(setting.alternative->first, "c1");
        check_unit_interval(setting.alternative->second, "c2");
    }
    Rng rng(setting.seed);

    // Draws happen in fixed variable-block order so that one seed pins the
    // whole table. The (c1, c2) alternative only modifies y afterwards, which
    // keeps the null and alternative datasets identical except for that term.
    Matrix x, y, z;
    switch (setting.family) {
        case SimFamily::motivating: {
            check_unit_interval(setting.lambda, "lambda");
            const auto zc = draw_block(rng, n);
            const auto eta_x = draw_block(rng, n);
            const auto eta_y = draw_block(rng, n);
            x = Matrix(n, 1);
            y = Matrix(n, 1);
            z = Matrix(n, 1);
            for (std::size_t i = 0; i < n; ++i) {
                z(i, 0) = zc[i];
                x(i, 0) = zc[i] + 0.3 * eta_x[i];
                y(i, 0) = zc[i] + 0.3 * eta_y[i] + 0.3 * h_lambda(x(i, 0), setting.lambda);
            }
            break;
        }
        case SimFamily::s1d: {
            const auto zc = draw_block(rng, n);
            const auto nx = draw_block(rng, n);
            const auto ny = draw_block(rng, n);
            x = Matrix(n, 1);
            y = Matrix(n, 1);
            z = Matrix(n, 1);
            for (std::size_t i = 0; i < n; ++i) {
                const double hz = h_b(zc[i], setting.b1, setting.b2);
                z(i, 0) = zc[i];
                x(i, 0) = hz + 0.3 * nx[i];
                y(i, 0) = hz + 0.3 * ny[i];
            }
            break;
        }
        case SimFamily::s10d_add:
        case SimFamily::s10d_nonadd: {
            constexpr std::size_t dz = 10;
            z = Matrix(n, dz);
            for (std::size_t c = 0; c < dz; ++c) {
                const auto col = draw_block(rng, n);
                for (std::size_t i = 0; i < n; ++i) z(i, c) = col[i];
            }
            const auto nx = draw_block(rng, n);
            const auto ny = draw_block(rng, n);
            x = Matrix(n, 1);
            y = Matrix(n, 1);
            for (std::size_t i = 0; i < n; ++i) {
                const double h1 = h_b(z(i, 0), setting.b1, setting.b2);
                const double h2 = h_b(z(i, 1), setting.b1, setting.b2);
                if (setting.family == SimFamily::s10d_add) {
                    x(i, 0) = h1 - h2 + 0.3 * nx[i];
                    y(i, 0) = h1 + h2 + 0.3 * ny[i];
                } else {
                    x(i, 0) = sign_plus(h1 + h2) + 0.3 * nx[i];
                    y(i, 0) = sign_plus(h1 - h2) + 0.3 * ny[i];
                }
            }
            break;
        }
        case SimFamily::example74: {
            if (setting.d < 3) {
                throw WgcmError(ErrorKind::invalid_parameter, "example74 needs d >= 3");
            }
            if (setting.alternative) {
                throw WgcmError(ErrorKind::invalid_parameter,
                                "example74 has no (c1, c2) alternative");
            }
            x = Matrix(n, setting.d);
            for (std::size_t c = 0; c < setting.d; ++c) {
                const auto col = draw_block(rng, n);
                for (std::size_t i = 0; i < n; ++i) x(i, c) = col[i];
            }
            const auto noise = draw_block(rng, n);
            // placeholder conditioning block; selection sweeps ignore it
            const auto zc = draw_block(rng, n);
            y = Matrix(n, 1);
            z = Matrix(n, 1);
            for (std::size_t i = 0; i < n; ++i) {
                y(i, 0) = x(i, 0) * x(i, 1) + x(i, 0) - x(i, 2) + noise[i];
                z(i, 0) = zc[i];
            }
            return Dataset(std::move(x), std::move(y), std::move(z));
        }
    }

    if (setting.alternative) {
        const double c1 = setting.alternative->first;
        const double c2 = setting.alternative->second;
        for (std::size_t i = 0; i < n; ++i) {
            y(i, 0) += h_b(x(i, 0), c1, c2);
        }
    }
    return Dataset(std::move(x), std::move(y), std::move(z));
}

RejectionRateResult rejection_rate(const SimSetting& setting_template, const TestRunner& runner,
                                   double alpha, std::size_t replicates, std::uint64_t base_seed,
                                   unsigned threads) {
    if (replicates < 1) {
        throw WgcmError(ErrorKind::invalid_parameter, "replicates must be >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw WgcmError(ErrorKind::invalid_parameter, "alpha must be in (0, 1)");
    }
    RejectionRateResult result;
    result.per_replicate.resize(replicates);

    parallel_for(replicates, threads, [&](std::size_t r) {
        ReplicateOutcome outcome;
        outcome.replicate = r;
        outcome.dataset_seed = derive_seed(derive_seed(base_seed, "rep"), r);
        const std::uint64_t test_seed = derive_seed(derive_seed(base_seed, "test"), r);
        try {
            SimSetting setting = setting_template;
            setting.seed = outcome.dataset_seed;
            const Dataset ds = generate(setting);
            outcome.p = runner(ds, test_seed);
            outcome.reject = outcome.p <= alpha;
        } catch (const WgcmError& e) {
            outcome.failed = true;
            outcome.error = e.what();
        }
        result.per_replicate[r] = std::move(outcome);
    });

    std::size_t ok = 0;
    for (const auto& rep : result.per_replicate) {
        if (rep.failed) {
            ++result.n_failed;
        } else {
            ++ok;
            if (rep.reject) ++result.reject_count;
        }
    }
    result.rate = ok == 0 ? 0.0
                          : static_cast<double>(result.reject_count) / static_cast<double>(ok);
    return result;
}

}  // namespace wgcm
