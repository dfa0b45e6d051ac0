#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rris/error.hpp"
#include "rris/random.hpp"
#include "rris/tensor.hpp"

namespace rris {

struct GradCheckOptions {
    std::size_t sample_size = 100;
    double step = 1e-5;
    double tolerance = 1e-4;
    // Denominator floor for the relative error. Below it both gradients are
    // noise-level and the absolute difference is what gets compared.
    double scale_floor = 1e-5;
    std::uint64_t seed = 0;
};

struct GradCheckEntry {
    std::string name;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_relative_error = 0.0;
    std::size_t parameter_count = 0;
    bool passed = false;
};

inline double relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central-difference check of `gradient(params)` against `loss(params)` on
/// randomly chosen scalar parameters. Params must support
/// for_each_param(params, fn(name, Tensor&)).
template <class Params, class LossFn, class GradFn>
GradCheckReport grad_check(const Params& params, LossFn&& loss, GradFn&& gradient, const GradCheckOptions& opts = {}) {
    if (!(opts.step > 0.0)) throw Error(ErrorCode::invalid_argument, "grad_check step must be positive");
    Params probe = params;
    struct Slot {
        std::string name;
        Tensor* tensor;
    };
    std::vector<Slot> slots;
    std::vector<std::size_t> offsets;
    std::size_t total = 0;
    for_each_param(probe, [&](const std::string& name, Tensor& t) {
        slots.push_back({name, &t});
        offsets.push_back(total);
        total += t.size();
    });
    if (total == 0) throw Error(ErrorCode::empty_input, "grad_check: no parameters");

    Params analytic = gradient(params);
    std::vector<const Tensor*> grads;
    for_each_param(analytic, [&](const std::string&, Tensor& t) { grads.push_back(&t); });
    if (grads.size() != slots.size()) throw Error(ErrorCode::shape_mismatch, "gradient layout differs from parameters");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i]->shape() != slots[i].tensor->shape())
            throw Error(ErrorCode::shape_mismatch, "gradient of " + slots[i].name + " has the wrong shape");
        if (!grads[i]->all_finite()) throw Error(ErrorCode::nonfinite_gradient, "gradient of " + slots[i].name + " is not finite");
    }

    // Distinct flat indices, partial Fisher-Yates over [0, total).
    Rng rng(opts.seed);
    const std::size_t n = std::min(opts.sample_size, total);
    std::vector<std::size_t> picks(total);
    for (std::size_t i = 0; i < total; ++i) picks[i] = i;
    for (std::size_t i = 0; i < n; ++i) std::swap(picks[i], picks[i + rng.index(total - i)]);
    picks.resize(n);
    std::sort(picks.begin(), picks.end());

    GradCheckReport report;
    report.parameter_count = total;
    for (std::size_t flat : picks) {
        const std::size_t s = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin()) - 1;
        const std::size_t k = flat - offsets[s];
        double& theta = (*slots[s].tensor)[k];
        const double saved = theta;
        theta = saved + opts.step;
        const double up = loss(probe);
        theta = saved - opts.step;
        const double down = loss(probe);
        theta = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw Error(ErrorCode::nonfinite_gradient, "loss is not finite near " + slots[s].name);
        GradCheckEntry e{slots[s].name, k, (*grads[s])[k], (up - down) / (2.0 * opts.step), 0.0};
        e.relative_error = relative_error(e.analytic, e.numeric, opts.scale_floor);
        report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
        report.entries.push_back(std::move(e));
    }
    report.passed = report.max_relative_error < opts.tolerance;
    return report;
}

}  // namespace rris
