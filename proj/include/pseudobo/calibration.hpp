#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"

namespace pseudobo {

/// UQ values below this are treated as zero by the calibration search.
inline constexpr double kSigmaFloor = 1e-12;

struct Sample {
    Point x;
    double y = 0.0;
};

struct CalibrationSplit {
    std::vector<Sample> train;
    std::vector<Sample> validation;
    std::vector<Sample> test;
};

struct CalibrationResult {
    double lambda_val = 0.0;
    double ccr = 0.0;
    double mean_width = 0.0;
};

namespace detail {

struct Residuals {
    std::vector<double> abs_error;
    std::vector<double> sigma;
};

template <class Sp, class Uq>
Residuals residuals(const Sp& sp, const Uq& uq, std::span<const Sample> data) {
    Residuals r;
    r.abs_error.reserve(data.size());
    r.sigma.reserve(data.size());
    for (const auto& s : data) {
        r.abs_error.push_back(std::abs(s.y - sp(s.x)));
        r.sigma.push_back(uq(s.x));
    }
    return r;
}

inline double coverage(const Residuals& r, double lambda) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < r.sigma.size(); ++i)
        if (r.abs_error[i] <= lambda * r.sigma[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(r.sigma.size());
}

}  // namespace detail

/// Fraction of samples with y in [f̂(x) - λσ̂(x), f̂(x) + λσ̂(x)].
template <class Sp, class Uq>
double coverage(const Sp& sp, const Uq& uq, std::span<const Sample> data, double lambda) {
    if (data.empty()) throw StateError("coverage of empty dataset");
    if (!(lambda >= 0.0)) throw DomainError("coverage multiplier must be >= 0");
    return detail::coverage(detail::residuals(sp, uq, data), lambda);
}

/// Smallest λ (within eps) giving full validation coverage: doubling from
/// λ = 1 to bracket, then bisection on [0, λ_u]. Returns the feasible end.
template <class Sp, class Uq>
double calibrate_lambda(const Sp& sp, const Uq& uq, std::span<const Sample> validation, double eps = 1e-6) {
    if (validation.empty()) throw StateError("calibration needs validation data");
    if (!(eps > 0.0)) throw ConfigError("calibration tolerance must be positive");
    const auto r = detail::residuals(sp, uq, validation);
    for (std::size_t i = 0; i < r.sigma.size(); ++i) {
        if (!(r.sigma[i] >= kSigmaFloor) && r.abs_error[i] > 0.0)
            throw NumericalError("calibration infeasible: validation point " + std::to_string(i) +
                                 " has zero uncertainty and residual " + std::to_string(r.abs_error[i]));
    }

    double lo = 0.0;
    double hi = 1.0;
    while (detail::coverage(r, hi) < 1.0) hi *= 2.0;
    while (hi - lo > eps) {
        const double mid = 0.5 * (lo + hi);
        if (detail::coverage(r, mid) < 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

/// Calibrates on the validation split and reports test coverage and mean
/// interval width 2 λ σ̂.
template <class Sp, class Uq>
CalibrationResult ccr_report(const Sp& sp, const Uq& uq, const CalibrationSplit& split, double eps = 1e-6) {
    if (split.test.empty()) throw StateError("calibration needs test data");
    CalibrationResult out;
    out.lambda_val = calibrate_lambda(sp, uq, split.validation, eps);
    const auto r = detail::residuals(sp, uq, split.test);
    out.ccr = detail::coverage(r, out.lambda_val);
    double w = 0.0;
    for (double s : r.sigma) w += 2.0 * out.lambda_val * s;
    out.mean_width = w / static_cast<double>(r.sigma.size());
    return out;
}

}  // namespace pseudobo
