#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/model.hpp"
#include "pseudobo/surrogates.hpp"

namespace pseudobo {

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Probability of improvement. Indicator branch when sigma == 0.
inline double pi(double p, double sigma, double tau) {
    const double gap = p - tau;
    if (sigma > 0.0) return normal_cdf(gap / sigma);
    return gap > 0.0 ? 1.0 : 0.0;
}

namespace detail {

/// φ(z) + z Φ(z), evaluated without cancellation in the far lower tail.
inline double ei_unit(double z) {
    if (z > -6.0) return normal_pdf(z) + z * normal_cdf(z);
    // Asymptotic expansion of 1 - t R(t), R the Mills ratio, t = -z > 6.
    const double inv_t2 = 1.0 / (z * z);
    double term = inv_t2;
    double sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
        sum += term;
        term *= -static_cast<double>(2 * k + 1) * inv_t2;
    }
    return normal_pdf(z) * sum;
}

/// log(φ(z) + z Φ(z)), finite for every finite z.
inline double log_ei_unit(double z) {
    if (z > -6.0) return std::log(ei_unit(z));
    const double inv_t2 = 1.0 / (z * z);
    double term = inv_t2;
    double sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
        sum += term;
        term *= -static_cast<double>(2 * k + 1) * inv_t2;
    }
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sum);
}

/// log Φ(z), using the Mills-ratio expansion where Φ underflows.
inline double log_normal_cdf(double z) {
    if (z > -30.0) return std::log(normal_cdf(z));
    const double inv_t2 = 1.0 / (z * z);
    double term = 1.0;
    double sum = 0.0;
    for (int k = 0; k <= 6; ++k) {
        sum += term;
        term *= -static_cast<double>(2 * k + 1) * inv_t2;
    }
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-z) + std::log(sum);
}

}  // namespace detail

/// Expected improvement σφ(z) + (p-τ)Φ(z); max(p-τ, 0) when sigma == 0.
inline double ei(double p, double sigma, double tau) {
    const double gap = p - tau;
    if (sigma > 0.0) {
        const double v = sigma * detail::ei_unit(gap / sigma);
        return v > 0.0 ? v : 0.0;
    }
    return gap > 0.0 ? gap : 0.0;
}

/// log EI; ranks candidates exactly where EI itself underflows to zero.
inline double log_ei(double p, double sigma, double tau) {
    const double gap = p - tau;
    if (sigma > 0.0) return std::log(sigma) + detail::log_ei_unit(gap / sigma);
    return gap > 0.0 ? std::log(gap) : -std::numeric_limits<double>::infinity();
}

inline double log_pi(double p, double sigma, double tau) {
    const double gap = p - tau;
    if (sigma > 0.0) return detail::log_normal_cdf(gap / sigma);
    return gap > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
}

/// β_n = beta0 · sqrt(log(n + 2)); `constant` freezes β at beta0, which is
/// outside the strictly-increasing hypothesis of the improvement property.
struct UCBSchedule {
    double beta0 = 2.0;
    bool constant = false;

    double beta(std::size_t n) const {
        if (constant) return beta0;
        return beta0 * std::sqrt(std::log(static_cast<double>(n) + 2.0));
    }
};

/// UCB in improvement form: (p - τ)/β_n + σ.
inline double ucb(double p, double sigma, double tau, std::size_t n, const UCBSchedule& schedule) {
    return (p - tau) / schedule.beta(n) + sigma;
}

/// Acquisition g_n(p, σ). τ and any schedule are bound at construction.
class Acquisition {
public:
    using Fn = std::function<double(double p, double sigma, std::size_t n)>;

    Acquisition() = default;
    /// `rank`, when given, is an increasing transform of `fn` used only to order candidates.
    Acquisition(std::string name, Fn fn, Fn rank = {})
        : name_(std::move(name)), fn_(std::move(fn)), rank_(std::move(rank)) {}

    static Acquisition expected_improvement(double tau = 0.0) {
        if (tau < 0.0) throw ConfigError("EI tolerance must be >= 0");
        return {"ei", [tau](double p, double s, std::size_t) { return ei(p, s, tau); },
                [tau](double p, double s, std::size_t) { return log_ei(p, s, tau); }};
    }
    static Acquisition probability_of_improvement(double tau = 0.01) {
        if (tau < 0.0) throw ConfigError("PI tolerance must be >= 0");
        return {"pi", [tau](double p, double s, std::size_t) { return pi(p, s, tau); },
                [tau](double p, double s, std::size_t) { return log_pi(p, s, tau); }};
    }
    static Acquisition upper_confidence_bound(double tau = 0.0, UCBSchedule schedule = {}) {
        if (tau < 0.0) throw ConfigError("UCB tolerance must be >= 0");
        if (!(schedule.beta0 > 0.0)) throw ConfigError("UCB beta0 must be positive");
        return {"ucb", [tau, schedule](double p, double s, std::size_t n) { return ucb(p, s, tau, n, schedule); }};
    }
    /// g(p, σ) = σ: pure exploration.
    static Acquisition uncertainty_only() {
        return {"uq", [](double, double s, std::size_t) { return s; }};
    }

    double operator()(double p, double sigma, std::size_t n) const { return fn_(p, sigma, n); }
    double rank(double p, double sigma, std::size_t n) const { return rank_ ? rank_(p, sigma, n) : fn_(p, sigma, n); }
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    Fn fn_;
    Fn rank_;
};

/// Convex combination of acquisitions.
inline Acquisition hybrid_af(std::vector<Acquisition> components, std::vector<double> weights) {
    detail::check_affine_weights(weights, components.size(), true, "hybrid AF");
    return {"hybrid", [components = std::move(components), weights = std::move(weights)](
                          double p, double s, std::size_t n) {
                double v = 0.0;
                for (std::size_t i = 0; i < components.size(); ++i)
                    if (weights[i] != 0.0) v += weights[i] * components[i](p, s, n);
                return v;
            }};
}

/// Evaluation worthiness W_n(x) = g_n(ζ(f̂(x) - max labels), σ̂(x)).
struct EWFunction {
    std::shared_ptr<Surrogate> sp;
    std::shared_ptr<UncertaintyQuantifier> uq;
    Acquisition af;
    /// Continuous, increasing, ζ(0) <= 0. Identity when empty.
    std::function<double(double)> zeta;

    void validate() const {
        if (!uq) throw ConfigError("EW needs an uncertainty quantifier");
        if (!sp && af.name() != "uq") throw ConfigError("EW needs a surrogate predictor");
        if (zeta && zeta(0.0) > 0.0) throw ConfigError("EW transform must satisfy zeta(0) <= 0");
    }

    /// Refits SP and UQ on the dataset snapshot.
    void fit(const Dataset& data) const {
        if (sp) sp->fit(data);
        uq->fit(data);
    }

    /// Scores x against the data the components were last fitted on.
    double score(std::span<const double> x, const Dataset& data) const {
        const auto [p, sigma] = inputs(x, data);
        return af(p, sigma, data.size());
    }

    /// Same ordering as score(), on the acquisition's ranking scale.
    double rank(std::span<const double> x, const Dataset& data) const {
        const auto [p, sigma] = inputs(x, data);
        return af.rank(p, sigma, data.size());
    }

private:
    std::pair<double, double> inputs(std::span<const double> x, const Dataset& data) const {
        const double sigma = uq->stddev(x);
        double p = 0.0;
        if (sp) {
            p = sp->predict(x) - data.incumbent_label();
            if (zeta) p = zeta(p);
        }
        return {p, sigma};
    }
};

/// Fits the EW components on `data` and scores x.
inline double ew_score(std::span<const double> x, const Dataset& data, const EWFunction& ew) {
    if (data.empty()) throw StateError("EW score on empty dataset");
    ew.fit(data);
    return ew.score(x, data);
}

}  // namespace pseudobo
