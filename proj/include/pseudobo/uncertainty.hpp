#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/model.hpp"
#include "pseudobo/randomized_prior.hpp"
#include "pseudobo/surrogates.hpp"

namespace pseudobo {

/// σ_MD = std(labels) · Δ(x, X_n).
inline double min_distance_uq(std::span<const double> x, const Dataset& data) {
    return data.label_std() * min_distance(x, data);
}

class MinDistanceUQ final : public UncertaintyQuantifier {
public:
    void fit(const Dataset& data) override { data_ = data; }
    double stddev(std::span<const double> x) const override {
        if (!data_) throw StateError("minimum-distance UQ used before fit");
        return min_distance_uq(x, *data_);
    }

private:
    std::optional<Dataset> data_;
};

inline double gp_posterior_std(std::span<const double> x, const Dataset& data, const GPConfig& cfg) {
    GaussianProcess gp(cfg, false);
    gp.fit(data);
    return gp.stddev(x);
}

/// α_n = exp(-Δ n): 1 on the data, decaying away from it as n grows.
inline double alpha_mix(double delta, std::size_t n) {
    return std::exp(-delta * static_cast<double>(n));
}

/// α_n σ_MD + (1 - α_n) σ_RP, with Δ measured against the full history.
class HybridUQ final : public UncertaintyQuantifier {
public:
    explicit HybridUQ(std::shared_ptr<UncertaintyQuantifier> rp) : rp_(std::move(rp)) {
        if (!rp_) throw ConfigError("hybrid UQ needs a randomized-prior component");
    }

    /// Builds the bootstrapped randomized-prior component from a config.
    explicit HybridUQ(RPConfig rp_cfg) : HybridUQ(std::make_shared<RPEnsemble>(std::move(rp_cfg))) {}

    void fit(const Dataset& data) override {
        if (data.empty()) throw StateError("hybrid UQ fit on empty dataset");
        data_ = data;
        rp_->fit(data);
    }

    double stddev(std::span<const double> x) const override {
        if (!data_) throw StateError("hybrid UQ used before fit");
        const double delta = min_distance(x, *data_);
        const double alpha = alpha_mix(delta, data_->size());
        const double md = data_->label_std() * delta;
        if (alpha == 1.0) return md;
        return alpha * md + (1.0 - alpha) * rp_->stddev(x);
    }

    const UncertaintyQuantifier& randomized_prior() const { return *rp_; }

private:
    std::shared_ptr<UncertaintyQuantifier> rp_;
    std::optional<Dataset> data_;
};

inline double hybrid_uq(std::span<const double> x, const Dataset& data, RPConfig rp_cfg) {
    HybridUQ uq(std::move(rp_cfg));
    uq.fit(data);
    return uq.stddev(x);
}

/// Convex combination Σ α_i σ̂_i, α_i >= 0, Σ α_i = 1.
class ConvexUQ final : public UncertaintyQuantifier {
public:
    ConvexUQ(std::vector<std::shared_ptr<UncertaintyQuantifier>> components, std::vector<double> weights)
        : components_(std::move(components)), weights_(std::move(weights)) {
        detail::check_affine_weights(weights_, components_.size(), true, "hybrid UQ");
    }

    void fit(const Dataset& data) override {
        for (auto& c : components_) c->fit(data);
    }

    double stddev(std::span<const double> x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            if (weights_[i] != 0.0) s += weights_[i] * components_[i]->stddev(x);
        return s;
    }

private:
    std::vector<std::shared_ptr<UncertaintyQuantifier>> components_;
    std::vector<double> weights_;
};

/// Grey-box UQ: the largest component uncertainty, each on its own data.
inline double composite_uq(std::span<const Point> x_parts,
                           std::span<const std::shared_ptr<UncertaintyQuantifier>> uqs) {
    if (uqs.empty()) throw ConfigError("composite UQ needs at least one component");
    if (x_parts.size() != uqs.size())
        throw ConfigError("composite UQ: " + std::to_string(x_parts.size()) + " input blocks for " +
                          std::to_string(uqs.size()) + " components");
    double best = 0.0;
    for (std::size_t i = 0; i < uqs.size(); ++i) best = std::max(best, uqs[i]->stddev(x_parts[i]));
    return best;
}

/// Fits each component UQ on its dataset, then takes the max.
class CompositeUQ {
public:
    explicit CompositeUQ(std::vector<std::shared_ptr<UncertaintyQuantifier>> components)
        : components_(std::move(components)) {
        if (components_.empty()) throw ConfigError("composite UQ needs at least one component");
    }

    void fit(std::span<const Dataset> datasets) {
        if (datasets.size() != components_.size())
            throw ConfigError("composite UQ: one dataset per component required");
        for (std::size_t i = 0; i < components_.size(); ++i) components_[i]->fit(datasets[i]);
    }

    double stddev(std::span<const Point> x_parts) const { return composite_uq(x_parts, components_); }

private:
    std::vector<std::shared_ptr<UncertaintyQuantifier>> components_;
};

}  // namespace pseudobo
