#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/model.hpp"

namespace pseudobo {

/// Kernel sums below this are treated as zero support.
inline constexpr double kKernelSumFloor = 1e-300;

/// Base bandwidths h0^(l), h0^(u), as fractions of the unit cube.
struct BandwidthSchedule {
    std::vector<double> h0_low;
    std::vector<double> h0_high;

    static BandwidthSchedule uniform(std::size_t dim, double low, double high) {
        return {std::vector<double>(dim, low), std::vector<double>(dim, high)};
    }

    std::size_t dim() const noexcept { return h0_low.size(); }

    void validate() const {
        if (h0_low.empty() || h0_low.size() != h0_high.size())
            throw ConfigError("bandwidth schedule: low/high must be nonempty and of equal length");
        for (std::size_t i = 0; i < h0_low.size(); ++i)
            if (!(h0_low[i] > 0.0) || !(h0_low[i] <= h0_high[i]))
                throw ConfigError("bandwidth schedule: need 0 < h0_low <= h0_high in dimension " +
                                  std::to_string(i));
    }
};

/// n^{-1/(2+d)}, the rate shared by every bandwidth rule.
inline double bandwidth_rate(std::size_t n, std::size_t d) {
    return std::pow(static_cast<double>(n), -1.0 / (2.0 + static_cast<double>(d)));
}

/// Location-adaptive bandwidth: wide away from data, narrow near it.
inline std::vector<double> bandwidth(const BandwidthSchedule& schedule, std::size_t n, std::size_t d,
                                     double delta) {
    const double rate = bandwidth_rate(n, d);
    const double blend = 1.0 - std::exp(-delta * static_cast<double>(n));
    std::vector<double> h(schedule.dim());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double lo = schedule.h0_low[i] * rate;
        const double hi = schedule.h0_high[i] * rate;
        h[i] = blend * (hi - lo) + lo;
    }
    return h;
}

namespace detail {

/// Gaussian kernel exp(-1/2 Σ ((a_i - b_i) * inv_h_i)^2).
inline double gaussian_kernel(std::span<const double> a, std::span<const double> b,
                              std::span<const double> inv_h) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = (a[i] - b[i]) * inv_h[i];
        e += t * t;
    }
    return e > 1500.0 ? 0.0 : std::exp(-0.5 * e);
}

inline std::vector<double> inverse(std::span<const double> h) {
    std::vector<double> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = 1.0 / h[i];
    return out;
}

/// Normalizer of the kernel-weighted average: the kernel sum, plus n^-2 when
/// the sum vanishes.
inline double kernel_normalizer(double kernel_sum, std::size_t n) {
    if (kernel_sum < kKernelSumFloor) {
        const double nd = static_cast<double>(n);
        return kernel_sum + 1.0 / (nd * nd);
    }
    return kernel_sum;
}

inline double kernel_average(std::span<const double> weights, std::span<const double> labels,
                             std::size_t n) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        num += weights[i] * labels[i];
        den += weights[i];
    }
    return num / kernel_normalizer(den, n);
}

}  // namespace detail

/// Nadaraya-Watson prediction with the Δ-adaptive schedule.
inline double kernel_regression_predict(std::span<const double> x, const Dataset& data,
                                        const BandwidthSchedule& schedule) {
    if (data.empty()) throw StateError("kernel regression on empty dataset");
    const std::size_t n = data.size();
    const auto h = bandwidth(schedule, n, data.dim(), min_distance(x, data));
    const auto inv_h = detail::inverse(h);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = detail::gaussian_kernel(x, data.point(i), inv_h);
    return detail::kernel_average(w, data.labels(), n);
}

class KernelRegression final : public Surrogate {
public:
    explicit KernelRegression(BandwidthSchedule schedule) : schedule_(std::move(schedule)) {
        schedule_.validate();
    }

    void fit(const Dataset& data) override {
        if (data.dim() != schedule_.dim())
            throw ConfigError("kernel regression: schedule/dataset dimension mismatch");
        data_ = data;
    }

    double predict(std::span<const double> x) const override {
        if (!data_) throw StateError("kernel regression used before fit");
        return kernel_regression_predict(x, *data_, schedule_);
    }

    const BandwidthSchedule& schedule() const noexcept { return schedule_; }

private:
    BandwidthSchedule schedule_;
    std::optional<Dataset> data_;
};

inline double nearest_neighbor_predict(std::span<const double> x, const Dataset& data) {
    if (data.empty()) throw StateError("nearest neighbour on empty dataset");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = squared_distance(x, data.point(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return data.labels()[best];
}

class NearestNeighbor final : public Surrogate {
public:
    void fit(const Dataset& data) override { data_ = data; }
    double predict(std::span<const double> x) const override {
        if (!data_) throw StateError("nearest neighbour used before fit");
        return nearest_neighbor_predict(x, *data_);
    }

private:
    std::optional<Dataset> data_;
};

// ---------------------------------------------------------------------------
// Gaussian process with squared-exponential kernel, zero prior mean on labels.

/// Log-spaced lengthscales, 8 per decade over [1e-2, 10].
inline std::vector<double> default_lengthscale_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 24; ++k) grid.push_back(std::pow(10.0, -2.0 + k / 8.0));
    return grid;
}

struct GPConfig {
    std::vector<double> lengthscale;  ///< per dimension; empty means 0.2 everywhere
    double signal_variance = 1.0;
    double jitter = 1e-6;
    std::vector<double> lengthscale_grid = default_lengthscale_grid();

    void validate() const {
        if (!(jitter > 0.0)) throw ConfigError("GP jitter must be positive");
        if (!(signal_variance > 0.0)) throw ConfigError("GP signal variance must be positive");
        if (lengthscale_grid.empty()) throw ConfigError("GP lengthscale grid is empty");
        for (double l : lengthscale)
            if (!(l > 0.0)) throw ConfigError("GP lengthscales must be positive");
    }
};

namespace detail {

inline double se_kernel(std::span<const double> a, std::span<const double> b,
                        std::span<const double> inv_l, double s2) {
    return s2 * gaussian_kernel(a, b, inv_l);
}

/// Cholesky factor of K(X, X) with a jitter escalated up to three decades.
struct GPFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd alpha;  // (K + jitter I)^{-1} y
    double jitter = 0.0;
    std::vector<double> inv_l;
};

inline std::vector<double> resolved_lengthscale(const GPConfig& cfg, std::size_t dim) {
    if (cfg.lengthscale.empty()) return std::vector<double>(dim, 0.2);
    if (cfg.lengthscale.size() == 1) return std::vector<double>(dim, cfg.lengthscale[0]);
    if (cfg.lengthscale.size() != dim) throw ConfigError("GP lengthscale/dataset dimension mismatch");
    return cfg.lengthscale;
}

inline GPFactor factorize(const Dataset& data, const GPConfig& cfg) {
    if (data.empty()) throw StateError("GP on empty dataset");
    const std::size_t n = data.size();
    GPFactor f;
    f.inv_l = inverse(resolved_lengthscale(cfg, data.dim()));
    Eigen::MatrixXd k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = cfg.signal_variance;
        for (std::size_t j = 0; j < i; ++j)
            k(i, j) = k(j, i) = se_kernel(data.point(i), data.point(j), f.inv_l, cfg.signal_variance);
    }
    double jitter = cfg.jitter;
    for (int attempt = 0; attempt <= 3; ++attempt, jitter *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        f.llt.compute(kj);
        if (f.llt.info() == Eigen::Success) {
            f.jitter = jitter;
            const Eigen::Map<const Eigen::VectorXd> y(data.labels().data(),
                                                      static_cast<Eigen::Index>(n));
            f.alpha = f.llt.solve(y);
            return f;
        }
    }
    throw NumericalError("GP gram matrix not positive definite after jitter escalation to " +
                         std::to_string(jitter / 10.0));
}

inline Eigen::VectorXd cross_kernel(std::span<const double> x, const Dataset& data,
                                    std::span<const double> inv_l, double s2) {
    Eigen::VectorXd kx(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
        kx(static_cast<Eigen::Index>(i)) = se_kernel(x, data.point(i), inv_l, s2);
    return kx;
}

inline double log_marginal_likelihood(const Dataset& data, const GPFactor& f) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Map<const Eigen::VectorXd> y(data.labels().data(), n);
    const Eigen::MatrixXd l = f.llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(l(i, i));
    return -0.5 * y.dot(f.alpha) - log_det -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

}  // namespace detail

inline double gp_posterior_mean(std::span<const double> x, const Dataset& data, const GPConfig& cfg) {
    cfg.validate();
    const auto f = detail::factorize(data, cfg);
    return detail::cross_kernel(x, data, f.inv_l, cfg.signal_variance).dot(f.alpha);
}

/// Grid search over isotropic lengthscales maximizing the exact log marginal
/// likelihood. Ties keep the earliest grid entry.
inline double gp_fit_lengthscale(const Dataset& data, const GPConfig& cfg) {
    cfg.validate();
    if (data.size() < 2) throw StateError("lengthscale fit needs at least two points");
    double best_l = cfg.lengthscale_grid.front();
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double l : cfg.lengthscale_grid) {
        GPConfig trial = cfg;
        trial.lengthscale = {l};
        double ll;
        try {
            ll = detail::log_marginal_likelihood(data, detail::factorize(data, trial));
        } catch (const NumericalError&) {
            continue;
        }
        if (ll > best_ll) {
            best_ll = ll;
            best_l = l;
        }
    }
    return best_l;
}

/// Exact GP posterior, usable both as SP (mean) and UQ (standard deviation).
class GaussianProcess final : public Surrogate, public UncertaintyQuantifier {
public:
    explicit GaussianProcess(GPConfig cfg = {}, bool fit_lengthscale = true)
        : cfg_(std::move(cfg)), fit_lengthscale_(fit_lengthscale) {
        cfg_.validate();
    }

    void fit(const Dataset& data) override {
        if (fit_lengthscale_ && data.size() >= 2) cfg_.lengthscale = {gp_fit_lengthscale(data, cfg_)};
        factor_ = detail::factorize(data, cfg_);
        data_ = data;
    }

    double predict(std::span<const double> x) const override {
        require_fit();
        return detail::cross_kernel(x, *data_, factor_->inv_l, cfg_.signal_variance).dot(factor_->alpha);
    }

    double stddev(std::span<const double> x) const override {
        require_fit();
        const auto kx = detail::cross_kernel(x, *data_, factor_->inv_l, cfg_.signal_variance);
        const Eigen::VectorXd v = factor_->llt.matrixL().solve(kx);
        return std::sqrt(std::max(0.0, cfg_.signal_variance - v.squaredNorm()));
    }

    const GPConfig& config() const noexcept { return cfg_; }
    double jitter_used() const { return factor_ ? factor_->jitter : cfg_.jitter; }

private:
    void require_fit() const {
        if (!data_) throw StateError("GP used before fit");
    }

    GPConfig cfg_;
    bool fit_lengthscale_;
    std::optional<Dataset> data_;
    std::optional<detail::GPFactor> factor_;
};

// ---------------------------------------------------------------------------
// Combinations.

namespace detail {
inline void check_affine_weights(std::span<const double> w, std::size_t count, bool nonnegative,
                                 const char* what) {
    if (w.size() != count || count == 0)
        throw ConfigError(std::string(what) + ": need one weight per component");
    double s = 0.0;
    for (double a : w) {
        if (!std::isfinite(a)) throw ConfigError(std::string(what) + ": non-finite weight");
        if (nonnegative && a < 0.0) throw ConfigError(std::string(what) + ": negative weight");
        s += a;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ConfigError(std::string(what) + ": weights must sum to 1");
}
}  // namespace detail

/// Affine combination Σ α_i f̂_i with Σ α_i = 1.
class HybridSurrogate final : public Surrogate {
public:
    HybridSurrogate(std::vector<std::shared_ptr<Surrogate>> components, std::vector<double> weights)
        : components_(std::move(components)), weights_(std::move(weights)) {
        detail::check_affine_weights(weights_, components_.size(), false, "hybrid SP");
    }

    void fit(const Dataset& data) override {
        for (auto& c : components_) c->fit(data);
    }

    double predict(std::span<const double> x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            if (weights_[i] != 0.0) s += weights_[i] * components_[i]->predict(x);
        return s;
    }

private:
    std::vector<std::shared_ptr<Surrogate>> components_;
    std::vector<double> weights_;
};

/// Known outer map g(f_1(x^(1)), ..., f_u(x^(u)), x^(1), ..., x^(u)).
using OuterFunction =
    std::function<double(std::span<const double> component_values, std::span<const Point> inputs)>;

/// Grey-box predictor: each black-box part has its own dataset and SP; the
/// known outer function combines their predictions in objective units.
class CompositeSurrogate {
public:
    CompositeSurrogate(std::vector<std::shared_ptr<Surrogate>> components,
                       std::vector<std::size_t> part_dims, OuterFunction outer, std::size_t arity)
        : components_(std::move(components)), part_dims_(std::move(part_dims)), outer_(std::move(outer)) {
        if (arity != components_.size() || arity != part_dims_.size() || arity == 0)
            throw ConfigError("composite SP: outer arity " + std::to_string(arity) + " vs " +
                              std::to_string(components_.size()) + " components and " +
                              std::to_string(part_dims_.size()) + " input blocks");
        for (auto d : part_dims_) total_dim_ += d;
    }

    void fit(std::span<const Dataset> datasets) {
        if (datasets.size() != components_.size())
            throw ConfigError("composite SP: one dataset per component required");
        datasets_.assign(datasets.begin(), datasets.end());
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (datasets_[i].dim() != part_dims_[i])
                throw ConfigError("composite SP: dataset " + std::to_string(i) + " dimension mismatch");
            components_[i]->fit(datasets_[i]);
        }
    }

    std::vector<Point> split(std::span<const double> x) const {
        if (x.size() != total_dim_) throw ConfigError("composite SP: input dimension mismatch");
        std::vector<Point> parts;
        std::size_t off = 0;
        for (auto d : part_dims_) {
            parts.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(off),
                               x.begin() + static_cast<std::ptrdiff_t>(off + d));
            off += d;
        }
        return parts;
    }

    /// F̂(x̃) in objective units.
    double predict(std::span<const double> x) const {
        if (datasets_.empty()) throw StateError("composite SP used before fit");
        const auto parts = split(x);
        std::vector<double> values(components_.size());
        for (std::size_t i = 0; i < components_.size(); ++i)
            values[i] = datasets_[i].to_value(components_[i]->predict(parts[i]));
        return outer_(values, parts);
    }

    std::size_t dim() const noexcept { return total_dim_; }

private:
    std::vector<std::shared_ptr<Surrogate>> components_;
    std::vector<std::size_t> part_dims_;
    OuterFunction outer_;
    std::size_t total_dim_ = 0;
    std::vector<Dataset> datasets_;
};

}  // namespace pseudobo
