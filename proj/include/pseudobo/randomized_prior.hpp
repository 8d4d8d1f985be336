#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/model.hpp"
#include "pseudobo/random.hpp"
#include "pseudobo/surrogates.hpp"

namespace pseudobo {

namespace detail {

/// In-place tanh over a contiguous block, built from + - * / only so the
/// loop vectorizes and gives the same bits on every platform. Absolute error
/// is within a few ulps of 1.
inline void tanh_block(double* a, std::size_t count) {
    constexpr double log2e = 1.4426950408889634;
    constexpr double ln2_hi = 0.6931471803691238;
    constexpr double ln2_lo = 1.9082149292705877e-10;
    constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52: rounds to integer
    // Separate clamp pass; fused with the rest GCC refuses to vectorize.
    for (std::size_t j = 0; j < count; ++j) a[j] = std::max(std::min(a[j], 20.0), -20.0);
    for (std::size_t j = 0; j < count; ++j) {
        // e = exp(2v) by range reduction 2v = k ln2 + r, |r| <= ln2 / 2.
        const double y = 2.0 * a[j];
        const double shifted = y * log2e + shifter;
        const double kd = shifted - shifter;
        const double r = (y - kd * ln2_hi) - kd * ln2_lo;
        double p = 1.0 / 6227020800.0;
        p = p * r + 1.0 / 479001600.0;
        p = p * r + 1.0 / 39916800.0;
        p = p * r + 1.0 / 3628800.0;
        p = p * r + 1.0 / 362880.0;
        p = p * r + 1.0 / 40320.0;
        p = p * r + 1.0 / 5040.0;
        p = p * r + 1.0 / 720.0;
        p = p * r + 1.0 / 120.0;
        p = p * r + 1.0 / 24.0;
        p = p * r + 1.0 / 6.0;
        p = p * r + 0.5;
        p = p * r + 1.0;
        p = p * r + 1.0;
        // The low mantissa bits of `shifted` hold k; move k + bias into the exponent.
        const double scale = std::bit_cast<double>((std::bit_cast<std::uint64_t>(shifted) + 1023) << 52);
        a[j] = 1.0 - 2.0 / (1.0 + p * scale);
    }
}

}  // namespace detail

/// Random continuous function r(x) = W3 tanh(W2 tanh(W1 x + b1) + b2) + b3.
///
/// Weights are Glorot-uniform, biases zero, output multiplied by output_scale.
/// Weight matrices are stored column-major (input index outermost).
class PriorField {
public:
    PriorField() = default;

    static PriorField sample(Rng& rng, std::size_t dim, std::size_t hidden_width, double output_scale) {
        if (dim == 0) throw ConfigError("prior field dimension must be positive");
        if (hidden_width == 0) throw ConfigError("prior field hidden width must be positive");
        PriorField f;
        f.dim_ = dim;
        f.width_ = hidden_width;
        f.scale_ = output_scale;
        auto fill = [&rng](std::vector<double>& w, std::size_t count, std::size_t fan_in, std::size_t fan_out) {
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            w.resize(count);
            for (double& v : w) v = rng.uniform(-limit, limit);
        };
        fill(f.w1_, hidden_width * dim, dim, hidden_width);
        fill(f.w2_, hidden_width * hidden_width, hidden_width, hidden_width);
        fill(f.w3_, hidden_width, hidden_width, 1);
        f.b1_.assign(hidden_width, 0.0);
        f.b2_.assign(hidden_width, 0.0);
        f.b3_ = 0.0;
        return f;
    }

    double operator()(std::span<const double> x) const {
        if (scale_ == 0.0) return 0.0;
        const std::size_t h = width_;
        // Fixed-size scratch for the common widths, heap otherwise.
        double buf1[64], buf2[64];
        std::vector<double> heap;
        double* a1 = buf1;
        double* a2 = buf2;
        if (h > 64) {
            heap.resize(2 * h);
            a1 = heap.data();
            a2 = heap.data() + h;
        }
        // Column sweeps: each unit still sums its inputs in index order, but
        // the inner loop runs across units and vectorizes.
        std::copy(b1_.begin(), b1_.end(), a1);
        for (std::size_t i = 0; i < dim_; ++i) {
            const double xi = x[i];
            const double* col = &w1_[i * h];
            for (std::size_t j = 0; j < h; ++j) a1[j] += col[j] * xi;
        }
        detail::tanh_block(a1, h);
        std::copy(b2_.begin(), b2_.end(), a2);
        for (std::size_t i = 0; i < h; ++i) {
            const double ai = a1[i];
            const double* col = &w2_[i * h];
            for (std::size_t j = 0; j < h; ++j) a2[j] += col[j] * ai;
        }
        detail::tanh_block(a2, h);
        double out = b3_;
        for (std::size_t i = 0; i < h; ++i) out += w3_[i] * a2[i];
        return scale_ * out;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t hidden_width() const noexcept { return width_; }
    double output_scale() const noexcept { return scale_; }

    friend bool operator==(const PriorField&, const PriorField&) = default;

private:
    std::size_t dim_ = 0;
    std::size_t width_ = 0;
    double scale_ = 0.0;
    std::vector<double> w1_, w2_, w3_, b1_, b2_;
    double b3_ = 0.0;
};

struct RPConfig {
    std::size_t members = 20;
    std::size_t hidden_width = 32;
    double output_scale = 1.0;
    std::vector<double> h0;  ///< base bandwidth h'_0 per dimension (unit cube)
    bool bootstrap = false;
    std::uint64_t seed = 0;

    void validate(std::size_t dim) const {
        if (members < 2) throw ConfigError("randomized prior needs at least 2 members");
        if (hidden_width == 0) throw ConfigError("randomized prior hidden width must be positive");
        if (!(output_scale >= 0.0)) throw ConfigError("randomized prior output scale must be >= 0");
        if (h0.size() != dim) throw ConfigError("randomized prior bandwidth/dimension mismatch");
        for (double h : h0)
            if (!(h > 0.0)) throw ConfigError("randomized prior bandwidth must be positive");
    }
};

/// Mean and sample standard deviation of the member predictions at one point.
struct EnsembleMoments {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Ensemble of (prior field + kernel regression on prior-adjusted labels).
///
/// Priors and bootstrap multisets are drawn from substreams keyed by the
/// dataset size, so a refit on the same data reproduces the same ensemble.
class RPEnsemble final : public Surrogate, public UncertaintyQuantifier {
public:
    explicit RPEnsemble(RPConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.members < 2) throw ConfigError("randomized prior needs at least 2 members");
    }

    void fit(const Dataset& data) override {
        if (data.empty()) throw StateError("randomized prior fit on empty dataset");
        cfg_.validate(data.dim());
        data_ = data;
        const std::size_t n = data.size();
        const std::size_t d = data.dim();
        const double rate = bandwidth_rate(n, d);
        inv_h_.resize(d);
        for (std::size_t i = 0; i < d; ++i) inv_h_[i] = 1.0 / (cfg_.h0[i] * rate);

        const std::uint64_t fit_key = detail::splitmix64(cfg_.seed ^ (0xA24BAED4963EE407ULL * n));
        priors_.clear();
        counts_.assign(cfg_.members, std::vector<double>(n, 1.0));
        residuals_.assign(cfg_.members, std::vector<double>(n));
        for (std::size_t m = 0; m < cfg_.members; ++m) {
            Rng prior_rng = Rng::substream(fit_key, Stream::prior_fields, m);
            priors_.push_back(PriorField::sample(prior_rng, d, cfg_.hidden_width, cfg_.output_scale));
            if (cfg_.bootstrap) {
                Rng boot = Rng::substream(fit_key, Stream::bootstrap, m);
                std::fill(counts_[m].begin(), counts_[m].end(), 0.0);
                for (std::size_t k = 0; k < n; ++k) counts_[m][boot.below(n)] += 1.0;
            }
            for (std::size_t i = 0; i < n; ++i)
                residuals_[m][i] = data.labels()[i] - priors_[m](data.point(i));
        }
        // Point-major copies so the prediction loop runs over members contiguously.
        const std::size_t members = cfg_.members;
        weight_.resize(n * members);
        weighted_residual_.resize(n * members);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t m = 0; m < members; ++m) {
                weight_[i * members + m] = counts_[m][i];
                weighted_residual_[i * members + m] = counts_[m][i] * residuals_[m][i];
            }
        }
    }

    /// Member m's prediction r_m(x) + f̂_m(x).
    std::vector<double> member_predictions(std::span<const double> x) const {
        require_fit();
        const std::size_t n = data_->size();
        const std::size_t members = cfg_.members;
        std::vector<double> num(members, 0.0), den(members, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            // The prior bandwidth is small, so most kernel values underflow to zero.
            const double k = detail::gaussian_kernel(x, data_->point(i), inv_h_);
            if (k == 0.0) continue;
            const double* w = &weight_[i * members];
            const double* wr = &weighted_residual_[i * members];
            for (std::size_t m = 0; m < members; ++m) {
                num[m] += k * wr[m];
                den[m] += k * w[m];
            }
        }
        std::vector<double> out(members);
        for (std::size_t m = 0; m < members; ++m)
            out[m] = priors_[m](x) + num[m] / detail::kernel_normalizer(den[m], n);
        return out;
    }

    EnsembleMoments moments(std::span<const double> x) const {
        const auto preds = member_predictions(x);
        double mean = 0.0;
        for (double p : preds) mean += p;
        mean /= static_cast<double>(preds.size());
        double ss = 0.0;
        for (double p : preds) ss += (p - mean) * (p - mean);
        return {mean, std::sqrt(ss / static_cast<double>(preds.size() - 1))};
    }

    double predict(std::span<const double> x) const override { return moments(x).mean; }
    double stddev(std::span<const double> x) const override { return moments(x).stddev; }

    /// Prior values alone at x, one per member.
    std::vector<double> prior_values(std::span<const double> x) const {
        require_fit();
        std::vector<double> out;
        for (const auto& p : priors_) out.push_back(p(x));
        return out;
    }

    const std::vector<PriorField>& priors() const noexcept { return priors_; }
    const std::vector<std::vector<double>>& bootstrap_counts() const noexcept { return counts_; }
    const RPConfig& config() const noexcept { return cfg_; }

    /// h'_n for the fitted dataset.
    std::vector<double> fitted_bandwidth() const {
        require_fit();
        return detail::inverse(inv_h_);
    }

private:
    void require_fit() const {
        if (!data_) throw StateError("randomized prior used before fit");
    }

    RPConfig cfg_;
    std::optional<Dataset> data_;
    std::vector<double> inv_h_;
    std::vector<PriorField> priors_;
    std::vector<std::vector<double>> counts_;
    std::vector<std::vector<double>> residuals_;
    std::vector<double> weight_;
    std::vector<double> weighted_residual_;
};

inline RPEnsemble rp_fit(const Dataset& data, RPConfig cfg) {
    RPEnsemble ens(std::move(cfg));
    ens.fit(data);
    return ens;
}

inline double rp_mean(std::span<const double> x, const RPEnsemble& ens) { return ens.predict(x); }
inline double rp_std(std::span<const double> x, const RPEnsemble& ens) { return ens.stddev(x); }

}  // namespace pseudobo
