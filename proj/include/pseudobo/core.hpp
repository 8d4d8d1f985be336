#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudobo/errors.hpp"

namespace pseudobo {

using Point = std::vector<double>;

enum class Direction { minimize, maximize };

inline const char* to_string(Direction d) { return d == Direction::minimize ? "min" : "max"; }

/// Axis-aligned search box in objective units.
class Box {
public:
    Box(std::vector<double> lower, std::vector<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.empty()) throw ConfigError("box must have at least one dimension");
        if (lower_.size() != upper_.size())
            throw ConfigError("box lower/upper length mismatch: " + std::to_string(lower_.size()) +
                              " vs " + std::to_string(upper_.size()));
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
                throw ConfigError("box dimension " + std::to_string(i) + " needs finite lower < upper");
        }
    }

    static Box uniform(std::size_t dim, double lo, double hi) {
        return Box(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
    }
    static Box unit(std::size_t dim) { return uniform(dim, 0.0, 1.0); }

    std::size_t dim() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    double range(std::size_t i) const { return upper_[i] - lower_[i]; }

    bool contains(std::span<const double> p) const {
        if (p.size() != dim()) return false;
        for (std::size_t i = 0; i < dim(); ++i)
            if (!(p[i] >= lower_[i] && p[i] <= upper_[i])) return false;
        return true;
    }

    friend bool operator==(const Box&, const Box&) = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

/// Maps a raw point into the unit cube. Throws DomainError outside the box.
inline Point normalize(std::span<const double> point, const Box& box) {
    if (point.size() != box.dim())
        throw DomainError("point has " + std::to_string(point.size()) + " coordinates, box has " +
                          std::to_string(box.dim()));
    Point out(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (!(point[i] >= box.lower()[i] && point[i] <= box.upper()[i]))
            throw DomainError("coordinate " + std::to_string(i) + " = " + std::to_string(point[i]) +
                              " outside [" + std::to_string(box.lower()[i]) + ", " +
                              std::to_string(box.upper()[i]) + "]");
        out[i] = (point[i] - box.lower()[i]) / box.range(i);
    }
    return out;
}

inline Point denormalize(std::span<const double> unit, const Box& box) {
    if (unit.size() != box.dim())
        throw DomainError("unit point dimension mismatch");
    Point out(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
        // Endpoints map exactly so that boxes round-trip bit for bit at the corners.
        if (unit[i] == 0.0)
            out[i] = box.lower()[i];
        else if (unit[i] == 1.0)
            out[i] = box.upper()[i];
        else
            out[i] = box.lower()[i] + unit[i] * box.range(i);
    }
    return out;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

/// Quartiles by linear interpolation between order statistics of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw StateError("quantile of empty sequence");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Clips the lower tail: values below q3 - k (q3 - q1) are replaced by that threshold.
inline std::vector<double> winsorize(std::span<const double> values, double k = 5.0) {
    if (values.empty()) throw StateError("winsorize of empty sequence");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    const double threshold = q3 - k * (q3 - q1);
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = std::max(v, threshold);
    return out;
}

/// Evaluation history D_n in the unit cube.
///
/// Raw values are kept as observed. Labels are the z-scored values (population
/// std), sign-flipped for minimization so that every model maximizes. All
/// stored values are finite; the loop filters non-finite observations.
class Dataset {
public:
    explicit Dataset(std::size_t dim, Direction direction = Direction::maximize)
        : dim_(dim), direction_(direction) {
        if (dim == 0) throw ConfigError("dataset dimension must be positive");
    }

    /// Winsorize (in the larger-is-better orientation) before standardizing.
    void set_winsorization(std::optional<double> k) {
        winsor_k_ = k;
        restandardize();
    }

    void add(Point x, double value) {
        if (x.size() != dim_)
            throw DomainError("dataset point has dimension " + std::to_string(x.size()) +
                              ", expected " + std::to_string(dim_));
        if (!std::isfinite(value)) throw DomainError("dataset values must be finite");
        points_.push_back(std::move(x));
        values_.push_back(value);
        const std::size_t i = values_.size() - 1;
        if (i == 0 || better(value, values_[incumbent_])) incumbent_ = i;
        restandardize();
    }

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    Direction direction() const noexcept { return direction_; }

    const std::vector<Point>& points() const noexcept { return points_; }
    std::span<const double> point(std::size_t i) const { return points_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// z-scores of the raw values (raw orientation).
    const std::vector<double>& standardized_values() const noexcept { return z_; }

    /// Model-space labels: standardized, larger is better.
    const std::vector<double>& labels() const noexcept { return labels_; }

    /// Population standard deviation of the labels (1, or 0 when constant).
    double label_std() const noexcept { return label_std_; }

    std::size_t incumbent_index() const {
        if (empty()) throw StateError("incumbent of empty dataset");
        return incumbent_;
    }
    double incumbent_value() const { return values_[incumbent_index()]; }
    /// max over stored labels; with winsorization this is still the incumbent's label.
    double incumbent_label() const { return labels_[incumbent_index()]; }

    double value_mean() const noexcept { return mean_; }
    double value_scale() const noexcept { return scale_; }

    /// Converts a model-space label back to objective units.
    double to_value(double label) const {
        const double z = direction_ == Direction::minimize ? -label : label;
        return mean_ + scale_ * z;
    }

    bool better(double a, double b) const {
        return direction_ == Direction::minimize ? a < b : a > b;
    }

private:
    void restandardize() {
        const std::size_t n = values_.size();
        z_.assign(n, 0.0);
        labels_.assign(n, 0.0);
        if (n == 0) return;
        const double sign = direction_ == Direction::minimize ? -1.0 : 1.0;
        std::vector<double> oriented(n);
        for (std::size_t i = 0; i < n; ++i) oriented[i] = sign * values_[i];
        if (winsor_k_) oriented = winsorize(oriented, *winsor_k_);

        double m = 0.0;
        for (double v : oriented) m += v;
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : oriented) ss += (v - m) * (v - m);
        const double s = std::sqrt(ss / static_cast<double>(n));
        // Relative floor so that float noise around a constant is treated as constant.
        const bool constant = !(s > 1e-12 * std::max(1.0, std::abs(m)));
        scale_ = constant ? 1.0 : s;
        mean_ = sign * m;
        label_std_ = constant ? 0.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            labels_[i] = constant ? 0.0 : (oriented[i] - m) / s;
            z_[i] = sign * labels_[i];
        }
    }

    std::size_t dim_;
    Direction direction_;
    std::optional<double> winsor_k_;
    std::vector<Point> points_;
    std::vector<double> values_;
    std::vector<double> z_;
    std::vector<double> labels_;
    std::size_t incumbent_ = 0;
    double mean_ = 0.0;
    double scale_ = 1.0;
    double label_std_ = 0.0;
};

/// Δ(x, X_n): Euclidean distance to the nearest stored point.
inline double min_distance(std::span<const double> x, const Dataset& data) {
    if (data.empty()) throw StateError("min_distance on empty dataset");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : data.points()) best = std::min(best, squared_distance(x, p));
    return std::sqrt(best);
}

struct TraceRecord {
    std::size_t iter = 0;
    Point x;  ///< raw coordinates
    double value = 0.0;
    double best = 0.0;
    std::optional<double> simple_regret;
    std::optional<double> cumulative_regret;
    double elapsed_s = 0.0;

    bool finite() const { return std::isfinite(value); }
};

struct RunTrace {
    std::size_t dim = 0;
    Direction direction = Direction::minimize;
    std::vector<TraceRecord> iterations;

    std::size_t size() const noexcept { return iterations.size(); }
    double final_best() const {
        return iterations.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : iterations.back().best;
    }

    /// Appends a record and maintains best-so-far (non-finite values never become best).
    void append(Point x, double value, double elapsed_s) {
        TraceRecord r;
        r.iter = iterations.size();
        r.x = std::move(x);
        r.value = value;
        r.elapsed_s = elapsed_s;
        const double prev = iterations.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : iterations.back().best;
        if (!std::isfinite(value))
            r.best = prev;
        else if (std::isnan(prev))
            r.best = value;
        else
            r.best = direction == Direction::minimize ? std::min(prev, value) : std::max(prev, value);
        iterations.push_back(std::move(r));
    }
};

/// Fills simple regret |best - f*| and cumulative regret Σ |f(x_s) - f*|.
/// Non-finite observations contribute nothing to the cumulative sum.
inline RunTrace regret_metrics(RunTrace trace, double f_star) {
    if (!std::isfinite(f_star)) throw DomainError("f_star must be finite");
    double cum = 0.0;
    for (auto& r : trace.iterations) {
        if (r.finite()) cum += std::abs(r.value - f_star);
        r.cumulative_regret = cum;
        r.simple_regret = std::isfinite(r.best) ? std::optional<double>(std::abs(r.best - f_star))
                                                : std::nullopt;
    }
    return trace;
}

}  // namespace pseudobo
