#pragma once

#include <array>
#include <cmath>
#include <chrono>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/optimizer.hpp"
#include "pseudobo/random.hpp"

namespace pseudobo {

namespace bench {

inline void check_interval(double x, double lo, double hi, const char* name) {
    if (!(x >= lo && x <= hi))
        throw DomainError(std::string(name) + ": x = " + std::to_string(x) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

inline void check_dim(std::span<const double> x, std::size_t d, const char* name) {
    if (x.size() != d)
        throw ConfigError(std::string(name) + " expects " + std::to_string(d) + " coordinates, got " +
                          std::to_string(x.size()));
}

inline void check_box(std::span<const double> x, double lo, double hi, const char* name) {
    for (double v : x) check_interval(v, lo, hi, name);
}

inline constexpr double pi = std::numbers::pi;
inline constexpr double e = std::numbers::e;

/// (sin πw)^2 + (w-1)^2 (1 + sin(2πw)^2), w = 1 + (x-1)/4, x in [-10, 10].
inline double f1(double x) {
    check_interval(x, -10.0, 10.0, "f1");
    const double w = 1.0 + (x - 1.0) / 4.0;
    const double s = std::sin(pi * w);
    const double s2 = std::sin(2.0 * pi * w);
    return s * s + (w - 1.0) * (w - 1.0) * (1.0 + s2 * s2);
}

/// -20 exp(-0.2|x|) - exp(cos 2πx) + 20 - e, x in [-10, 5].
inline double f2(double x) {
    check_interval(x, -10.0, 5.0, "f2");
    return -20.0 * std::exp(-0.2 * std::abs(x)) - std::exp(std::cos(2.0 * pi * x)) + 20.0 - e;
}

/// sin(10πx)/(2x) + (x-1)^4, x in [0.5, 2.5].
inline double f3(double x) {
    check_interval(x, 0.5, 2.5, "f3");
    const double t = x - 1.0;
    return std::sin(10.0 * pi * x) / (2.0 * x) + t * t * t * t;
}

inline double goldstein_price(std::span<const double> v) {
    check_dim(v, 2, "goldstein-price");
    check_box(v, -2.0, 2.0, "goldstein-price");
    const double x = v[0], y = v[1];
    const double a = 1.0 + (x + y + 1.0) * (x + y + 1.0) *
                               (19.0 - 14.0 * x + 3.0 * x * x - 14.0 * y + 6.0 * x * y + 3.0 * y * y);
    const double b = 30.0 + (2.0 * x - 3.0 * y) * (2.0 * x - 3.0 * y) *
                                (18.0 - 32.0 * x + 12.0 * x * x + 48.0 * y - 36.0 * x * y + 27.0 * y * y);
    return a * b;
}

inline double dropwave(std::span<const double> v) {
    check_dim(v, 2, "dropwave");
    check_box(v, -5.12, 5.12, "dropwave");
    const double r2 = v[0] * v[0] + v[1] * v[1];
    return -(1.0 + std::cos(12.0 * std::sqrt(r2))) / (0.5 * r2 + 2.0);
}

inline double hartmann6(std::span<const double> x) {
    static constexpr std::array<double, 4> alpha = {1.0, 1.2, 3.0, 3.2};
    static constexpr std::array<std::array<double, 6>, 4> a = {{
        {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
        {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
        {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
        {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
    }};
    static constexpr std::array<std::array<double, 6>, 4> p = {{
        {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
        {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
        {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
        {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
    }};
    check_dim(x, 6, "hartmann6");
    check_box(x, 0.0, 1.0, "hartmann6");
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < 6; ++j) inner += a[i][j] * (x[j] - p[i][j]) * (x[j] - p[i][j]);
        s += alpha[i] * std::exp(-inner);
    }
    return -s;
}

inline double ackley(std::span<const double> x, double lo = -5.0, double hi = 10.0) {
    if (x.empty()) throw ConfigError("ackley needs at least one coordinate");
    check_box(x, lo, hi, "ackley");
    const double d = static_cast<double>(x.size());
    double sq = 0.0, cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(2.0 * pi * v);
    }
    return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 + e;
}

}  // namespace bench

struct Benchmark {
    std::string name;
    Box box;
    Objective evaluator;
    std::optional<double> f_star;
    std::optional<Point> x_star;

    std::size_t dim() const { return box.dim(); }
    double operator()(std::span<const double> x) const { return evaluator(x); }
};

inline const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names = {"f1", "f2", "f3", "goldstein-price", "dropwave",
                                                   "hartmann6", "ackley10"};
    return names;
}

/// Looks up a benchmark. "ackley<d>" gives Ackley in d dimensions on [-5, 10]^d.
inline Benchmark make_benchmark(const std::string& name) {
    auto scalar = [](double (*f)(double), const char* nm) {
        return [f, nm](std::span<const double> x) {
            bench::check_dim(x, 1, nm);
            return f(x[0]);
        };
    };
    if (name == "f1") return {"f1", Box({-10.0}, {10.0}), scalar(bench::f1, "f1"), 0.0, Point{1.0}};
    if (name == "f2") return {"f2", Box({-10.0}, {5.0}), scalar(bench::f2, "f2"), -2.0 * bench::e, Point{0.0}};
    if (name == "f3")
        return {"f3", Box({0.5}, {2.5}), scalar(bench::f3, "f3"), -0.8690111349894999, Point{0.5485634444853305}};
    if (name == "goldstein-price")
        return {"goldstein-price", Box::uniform(2, -2.0, 2.0), bench::goldstein_price, 3.0, Point{0.0, -1.0}};
    if (name == "dropwave") return {"dropwave", Box::uniform(2, -5.12, 5.12), bench::dropwave, -1.0, Point{0.0, 0.0}};
    if (name == "hartmann6")
        return {"hartmann6", Box::unit(6), bench::hartmann6, -3.3223680114155125,
                Point{0.20168950923409584, 0.15001068876417922, 0.4768739724329622, 0.275332428312954,
                      0.3116516115751367, 0.6573005293804641}};
    if (name.rfind("ackley", 0) == 0) {
        std::size_t d = 10;
        if (name.size() > 6) {
            try {
                std::size_t used = 0;
                d = std::stoul(name.substr(6), &used);
                if (used != name.size() - 6) throw ConfigError("");
            } catch (const std::exception&) {
                throw ConfigError("unknown benchmark: " + name);
            }
        }
        if (d == 0) throw ConfigError("ackley dimension must be positive");
        return {name, Box::uniform(d, -5.0, 10.0),
                [d](std::span<const double> x) {
                    bench::check_dim(x, d, "ackley");
                    return bench::ackley(x);
                },
                0.0, Point(d, 0.0)};
    }
    throw ConfigError("unknown benchmark: " + name);
}

/// Uniform i.i.d. queries in the box; same trace format as run().
inline RunTrace random_search(const Objective& objective, const Box& box, std::size_t budget,
                              std::uint64_t seed, Direction direction = Direction::minimize,
                              std::optional<double> f_star = std::nullopt) {
    if (budget < 1) throw ConfigError("random search budget must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = Rng::substream(seed, Stream::random_search);
    RunTrace trace;
    trace.dim = box.dim();
    trace.direction = direction;
    for (std::size_t t = 0; t < budget; ++t) {
        Point x(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i) x[i] = rng.uniform(box.lower()[i], box.upper()[i]);
        const double y = objective(x);
        trace.append(std::move(x), y,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    if (f_star) trace = regret_metrics(std::move(trace), *f_star);
    return trace;
}

}  // namespace pseudobo
