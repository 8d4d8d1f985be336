#include <gtest/gtest.h>

#include <cmath>

#include "pseudobo/surrogates.hpp"
#include "support.hpp"

using namespace pseudobo;
using testing_support::random_dataset;
using testing_support::random_point;
using testing_support::solve_dense;

namespace {

double se(const Point& a, const Point& b, double l) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-0.5 * s / (l * l));
}

std::vector<std::vector<double>> gram(const Dataset& data, double l, double jitter) {
    const std::size_t n = data.size();
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k[i][j] = se(data.points()[i], data.points()[j], l) + (i == j ? jitter : 0.0);
    return k;
}

// log det by elimination with partial pivoting (independent of the Cholesky path).
double log_det(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        s += std::log(std::abs(a[c][c]));
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return s;
}

// Plain lower Cholesky, used only to draw GP sample paths.
std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
        }
    return l;
}

double gaussian(Rng& rng) {
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

TEST(Bandwidth, ScheduleEndpoints) {
    const auto s = BandwidthSchedule::uniform(2, 0.05, 0.2);
    // n = 16, d = 2: rate 16^{-1/4} = 1/2.
    const auto near = bandwidth(s, 16, 2, 0.0);
    EXPECT_DOUBLE_EQ(near[0], 0.025);
    const auto far = bandwidth(s, 16, 2, 100.0);
    EXPECT_DOUBLE_EQ(far[1], 0.1);
    const double blend = 1.0 - std::exp(-0.1 * 16);
    EXPECT_NEAR(bandwidth(s, 16, 2, 0.1)[0], 0.5 * (0.05 + blend * 0.15), 1e-15);
}

// Property: the bandwidth is nondecreasing in the distance to the data.
TEST(Bandwidth, MonotoneInDistance) {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        const double lo = rng.uniform(0.01, 0.3), hi = lo + rng.uniform(0.0, 0.5);
        const auto s = BandwidthSchedule::uniform(1, lo, hi);
        const std::size_t n = 1 + rng.below(500);
        const double d1 = rng.uniform(0.0, 1.0), d2 = d1 + rng.uniform(0.0, 1.0);
        EXPECT_LE(bandwidth(s, n, 3, d1)[0], bandwidth(s, n, 3, d2)[0] + 1e-15);
    }
}

TEST(Bandwidth, RejectsBadSchedules) {
    EXPECT_THROW(KernelRegression(BandwidthSchedule::uniform(2, 0.3, 0.2)), ConfigError);
    EXPECT_THROW(KernelRegression(BandwidthSchedule::uniform(2, 0.0, 0.2)), ConfigError);
    EXPECT_THROW(KernelRegression(BandwidthSchedule{}), ConfigError);
}

TEST(KernelRegression, MatchesDirectFormula) {
    Rng rng(4);
    const auto data = random_dataset(rng, 25, 2, [](const Point& x) { return std::sin(5 * x[0]) + x[1]; });
    const auto s = BandwidthSchedule::uniform(2, 0.05, 0.2);
    for (int t = 0; t < 50; ++t) {
        const auto x = random_point(rng, 2);
        double dmin = 1e9;
        for (const auto& p : data.points()) dmin = std::min(dmin, std::hypot(x[0] - p[0], x[1] - p[1]));
        const double rate = std::pow(25.0, -0.25);
        const double h = ((1.0 - std::exp(-25.0 * dmin)) * 0.15 + 0.05) * rate;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double w = std::exp(-0.5 * (std::pow(x[0] - data.points()[i][0], 2) +
                                              std::pow(x[1] - data.points()[i][1], 2)) / (h * h));
            num += w * data.labels()[i];
            den += w;
        }
        EXPECT_NEAR(kernel_regression_predict(x, data, s), num / den, 1e-12);
    }
}

TEST(KernelRegression, ZeroSupportFallsBackToZero) {
    EXPECT_DOUBLE_EQ(detail::kernel_normalizer(0.0, 4), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(detail::kernel_normalizer(0.5, 4), 0.5);
    Dataset data(1);
    data.add(Point{0.0}, 1.0);
    data.add(Point{0.01}, 2.0);
    // Tiny bandwidth and a far query: all kernels underflow, prediction is the label mean 0.
    const auto s = BandwidthSchedule::uniform(1, 1e-4, 1e-4);
    EXPECT_EQ(kernel_regression_predict(Point{1.0}, data, s), 0.0);
}

// Property: the prediction is a convex combination of the labels.
TEST(KernelRegression, PredictionWithinLabelRange) {
    Rng rng(6);
    for (int t = 0; t < 40; ++t) {
        const std::size_t d = 1 + rng.below(6);
        const auto data = testing_support::noise_dataset(rng, 5 + rng.below(40), d);
        KernelRegression kr(BandwidthSchedule::uniform(d, 0.05, 0.2));
        kr.fit(data);
        const auto [lo, hi] = std::minmax_element(data.labels().begin(), data.labels().end());
        for (int k = 0; k < 20; ++k) {
            const double p = kr.predict(random_point(rng, d));
            EXPECT_GE(p, std::min(*lo, 0.0) - 1e-12);
            EXPECT_LE(p, std::max(*hi, 0.0) + 1e-12);
        }
    }
}

// Local consistency: error at fixed interior points shrinks as data accumulate.
TEST(KernelRegression, LocalConsistencyUnderDoubling) {
    auto f = [](const Point& x) { return std::sin(3.0 * x[0]) + 0.5 * x[0]; };
    const auto s = BandwidthSchedule::uniform(1, 0.05, 0.2);
    std::vector<double> errors;
    for (std::size_t n = 50; n <= 3200; n *= 2) {
        double err = 0.0;
        for (int seed = 0; seed < 5; ++seed) {
            Rng rng(100 + seed);
            const auto data = random_dataset(rng, n, 1, f);
            for (double x0 : {0.2, 0.35, 0.5, 0.65, 0.8})
                err += std::abs(data.to_value(kernel_regression_predict(Point{x0}, data, s)) - f(Point{x0}));
        }
        errors.push_back(err / 25.0);
    }
    for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_LT(errors[i], errors[i - 1] * 1.05) << i;
    EXPECT_LT(errors.back(), 0.02);
    EXPECT_LT(errors.back(), 0.5 * errors.front());
}

TEST(NearestNeighbor, ReturnsNearestLabel) {
    Dataset data(1);
    data.add(Point{0.1}, 1.0);
    data.add(Point{0.9}, 3.0);
    NearestNeighbor nn;
    nn.fit(data);
    EXPECT_EQ(nn.predict(Point{0.2}), data.labels()[0]);
    EXPECT_EQ(nn.predict(Point{0.7}), data.labels()[1]);
    EXPECT_THROW(NearestNeighbor{}.predict(Point{0.1}), StateError);
}

TEST(GaussianProcess, MeanMatchesDenseSolve) {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const std::size_t d = 1 + rng.below(4);
        const auto data = testing_support::noise_dataset(rng, 12, d);
        GPConfig cfg;
        cfg.lengthscale = {0.3};
        const auto alpha = solve_dense(gram(data, 0.3, cfg.jitter), data.labels());
        GaussianProcess gp(cfg, false);
        gp.fit(data);
        for (int k = 0; k < 10; ++k) {
            const auto x = random_point(rng, d);
            double m = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i) m += se(x, data.points()[i], 0.3) * alpha[i];
            EXPECT_NEAR(gp.predict(x), m, 1e-7);
            EXPECT_NEAR(gp_posterior_mean(x, data, cfg), m, 1e-7);
        }
    }
}

TEST(GaussianProcess, StdVanishesAtDataAndIsBounded) {
    Rng rng(12);
    const auto data = testing_support::noise_dataset(rng, 15, 2);
    GaussianProcess gp(GPConfig{}, false);
    gp.fit(data);
    for (const auto& p : data.points()) EXPECT_LT(gp.stddev(p), 2e-3);
    for (int k = 0; k < 100; ++k) {
        const double s = gp.stddev(random_point(rng, 2));
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0 + 1e-12);
    }
}

TEST(GaussianProcess, LogMarginalLikelihoodOracle) {
    Rng rng(13);
    const auto data = testing_support::noise_dataset(rng, 10, 2);
    for (double l : {0.05, 0.2, 1.0}) {
        GPConfig cfg;
        cfg.lengthscale = {l};
        const auto k = gram(data, l, cfg.jitter);
        const auto alpha = solve_dense(k, data.labels());
        double quad = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) quad += data.labels()[i] * alpha[i];
        const double expected = -0.5 * quad - 0.5 * log_det(k) - 5.0 * std::log(2.0 * M_PI);
        EXPECT_NEAR(detail::log_marginal_likelihood(data, detail::factorize(data, cfg)), expected, 1e-10 * std::abs(expected));
    }
}

TEST(GaussianProcess, JitterEscalatesOnDuplicatePoints) {
    Dataset data(1);
    for (int i = 0; i < 5; ++i) data.add(Point{0.5}, static_cast<double>(i));
    GPConfig cfg;
    cfg.jitter = 1e-300;
    GaussianProcess gp(cfg, false);
    EXPECT_THROW(gp.fit(data), NumericalError);
    GaussianProcess ok(GPConfig{}, false);
    ok.fit(data);
    EXPECT_NEAR(ok.predict(Point{0.5}), 0.0, 1e-6);
}

// Lengthscale recovery from sample paths of a known GP prior.
TEST(GaussianProcess, LengthscaleRecovery) {
    const double truth = 0.2;
    int hits = 0;
    for (int seed = 0; seed < 10; ++seed) {
        Rng rng(500 + seed);
        Dataset xs(1);
        std::vector<Point> pts;
        for (int i = 0; i < 40; ++i) pts.push_back(random_point(rng, 1));
        std::vector<std::vector<double>> k(40, std::vector<double>(40));
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j < 40; ++j) k[i][j] = se(pts[i], pts[j], truth) + (i == j ? 1e-8 : 0.0);
        const auto l = cholesky(k);
        std::vector<double> z(40);
        for (auto& v : z) v = gaussian(rng);
        for (int i = 0; i < 40; ++i) {
            double y = 0.0;
            for (int j = 0; j <= i; ++j) y += l[i][j] * z[j];
            xs.add(pts[i], y);
        }
        const double fit = gp_fit_lengthscale(xs, GPConfig{});
        hits += fit > truth / 2.0 && fit < truth * 2.0;
    }
    EXPECT_GE(hits, 8);
}

TEST(GaussianProcess, RejectsBadConfig) {
    GPConfig c;
    c.jitter = 0.0;
    EXPECT_THROW(GaussianProcess(c, false), ConfigError);
    c = GPConfig{};
    c.lengthscale = {-1.0};
    EXPECT_THROW(GaussianProcess(c, false), ConfigError);
    Dataset one(1);
    one.add(Point{0.1}, 1.0);
    EXPECT_THROW(gp_fit_lengthscale(one, GPConfig{}), StateError);
}

TEST(HybridSurrogate, AffineCombination) {
    Rng rng(14);
    const auto data = testing_support::noise_dataset(rng, 20, 2);
    auto kr = std::make_shared<KernelRegression>(BandwidthSchedule::uniform(2, 0.05, 0.2));
    auto nn = std::make_shared<NearestNeighbor>();
    HybridSurrogate hy({kr, nn}, {1.5, -0.5});
    hy.fit(data);
    for (int k = 0; k < 20; ++k) {
        const auto x = random_point(rng, 2);
        EXPECT_NEAR(hy.predict(x), 1.5 * kr->predict(x) - 0.5 * nn->predict(x), 1e-14);
    }
    EXPECT_THROW(HybridSurrogate({kr, nn}, {0.5, 0.4}), ConfigError);
    EXPECT_THROW(HybridSurrogate({kr}, {0.5, 0.5}), ConfigError);
}

TEST(CompositeSurrogate, OuterFunctionOfParts) {
    Rng rng(15);
    Dataset a(1), b(2);
    for (int i = 0; i < 10; ++i) {
        a.add(random_point(rng, 1), rng.uniform(0.0, 3.0));
        b.add(random_point(rng, 2), rng.uniform(-1.0, 1.0));
    }
    auto na = std::make_shared<NearestNeighbor>();
    auto nb = std::make_shared<NearestNeighbor>();
    CompositeSurrogate c({na, nb}, {1, 2},
                         [](std::span<const double> v, std::span<const Point> in) { return v[0] * v[1] + in[0][0]; }, 2);
    std::vector<Dataset> ds = {a, b};
    c.fit(ds);
    const Point x = {0.3, 0.6, 0.2};
    const double va = a.to_value(nearest_neighbor_predict(Point{0.3}, a));
    const double vb = b.to_value(nearest_neighbor_predict(Point{0.6, 0.2}, b));
    EXPECT_NEAR(c.predict(x), va * vb + 0.3, 1e-12);
    EXPECT_THROW(c.predict(Point{0.1, 0.2}), ConfigError);
    EXPECT_THROW(CompositeSurrogate({na}, {1, 2}, {}, 2), ConfigError);
}
