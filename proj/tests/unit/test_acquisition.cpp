#include <gtest/gtest.h>

#include <cmath>

#include "pseudobo/acquisition.hpp"
#include "pseudobo/surrogates.hpp"
#include "pseudobo/uncertainty.hpp"
#include "support.hpp"

using namespace pseudobo;
using testing_support::normal_cdf_oracle;

TEST(NormalCdf, MatchesQuadratureOracle) {
    for (double z = -8.0; z <= 8.0; z += 0.25) EXPECT_NEAR(normal_cdf(z), normal_cdf_oracle(z), 1e-12) << z;
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
}

// Closed form checked against quadrature of the improvement density.
TEST(ExpectedImprovement, MatchesIntegralOracle) {
    for (double p : {-1.0, -0.2, 0.0, 0.3, 2.0})
        for (double s : {0.05, 0.5, 1.5})
            for (double tau : {0.0, 0.1}) {
                // E[max(Y - tau, 0)], Y ~ N(p, s^2), by Simpson over [tau, p + 12 s].
                const double lo = tau, hi = std::max(tau, p + 12.0 * s);
                const int n = 20000;
                const double h = (hi - lo) / n;
                auto g = [&](double y) { return (y - tau) * std::exp(-0.5 * std::pow((y - p) / s, 2)) / (s * std::sqrt(2 * M_PI)); };
                double acc = g(lo) + g(hi);
                for (int i = 1; i < n; ++i) acc += g(lo + i * h) * (i % 2 ? 4.0 : 2.0);
                EXPECT_NEAR(ei(p, s, tau), acc * h / 3.0, 1e-9) << p << " " << s << " " << tau;
            }
}

TEST(ExpectedImprovement, ZeroSigmaBranch) {
    EXPECT_EQ(ei(0.5, 0.0, 0.2), 0.3);
    EXPECT_EQ(ei(-0.5, 0.0, 0.0), 0.0);
    EXPECT_EQ(pi(0.5, 0.0, 0.2), 1.0);
    EXPECT_EQ(pi(0.2, 0.0, 0.2), 0.0);
}

TEST(ExpectedImprovement, FarTailStaysPositiveAndSmooth) {
    double prev = ei(-6.0 + 1e-9, 1.0, 0.0);
    EXPECT_NEAR(ei(-6.0 - 1e-9, 1.0, 0.0), prev, 1e-12);
    for (double z = -6.0; z > -30.0; z -= 0.5) {
        const double v = ei(z, 1.0, 0.0);
        EXPECT_GT(v, 0.0) << z;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

// Property: EI >= 0 and >= max(p - tau, 0) on a random grid.
TEST(ExpectedImprovement, NonnegativeAndDominatesGap) {
    Rng rng(1);
    for (int i = 0; i < 200000; ++i) {
        const double p = rng.uniform(-20.0, 20.0), s = rng.uniform(0.0, 10.0), tau = rng.uniform(0.0, 2.0);
        const double v = ei(p, s, tau);
        ASSERT_GE(v, 0.0);
        ASSERT_GE(v, std::max(p - tau, 0.0) - 1e-12);
    }
}

// dEI/dp = Φ((p - τ)/σ).
TEST(ExpectedImprovement, DerivativeMatchesFiniteDifference) {
    Rng rng(2);
    const double h = 1e-5;
    for (int i = 0; i < 5000; ++i) {
        const double p = rng.uniform(-3.0, 3.0), s = rng.uniform(0.05, 3.0), tau = rng.uniform(0.0, 0.5);
        const double fd = (ei(p + h, s, tau) - ei(p - h, s, tau)) / (2.0 * h);
        ASSERT_NEAR(fd, normal_cdf((p - tau) / s), 1e-5);
    }
}

// Improvement property along p_n = -1/n, sigma_n = 1/n.
TEST(Improvement, VanishesWithoutImprovement) {
    const auto pi_af = Acquisition::probability_of_improvement(0.01);
    const auto ei_af = Acquisition::expected_improvement();
    const auto ucb_af = Acquisition::upper_confidence_bound();
    double last_pi = 1.0, last_ei = 1.0, last_ucb = 1.0;
    for (std::size_t n = 10; n <= 1000000; n *= 10) {
        const double p = -1.0 / static_cast<double>(n), s = 1.0 / static_cast<double>(n);
        last_pi = pi_af(p, s, n);
        last_ei = ei_af(p, s, n);
        last_ucb = ucb_af(p, s, n);
    }
    EXPECT_LE(std::abs(last_pi), 1e-3);
    EXPECT_LE(std::abs(last_ei), 1e-3);
    EXPECT_LE(std::abs(last_ucb), 1e-3);
}

TEST(Improvement, PositiveUnderResidualUncertainty) {
    for (std::size_t n : {1u, 100u, 100000u}) {
        EXPECT_GT(Acquisition::expected_improvement()(-0.5, 0.3, n), 0.0);
        EXPECT_GT(Acquisition::probability_of_improvement()(-0.5, 0.3, n), 0.0);
        EXPECT_GT(Acquisition::upper_confidence_bound()(-0.5, 0.3, n), 0.0);
    }
}

TEST(UCB, Schedule) {
    UCBSchedule s;
    EXPECT_DOUBLE_EQ(s.beta(0), 2.0 * std::sqrt(std::log(2.0)));
    EXPECT_LT(s.beta(10), s.beta(11));
    s.constant = true;
    EXPECT_EQ(s.beta(1000), 2.0);
    EXPECT_THROW(Acquisition::upper_confidence_bound(0.0, UCBSchedule{0.0}), ConfigError);
}

// The improvement form ranks candidates like the classical p + β σ.
TEST(UCB, ArgmaxEquivalence) {
    Rng rng(3);
    const auto af = Acquisition::upper_confidence_bound();
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng.below(500);
        const double beta = UCBSchedule{}.beta(n);
        std::size_t a = 0, b = 0;
        double best_a = -1e300, best_b = -1e300;
        for (std::size_t i = 0; i < 50; ++i) {
            const double p = rng.uniform(-3.0, 1.0), s = rng.uniform(0.0, 2.0);
            const double va = af(p, s, n), vb = p + beta * s;
            if (va > best_a) best_a = va, a = i;
            if (vb > best_b) best_b = vb, b = i;
        }
        ASSERT_EQ(a, b);
    }
}

TEST(Acquisition, RejectsNegativeTolerance) {
    EXPECT_THROW(Acquisition::expected_improvement(-0.1), ConfigError);
    EXPECT_THROW(Acquisition::probability_of_improvement(-0.1), ConfigError);
    EXPECT_THROW(Acquisition::upper_confidence_bound(-0.1), ConfigError);
}

TEST(HybridAF, ConvexCombination) {
    const auto h = hybrid_af({Acquisition::expected_improvement(), Acquisition::uncertainty_only()}, {0.3, 0.7});
    EXPECT_NEAR(h(0.1, 0.4, 5), 0.3 * ei(0.1, 0.4, 0.0) + 0.7 * 0.4, 1e-15);
    EXPECT_THROW(hybrid_af({Acquisition::uncertainty_only()}, {0.5}), ConfigError);
    EXPECT_THROW(hybrid_af({Acquisition::uncertainty_only(), Acquisition::uncertainty_only()}, {1.2, -0.2}), ConfigError);
}

TEST(EWFunction, ScoreUsesPredictedImprovement) {
    Dataset data(1);
    data.add(Point{0.0}, 0.0);
    data.add(Point{1.0}, 2.0);
    EWFunction ew{std::make_shared<NearestNeighbor>(), std::make_shared<MinDistanceUQ>(),
                  Acquisition::expected_improvement(), {}};
    // At 0.3 the nearest label is -1, the incumbent label is 1; Δ = 0.3.
    EXPECT_NEAR(ew_score(Point{0.3}, data, ew), ei(-2.0, 0.3, 0.0), 1e-15);
    ew.zeta = [](double p) { return 0.5 * p; };
    EXPECT_NEAR(ew_score(Point{0.3}, data, ew), ei(-1.0, 0.3, 0.0), 1e-15);
}

TEST(EWFunction, Validation) {
    EWFunction ew{nullptr, std::make_shared<MinDistanceUQ>(), Acquisition::uncertainty_only(), {}};
    EXPECT_NO_THROW(ew.validate());
    ew.af = Acquisition::expected_improvement();
    EXPECT_THROW(ew.validate(), ConfigError);
    ew.sp = std::make_shared<NearestNeighbor>();
    ew.zeta = [](double p) { return p + 1.0; };
    EXPECT_THROW(ew.validate(), ConfigError);
    ew.zeta = {};
    ew.uq = nullptr;
    EXPECT_THROW(ew.validate(), ConfigError);
    EXPECT_THROW(ew_score(Point{0.1}, Dataset(1), EWFunction{}), StateError);
}
