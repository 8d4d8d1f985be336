#include <gtest/gtest.h>

#include <cmath>

#include "pseudobo/uncertainty.hpp"
#include "support.hpp"

using namespace pseudobo;
using testing_support::noise_dataset;
using testing_support::random_point;

namespace {

RPConfig rp_config(std::size_t d, std::uint64_t seed) {
    RPConfig c;
    c.h0.assign(d, 0.005);
    c.bootstrap = true;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(MinDistanceUQ, ScaledDistance) {
    Dataset data(2);
    data.add(Point{0.0, 0.0}, 1.0);
    data.add(Point{1.0, 1.0}, 3.0);
    // Population std of {1, 3} is 1, so labels are ±1 and label_std is 1.
    EXPECT_DOUBLE_EQ(min_distance_uq(Point{0.3, 0.4}, data), 0.5);
    MinDistanceUQ md;
    md.fit(data);
    EXPECT_DOUBLE_EQ(md.stddev(Point{1.0, 0.0}), 1.0);
    EXPECT_EQ(md.stddev(Point{1.0, 1.0}), 0.0);
}

TEST(MinDistanceUQ, ConstantLabelsGiveZero) {
    Dataset data(1);
    data.add(Point{0.1}, 2.0);
    data.add(Point{0.9}, 2.0);
    EXPECT_EQ(min_distance_uq(Point{0.5}, data), 0.0);
}

TEST(AlphaMix, Values) {
    EXPECT_EQ(alpha_mix(0.0, 100), 1.0);
    EXPECT_DOUBLE_EQ(alpha_mix(0.1, 10), std::exp(-1.0));
    EXPECT_LT(alpha_mix(0.1, 1000), 1e-40);
}

TEST(HybridUQ, MatchesFormula) {
    Rng rng(1);
    const auto data = noise_dataset(rng, 30, 2);
    auto rp = std::make_shared<RPEnsemble>(rp_config(2, 3));
    HybridUQ uq(rp);
    uq.fit(data);
    for (int k = 0; k < 50; ++k) {
        const auto x = random_point(rng, 2);
        const double delta = min_distance(x, data);
        const double a = std::exp(-30.0 * delta);
        EXPECT_NEAR(uq.stddev(x), a * delta + (1.0 - a) * rp->stddev(x), 1e-12);
    }
}

// Generalized no-empty-ball: exactly zero on the data, positive off it.
TEST(HybridUQ, GnebProperty) {
    Rng rng(2);
    int checked = 0;
    for (int t = 0; t < 30; ++t) {
        const std::size_t d = std::array<std::size_t, 3>{1, 2, 6}[t % 3];
        const auto data = noise_dataset(rng, 5 + rng.below(40), d);
        HybridUQ uq(rp_config(d, t));
        uq.fit(data);
        for (const auto& p : data.points()) ASSERT_EQ(uq.stddev(p), 0.0);
        for (int k = 0; k < 200; ++k) {
            const auto x = random_point(rng, d);
            if (min_distance(x, data) < 0.1) continue;
            ASSERT_GT(uq.stddev(x), 0.0);
            ++checked;
        }
    }
    EXPECT_GT(checked, 1000);
}

TEST(HybridUQ, RequiresComponentAndFit) {
    EXPECT_THROW(HybridUQ(std::shared_ptr<UncertaintyQuantifier>{}), ConfigError);
    HybridUQ uq(rp_config(1, 0));
    EXPECT_THROW(uq.stddev(Point{0.5}), StateError);
    EXPECT_THROW(uq.fit(Dataset(1)), StateError);
}

TEST(ConvexUQ, WeightsAndValue) {
    Rng rng(3);
    const auto data = noise_dataset(rng, 10, 1);
    auto md = std::make_shared<MinDistanceUQ>();
    auto gp = std::make_shared<GaussianProcess>(GPConfig{}, false);
    ConvexUQ c({md, gp}, {0.25, 0.75});
    c.fit(data);
    const Point x = {0.37};
    EXPECT_NEAR(c.stddev(x), 0.25 * md->stddev(x) + 0.75 * gp->stddev(x), 1e-14);
    EXPECT_NEAR(gp->stddev(x), gp_posterior_std(x, data, GPConfig{}), 1e-14);
    EXPECT_THROW(ConvexUQ({md, gp}, {1.5, -0.5}), ConfigError);
}

TEST(CompositeUQ, TakesMaximum) {
    Dataset a(1), b(2);
    a.add(Point{0.0}, 0.0);
    a.add(Point{1.0}, 2.0);
    b.add(Point{0.0, 0.0}, 0.0);
    b.add(Point{1.0, 1.0}, 2.0);
    CompositeUQ c({std::make_shared<MinDistanceUQ>(), std::make_shared<MinDistanceUQ>()});
    std::vector<Dataset> ds = {a, b};
    c.fit(ds);
    std::vector<Point> parts = {Point{0.2}, Point{0.0, 0.5}};
    EXPECT_DOUBLE_EQ(c.stddev(parts), 0.5);
    parts = {Point{0.4}, Point{0.0, 0.1}};
    EXPECT_DOUBLE_EQ(c.stddev(parts), 0.4);
    parts.pop_back();
    EXPECT_THROW(c.stddev(parts), ConfigError);
}
