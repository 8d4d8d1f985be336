#include <gtest/gtest.h>

#include <cmath>

#include "pseudobo/benchmarks.hpp"
#include "support.hpp"

using namespace pseudobo;

namespace {

// Dense grid followed by golden-section refinement around the best cell.
double grid_min(double (*f)(double), double lo, double hi, double* arg = nullptr) {
    const int n = 2000000;
    double best = 1e300, bx = lo;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double v = f(x);
        if (v < best) best = v, bx = x;
    }
    double a = std::max(lo, bx - (hi - lo) / n), b = std::min(hi, bx + (hi - lo) / n);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) < f(d))
            b = d;
        else
            a = c;
    }
    if (arg) *arg = 0.5 * (a + b);
    return std::min(best, f(0.5 * (a + b)));
}

}  // namespace

TEST(Benchmarks, OneDimensionalOptimaAgainstGrid) {
    double x;
    EXPECT_NEAR(grid_min(bench::f1, -10.0, 10.0, &x), *make_benchmark("f1").f_star, 1e-12);
    EXPECT_NEAR(x, 1.0, 1e-6);
    EXPECT_NEAR(grid_min(bench::f2, -10.0, 5.0, &x), *make_benchmark("f2").f_star, 1e-10);
    EXPECT_NEAR(x, 0.0, 1e-6);
    EXPECT_NEAR(grid_min(bench::f3, 0.5, 2.5, &x), *make_benchmark("f3").f_star, 1e-12);
    EXPECT_NEAR(x, *make_benchmark("f3").x_star->begin(), 1e-6);
    EXPECT_NEAR(*make_benchmark("f3").f_star, -0.869, 1e-3);
}

TEST(Benchmarks, KnownOptimaAttained) {
    for (const auto& name : benchmark_names()) {
        const auto b = make_benchmark(name);
        ASSERT_TRUE(b.f_star && b.x_star) << name;
        EXPECT_NEAR(b(*b.x_star), *b.f_star, 1e-9) << name;
    }
    EXPECT_DOUBLE_EQ(bench::goldstein_price(Point{0.0, -1.0}), 3.0);
    EXPECT_DOUBLE_EQ(bench::dropwave(Point{0.0, 0.0}), -1.0);
    EXPECT_NEAR(bench::hartmann6(*make_benchmark("hartmann6").x_star), -3.32237, 1e-5);
    EXPECT_NEAR(bench::ackley(Point(10, 0.0)), 0.0, 1e-14);
}

// Property: random points never beat the stated optimum, and nearby
// perturbations of x* are no better.
TEST(Benchmarks, OptimumIsALowerBound) {
    Rng rng(1);
    for (const auto& name : benchmark_names()) {
        const auto b = make_benchmark(name);
        for (int k = 0; k < 20000; ++k) {
            Point x(b.dim());
            for (std::size_t i = 0; i < b.dim(); ++i) x[i] = rng.uniform(b.box.lower()[i], b.box.upper()[i]);
            ASSERT_GE(b(x), *b.f_star - 1e-9) << name;
        }
        for (int k = 0; k < 2000; ++k) {
            Point x = *b.x_star;
            for (std::size_t i = 0; i < b.dim(); ++i)
                x[i] = std::clamp(x[i] + rng.uniform(-1e-3, 1e-3) * b.box.range(i), b.box.lower()[i], b.box.upper()[i]);
            ASSERT_GE(b(x), *b.f_star - 1e-9) << name;
        }
    }
}

TEST(Benchmarks, DomainChecks) {
    EXPECT_THROW(bench::f3(0.4), DomainError);
    EXPECT_THROW(bench::f1(10.5), DomainError);
    EXPECT_THROW(bench::hartmann6(Point(7, 0.5)), ConfigError);
    EXPECT_THROW(bench::dropwave(Point{6.0, 0.0}), DomainError);
    EXPECT_THROW(make_benchmark("nope"), ConfigError);
    EXPECT_THROW(make_benchmark("ackleyx"), ConfigError);
    EXPECT_EQ(make_benchmark("ackley3").dim(), 3u);
    EXPECT_EQ(make_benchmark("ackley10").box.lower()[0], -5.0);
}

TEST(RandomSearch, DeterministicAndInsideBox) {
    const auto b = make_benchmark("goldstein-price");
    const auto t1 = random_search(b.evaluator, b.box, 50, 3, Direction::minimize, b.f_star);
    const auto t2 = random_search(b.evaluator, b.box, 50, 3, Direction::minimize, b.f_star);
    ASSERT_EQ(t1.size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(t1.iterations[i].x, t2.iterations[i].x);
        EXPECT_TRUE(b.box.contains(t1.iterations[i].x));
        EXPECT_GE(*t1.iterations[i].simple_regret, 0.0);
    }
    EXPECT_THROW(random_search(b.evaluator, b.box, 0, 3), ConfigError);
}
