#pragma once

// Hand-rolled generators and small numeric oracles shared by the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/random.hpp"

namespace testing_support {

using pseudobo::Dataset;
using pseudobo::Direction;
using pseudobo::Point;
using pseudobo::Rng;

inline Point random_point(Rng& rng, std::size_t d) {
    Point p(d);
    for (auto& v : p) v = rng.uniform();
    return p;
}

/// n uniform points in the unit cube with labels from `f`.
template <class F>
Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d, F f, Direction dir = Direction::maximize) {
    Dataset data(d, dir);
    for (std::size_t i = 0; i < n; ++i) {
        Point x = random_point(rng, d);
        const double y = f(x);
        data.add(std::move(x), y);
    }
    return data;
}

/// Dataset with i.i.d. N(0,1)-ish labels (sum of uniforms), never constant for n >= 2.
inline Dataset noise_dataset(Rng& rng, std::size_t n, std::size_t d) {
    Dataset data(d);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (int k = 0; k < 12; ++k) y += rng.uniform();
        data.add(random_point(rng, d), y - 6.0 + static_cast<double>(i) * 1e-9);
    }
    return data;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Standard normal CDF by Simpson integration of the density, independent of erfc.
inline double normal_cdf_oracle(double z) {
    const double lo = -12.0;
    if (z <= lo) return 0.0;
    const int n = 20000;
    const double h = (z - lo) / n;
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    double s = phi(lo) + phi(z);
    for (int i = 1; i < n; ++i) s += phi(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace testing_support
