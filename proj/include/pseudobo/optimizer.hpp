#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pseudobo/acquisition.hpp"
#include "pseudobo/candidates.hpp"
#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/random.hpp"

namespace pseudobo {

/// Objective evaluated at raw coordinates.
using Objective = std::function<double(std::span<const double>)>;

struct RunOptions {
    std::size_t budget = 100;
    std::size_t n_init = 5;
    std::size_t batch = 1;
    std::uint64_t seed = 0;
    Direction direction = Direction::minimize;
    std::optional<double> f_star;       ///< fills regret columns when set
    std::optional<double> winsorize_k;  ///< robust UQ: winsorize labels before fitting

    void validate() const {
        if (n_init < 1) throw ConfigError("n_init must be >= 1");
        if (budget < n_init) throw ConfigError("budget must be >= n_init");
        if (batch < 1) throw ConfigError("batch must be >= 1");
    }
};

/// Indices of the top-k candidates by score, distinct as points.
///
/// Ties keep the lower candidate index; NaN scores rank last.
inline std::vector<std::size_t> select_batch(std::span<const Point> candidates, std::span<const double> scores,
                                             std::size_t k) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) {
        return std::isnan(scores[i]) ? -std::numeric_limits<double>::infinity() : scores[i];
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
    std::vector<std::size_t> picked;
    for (std::size_t i : order) {
        if (picked.size() == k) break;
        const bool dup = std::any_of(picked.begin(), picked.end(),
                                     [&](std::size_t j) { return candidates[j] == candidates[i]; });
        if (!dup) picked.push_back(i);
    }
    return picked;
}

/// Sequential EW maximization.
///
/// The first n_init queries come from a scrambled Sobol design. Each later
/// step refits the EW on the finite observations, scores the generator's
/// candidates, and evaluates the top `batch` distinct ones. Non-finite
/// objective values are traced but never fitted.
inline RunTrace run(const Objective& objective, const Box& box, const EWFunction& ew,
                    CandidateGenerator& generator, const RunOptions& opt) {
    opt.validate();
    ew.validate();
    const std::size_t d = box.dim();
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    RunTrace trace;
    trace.dim = d;
    trace.direction = opt.direction;
    Dataset data(d, opt.direction);
    if (opt.winsorize_k) data.set_winsorization(opt.winsorize_k);

    auto evaluate = [&](Point unit) {
        Point raw = denormalize(unit, box);
        const double y = objective(raw);
        trace.append(std::move(raw), y, elapsed());
        if (std::isfinite(y)) data.add(std::move(unit), y);
    };

    SobolStream init(d, Rng::substream(opt.seed, Stream::init_design).next_u64());
    for (std::size_t i = 0; i < opt.n_init; ++i) evaluate(init.next());

    while (trace.size() < opt.budget) {
        const std::size_t k = std::min(opt.batch, opt.budget - trace.size());
        if (data.empty()) {
            // Nothing to fit yet: keep filling from the initial design.
            for (std::size_t i = 0; i < k; ++i) evaluate(init.next());
            continue;
        }
        ew.fit(data);
        const auto candidates = generator.propose(data);
        std::vector<double> scores(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) scores[i] = ew.rank(candidates[i], data);
        auto picked = select_batch(candidates, scores, k);

        const double before = data.incumbent_value();
        for (std::size_t i : picked) evaluate(candidates[i]);
        // Short batch (degenerate candidate set): top up from the design.
        for (std::size_t i = picked.size(); i < k; ++i) evaluate(init.next());
        generator.observe(data.better(data.incumbent_value(), before));
    }

    if (opt.f_star) trace = regret_metrics(std::move(trace), *opt.f_star);
    return trace;
}

}  // namespace pseudobo
