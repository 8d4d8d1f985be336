#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/random.hpp"
#include "pseudobo/sobol_directions.hpp"

namespace pseudobo {

/// Sobol sequence (Joe-Kuo directions) with a per-dimension digital XOR shift.
class SobolStream {
public:
    static constexpr std::size_t kBits = 32;

    /// Unscrambled when `scramble` is false.
    SobolStream(std::size_t dim, std::uint64_t seed, bool scramble = true) : dim_(dim) {
        if (dim == 0 || dim > detail::kSobolMaxDim)
            throw ConfigError("Sobol dimension must be in [1, " + std::to_string(detail::kSobolMaxDim) +
                              "], got " + std::to_string(dim));
        directions_.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) build_directions(j, directions_[j]);
        shift_.assign(dim, 0);
        if (scramble) {
            Rng rng(seed);
            for (auto& s : shift_) s = rng.next_u32();
        }
        state_.assign(dim, 0);
    }

    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t index() const noexcept { return index_; }

    /// Next point in [0, 1)^d.
    Point next() {
        if (index_ >= (std::uint64_t{1} << kBits)) throw StateError("Sobol stream exhausted");
        if (index_ > 0) {
            // Gray-code update: flip the direction number at the lowest zero bit of index-1.
            const auto c = static_cast<std::size_t>(std::countr_zero(index_));
            for (std::size_t j = 0; j < dim_; ++j) state_[j] ^= directions_[j][c];
        }
        ++index_;
        Point p(dim_);
        for (std::size_t j = 0; j < dim_; ++j)
            p[j] = static_cast<double>(state_[j] ^ shift_[j]) * 0x1.0p-32;
        return p;
    }

    std::vector<Point> next(std::size_t count) {
        if (count == 0) throw ConfigError("Sobol draw count must be positive");
        std::vector<Point> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back(next());
        return out;
    }

private:
    static void build_directions(std::size_t j, std::array<std::uint32_t, kBits>& v) {
        std::array<std::uint32_t, kBits> m{};
        if (j == 0) {
            m.fill(1);
        } else {
            const std::uint32_t poly = detail::kSobolPoly[j];
            const int degree = std::bit_width(poly) - 1;
            for (int k = 0; k < degree; ++k) m[static_cast<std::size_t>(k)] = detail::kSobolInit[j][static_cast<std::size_t>(k)];
            for (std::size_t k = static_cast<std::size_t>(degree); k < kBits; ++k) {
                std::uint32_t next = m[k - static_cast<std::size_t>(degree)];
                next ^= m[k - static_cast<std::size_t>(degree)] << degree;
                for (int b = 1; b < degree; ++b)
                    if ((poly >> (degree - b)) & 1U)
                        next ^= m[k - static_cast<std::size_t>(b)] << b;
                m[k] = next;
            }
        }
        for (std::size_t k = 0; k < kBits; ++k) v[k] = m[k] << (kBits - 1 - k);
    }

    std::size_t dim_;
    std::vector<std::array<std::uint32_t, kBits>> directions_;
    std::vector<std::uint32_t> shift_;
    std::vector<std::uint32_t> state_;
    std::uint64_t index_ = 0;
};

inline std::vector<Point> sobol_next(SobolStream& stream, std::size_t count) { return stream.next(count); }

/// Axis-aligned sub-box of the unit cube.
struct Region {
    Point lower;
    Point upper;

    static Region unit(std::size_t dim) { return {Point(dim, 0.0), Point(dim, 1.0)}; }

    /// Box of side `length` centred at `center`, clipped to the unit cube.
    static Region around(std::span<const double> center, double length) {
        Region r{Point(center.size()), Point(center.size())};
        for (std::size_t i = 0; i < center.size(); ++i) {
            r.lower[i] = std::clamp(center[i] - 0.5 * length, 0.0, 1.0);
            r.upper[i] = std::clamp(center[i] + 0.5 * length, 0.0, 1.0);
        }
        return r;
    }
};

struct PerturbConfig {
    double p_perturb = 1.0;
    /// 0 means the default min(100 d, 5000).
    std::size_t n_candidates = 0;

    std::size_t candidates_for(std::size_t dim) const {
        return n_candidates ? n_candidates : std::min<std::size_t>(100 * dim, 5000);
    }

    void validate() const {
        if (!(p_perturb > 0.0 && p_perturb <= 1.0)) throw ConfigError("perturbation probability must be in (0, 1]");
    }
};

/// Incumbent-anchored coordinate perturbation with Sobol replacement values.
///
/// Each coordinate is replaced by the (region-rescaled) Sobol coordinate with
/// probability p_perturb; if none fires, one uniformly chosen coordinate is
/// forced. Candidates are clipped to the region intersected with the cube.
inline std::vector<Point> propose_candidates(std::span<const double> incumbent, SobolStream& stream,
                                             const PerturbConfig& cfg, Rng& rng,
                                             const std::optional<Region>& region = std::nullopt) {
    cfg.validate();
    const std::size_t d = incumbent.size();
    if (d != stream.dim()) throw ConfigError("incumbent/Sobol dimension mismatch");
    for (double v : incumbent)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("incumbent outside the unit cube");
    Region box = region.value_or(Region::unit(d));
    if (box.lower.size() != d || box.upper.size() != d) throw ConfigError("region dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) {
        box.lower[i] = std::max(box.lower[i], 0.0);
        box.upper[i] = std::min(box.upper[i], 1.0);
        if (!(box.lower[i] < box.upper[i]))
            throw ConfigError("empty candidate region in dimension " + std::to_string(i));
    }

    const std::size_t count = cfg.candidates_for(d);
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        const Point s = stream.next();
        Point cand(incumbent.begin(), incumbent.end());
        bool any = false;
        for (std::size_t i = 0; i < d; ++i) {
            const bool fire = cfg.p_perturb >= 1.0 || rng.uniform() < cfg.p_perturb;
            if (fire) {
                cand[i] = box.lower[i] + s[i] * (box.upper[i] - box.lower[i]);
                any = true;
            }
        }
        if (!any) {
            const auto i = static_cast<std::size_t>(rng.below(d));
            cand[i] = box.lower[i] + s[i] * (box.upper[i] - box.lower[i]);
        }
        for (std::size_t i = 0; i < d; ++i) cand[i] = std::clamp(cand[i], box.lower[i], box.upper[i]);
        out.push_back(std::move(cand));
    }
    return out;
}

struct TrustRegionParams {
    double length_init = 0.8;
    double length_min = 0.0078125;  // 0.5^7
    double length_max = 1.6;
    std::size_t success_tolerance = 3;
    std::size_t failure_tolerance = 4;  ///< use failure_tolerance_for(d, batch)

    static std::size_t failure_tolerance_for(std::size_t dim, std::size_t batch) {
        const std::size_t ratio = (dim + batch - 1) / std::max<std::size_t>(batch, 1);
        return std::max<std::size_t>(4, ratio);
    }

    void validate() const {
        if (!(length_min > 0.0 && length_min <= length_init && length_init <= length_max))
            throw ConfigError("trust region needs 0 < L_min <= L_init <= L_max");
        if (success_tolerance == 0 || failure_tolerance == 0)
            throw ConfigError("trust region tolerances must be positive");
    }
};

struct TrustRegionState {
    double length = 0.8;
    std::size_t success_count = 0;
    std::size_t failure_count = 0;
    std::size_t restarts = 0;
    bool restart_signal = false;  ///< set by the update that triggered a restart

    static TrustRegionState initial(const TrustRegionParams& p) { return {p.length_init, 0, 0, 0, false}; }

    friend bool operator==(const TrustRegionState&, const TrustRegionState&) = default;
};

/// Success/failure bookkeeping: expand after a success streak, halve after a
/// failure streak, restart once the side falls below L_min.
inline TrustRegionState tr_update(TrustRegionState s, bool improved, const TrustRegionParams& p) {
    s.restart_signal = false;
    if (improved) {
        ++s.success_count;
        s.failure_count = 0;
        if (s.success_count >= p.success_tolerance) {
            s.length = std::min(2.0 * s.length, p.length_max);
            s.success_count = 0;
        }
    } else {
        ++s.failure_count;
        s.success_count = 0;
        if (s.failure_count >= p.failure_tolerance) {
            s.length /= 2.0;
            s.failure_count = 0;
        }
    }
    if (s.length < p.length_min) {
        s.length = p.length_init;
        s.success_count = 0;
        s.failure_count = 0;
        ++s.restarts;
        s.restart_signal = true;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Candidate generators used by the optimization loop.

/// Source of EW candidates in the unit cube.
class CandidateGenerator {
public:
    virtual ~CandidateGenerator() = default;
    virtual std::vector<Point> propose(const Dataset& data) = 0;
    /// Called after each batch with whether the incumbent improved.
    virtual void observe(bool /*improved*/) {}
};

/// Sobol candidates anchored at the incumbent over the whole cube.
class SobolPerturbation : public CandidateGenerator {
public:
    SobolPerturbation(std::size_t dim, std::uint64_t seed, PerturbConfig cfg)
        : stream_(dim, Rng::substream(seed, Stream::candidates).next_u64()),
          rng_(Rng::substream(seed, Stream::forcing)),
          cfg_(cfg) {
        cfg_.validate();
    }

    std::vector<Point> propose(const Dataset& data) override {
        return propose_candidates(data.point(data.incumbent_index()), stream_, cfg_, rng_);
    }

private:
    SobolStream stream_;
    Rng rng_;
    PerturbConfig cfg_;
};

/// Trust-region wrapper: candidates confined to a box around the incumbent.
///
/// After a restart the next proposal covers the whole cube once, then the
/// region re-centres on the incumbent at L_init.
class TrustRegion : public CandidateGenerator {
public:
    TrustRegion(std::size_t dim, std::uint64_t seed, PerturbConfig cfg, TrustRegionParams params)
        : stream_(dim, Rng::substream(seed, Stream::candidates).next_u64()),
          rng_(Rng::substream(seed, Stream::forcing)),
          cfg_(cfg),
          params_(params),
          state_(TrustRegionState::initial(params)) {
        cfg_.validate();
        params_.validate();
    }

    std::vector<Point> propose(const Dataset& data) override {
        const auto center = data.point(data.incumbent_index());
        if (global_step_) {
            global_step_ = false;
            PerturbConfig full = cfg_;
            full.p_perturb = 1.0;
            return propose_candidates(center, stream_, full, rng_);
        }
        return propose_candidates(center, stream_, cfg_, rng_, Region::around(center, state_.length));
    }

    void observe(bool improved) override {
        state_ = tr_update(state_, improved, params_);
        if (state_.restart_signal) global_step_ = true;
    }

    const TrustRegionState& state() const noexcept { return state_; }

private:
    SobolStream stream_;
    Rng rng_;
    PerturbConfig cfg_;
    TrustRegionParams params_;
    TrustRegionState state_;
    bool global_step_ = false;
};

}  // namespace pseudobo
