#pragma once

#include <span>

#include "pseudobo/core.hpp"

namespace pseudobo {

/// Surrogate predictor f̂(x; D_n). Predictions are in label space
/// (standardized, larger is better). fit() snapshots the dataset; predict()
/// is const and safe to call concurrently.
class Surrogate {
public:
    virtual ~Surrogate() = default;
    virtual void fit(const Dataset& data) = 0;
    virtual double predict(std::span<const double> x) const = 0;
};

/// Uncertainty quantifier σ̂(x; D_n) >= 0, in label units.
class UncertaintyQuantifier {
public:
    virtual ~UncertaintyQuantifier() = default;
    virtual void fit(const Dataset& data) = 0;
    virtual double stddev(std::span<const double> x) const = 0;
};

}  // namespace pseudobo
