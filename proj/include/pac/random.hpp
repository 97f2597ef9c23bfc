#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pac {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream index.
/// Used wherever work is split per item (trials, bootstraps) so that results
/// do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Rejection sampler for N(mean, sd) restricted to [lo, hi].
double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi);

inline double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace pac
