#include "pac/random.hpp"

#include <array>
#include <cmath>

#include "pac/error.hpp"

namespace pac {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
    if (!(lo < hi) || !(sd > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "truncated normal needs lo < hi and sd > 0");
    }
    std::normal_distribution<double> normal(mean, sd);
    for (;;) {
        const double x = normal(rng);
        if (x >= lo && x <= hi) return x;
    }
}

}  // namespace pac
