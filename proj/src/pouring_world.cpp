#include "pac/pouring_world.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pac/error.hpp"
#include "pac/format.hpp"

namespace pac {

namespace {

double draw(Rng& rng, const TruncatedGaussian& d) { return truncated_normal(rng, d.mean, d.sd, d.min, d.max); }

bool in_support(double v, const TruncatedGaussian& d) { return v >= d.min && v <= d.max; }

constexpr double kMinRv = 1e-6;

}  // namespace

void WorldConfig::validate() const {
    if (!(sigma_pack >= 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma_pack must be >= 0");
    if (!(overflow_width > 0.0)) throw Error(ErrorCode::InvalidConfig, "overflow_width must be > 0");
    if (!(rim_width > 0.0)) throw Error(ErrorCode::InvalidConfig, "rim_width must be > 0");
    if (!(rim_slope > 0.0)) throw Error(ErrorCode::InvalidConfig, "rim_slope must be > 0");
}

PouringWorld::PouringWorld(WorldConfig config) : config_(config) { config_.validate(); }

TrialParameters PouringWorld::sample_parameters(Rng& rng) const {
    TrialParameters p;
    p.rc = draw(rng, kRelativeCapacity);
    p.fu = draw(rng, kFullness);
    p.rd = draw(rng, kRelativeDiameter);
    return p;
}

double PouringWorld::derive_rv(double rc, double fu, Rng& rng) const {
    // poured volume = fu * C_src, target capacity = rc * C_src
    double noise = 0.0;
    if (config_.sigma_pack > 0.0) noise = std::normal_distribution<double>(0.0, config_.sigma_pack)(rng);
    return std::max(fu / rc * (1.0 + noise), kMinRv);
}

double PouringWorld::spillage_probability(double fu, double rd, double rv) const {
    const double p_over = logistic((rv - 1.0) / config_.overflow_width);
    const double p_rim = logistic((fu - (config_.rim_slope * rd + config_.rim_offset)) / config_.rim_width);
    return 1.0 - (1.0 - p_over) * (1.0 - p_rim);
}

bool PouringWorld::resolve_spillage(double fu, double rd, double rv, Rng& rng) const {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < spillage_probability(fu, rd, rv);
}

std::vector<Trial> PouringWorld::generate_dataset(std::size_t n, std::uint64_t seed) const {
    std::vector<Trial> trials(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        const TrialParameters p = sample_parameters(rng);
        Trial& t = trials[i];
        t.rc = p.rc;
        t.fu = p.fu;
        t.rd = p.rd;
        t.rv = derive_rv(p.rc, p.fu, rng);
        t.spillage = resolve_spillage(t.fu, t.rd, t.rv, rng);
    }
    return trials;
}

std::size_t PouringWorld::replay(const Trial& trial, const Overrides& overrides, std::size_t replications,
                                 std::uint64_t seed) const {
    const double rc = overrides.rc.value_or(trial.rc);
    const double fu = overrides.fu.value_or(trial.fu);
    const double rd = overrides.rd.value_or(trial.rd);
    Rng rng(seed);
    std::size_t successes = 0;
    for (std::size_t r = 0; r < replications; ++r) {
        const double rv = derive_rv(rc, fu, rng);
        if (!resolve_spillage(fu, rd, rv, rng)) ++successes;
    }
    return successes;
}

std::vector<Node> pouring_nodes() {
    return {
        Node{kRC, Continuous{kRelativeCapacity.min, kRelativeCapacity.max}},
        Node{kFU, Continuous{kFullness.min, kFullness.max}},
        Node{kRD, Continuous{kRelativeDiameter.min, kRelativeDiameter.max}},
        Node{kRV, kRelativeVolumeSupport},
        Node{kS, Binary{}},
    };
}

CausalGraph pouring_graph() {
    return CausalGraph(pouring_nodes(), {{kRC, kRV}, {kFU, kRV}, {kFU, kS}, {kRD, kS}, {kRV, kS}});
}

Dataset to_dataset(const std::vector<Trial>& trials) {
    Dataset data({"rc", "fu", "rd", "rv", "spillage"});
    for (const Trial& t : trials) {
        const std::array<double, 5> row{t.rc, t.fu, t.rd, t.rv, t.spillage ? 1.0 : 0.0};
        data.add_row(row);
    }
    return data;
}

Dataset node_frame(const std::vector<Trial>& trials) {
    Dataset data({kRC, kFU, kRD, kRV, kS});
    for (const Trial& t : trials) {
        const std::array<double, 5> row{t.rc, t.fu, t.rd, t.rv, t.spillage ? 1.0 : 0.0};
        data.add_row(row);
    }
    return data;
}

std::vector<Trial> trials_from_dataset(const Dataset& data) {
    data.require_columns({"rc", "fu", "rd", "rv", "spillage"});
    const auto rc = data.column("rc");
    const auto fu = data.column("fu");
    const auto rd = data.column("rd");
    const auto rv = data.column("rv");
    const auto s = data.column("spillage");
    std::vector<Trial> trials(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const std::string where = "row " + std::to_string(i + 1);
        if (!in_support(rc[i], kRelativeCapacity) || !in_support(fu[i], kFullness) ||
            !in_support(rd[i], kRelativeDiameter) || !(rv[i] > 0.0)) {
            throw Error(ErrorCode::Schema, where + ": value outside the trial supports");
        }
        if (s[i] != 0.0 && s[i] != 1.0) throw Error(ErrorCode::Schema, where + ": spillage must be 0 or 1");
        trials[i] = Trial{rc[i], fu[i], rd[i], rv[i], s[i] == 1.0};
    }
    return trials;
}

InterventionSet trial_context(const Trial& trial) {
    return {{kRC, trial.rc}, {kFU, trial.fu}, {kRD, trial.rd}, {kRV, trial.rv}, {kS, trial.spillage ? 1.0 : 0.0}};
}

Tiers pouring_tiers() { return Tiers{{{kRC, kFU, kRD}, {kRV}, {kS}}, true}; }

CiTest pouring_ci_test() { return CiTest{CiKind::FisherZ, 0.05, {kRC, kFU, kRD, kRV}}; }

}  // namespace pac
