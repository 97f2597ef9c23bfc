#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pac/causal_graph.hpp"
#include "pac/dataset.hpp"
#include "pac/discovery.hpp"
#include "pac/random.hpp"

namespace pac {

// Variable names used throughout the pouring task.
inline constexpr const char* kRC = "RC";
inline constexpr const char* kFU = "FU";
inline constexpr const char* kRD = "RD";
inline constexpr const char* kRV = "RV";
inline constexpr const char* kS = "S";

struct TruncatedGaussian {
    double mean;
    double sd;
    double min;
    double max;
};

// Trial parameter distributions.
inline constexpr TruncatedGaussian kRelativeCapacity{1.0, 0.25, 0.5, 2.0};
inline constexpr TruncatedGaussian kFullness{0.7, 0.2, 0.3, 1.0};
inline constexpr TruncatedGaussian kRelativeDiameter{1.0, 0.25, 0.5, 1.5};
// Modelling support for the derived relative volume (fu/rc spans ~0.14-2.2).
inline constexpr Continuous kRelativeVolumeSupport{0.1, 2.5};

struct Trial {
    double rc = 1.0;  // target capacity / source capacity
    double fu = 0.7;  // source fullness fraction
    double rd = 1.0;  // target rim diameter / source rim diameter
    double rv = 0.7;  // poured volume / target capacity
    bool spillage = false;
};

struct TrialParameters {
    double rc = 1.0;
    double fu = 0.7;
    double rd = 1.0;
};

struct Overrides {
    std::optional<double> rc;
    std::optional<double> fu;
    std::optional<double> rd;
};

/// Coefficients of the closed-form spillage model
///   p = 1 - (1 - p_over) (1 - p_rim)
///   p_over = logistic((rv - 1) / overflow_width)
///   p_rim  = logistic((fu - (rim_slope * rd + rim_offset)) / rim_width)
/// The rim defaults come from tools/calibrate_world.py.
struct WorldConfig {
    double sigma_pack = 0.03;
    double overflow_width = 0.04;
    double rim_slope = 1.0;
    double rim_offset = -0.25;
    double rim_width = 0.04;

    void validate() const;
};

/// Synthetic stand-in for the simulated pouring experiment.
class PouringWorld {
public:
    explicit PouringWorld(WorldConfig config = {});

    const WorldConfig& config() const noexcept { return config_; }

    TrialParameters sample_parameters(Rng& rng) const;
    double derive_rv(double rc, double fu, Rng& rng) const;
    double spillage_probability(double fu, double rd, double rv) const;
    bool resolve_spillage(double fu, double rd, double rv, Rng& rng) const;

    /// Trial i draws from its own stream derive_seed(seed, i).
    std::vector<Trial> generate_dataset(std::size_t n, std::uint64_t seed) const;

    /// Re-runs a trial with optional parameter overrides; rv gets fresh packing
    /// noise per replication. Returns the number of replications without
    /// spillage.
    std::size_t replay(const Trial& trial, const Overrides& overrides, std::size_t replications,
                       std::uint64_t seed) const;

private:
    WorldConfig config_;
};

std::vector<Node> pouring_nodes();
/// RC->RV, FU->RV, FU->S, RD->S, RV->S.
CausalGraph pouring_graph();

/// File layout: columns rc,fu,rd,rv,spillage.
Dataset to_dataset(const std::vector<Trial>& trials);
/// Modelling layout: one column per graph node (RC, FU, RD, RV, S).
Dataset node_frame(const std::vector<Trial>& trials);
/// Throws Schema when columns are missing or values leave the trial supports.
std::vector<Trial> trials_from_dataset(const Dataset& data);

InterventionSet trial_context(const Trial& trial);

/// {RC, FU, RD} < {RV} < {S}, within-tier edges allowed.
Tiers pouring_tiers();
/// FisherZ at alpha 0.05 with the ratio columns on log scale.
CiTest pouring_ci_test();

}  // namespace pac
