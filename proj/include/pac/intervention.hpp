#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pac/causal_graph.hpp"
#include "pac/density.hpp"

namespace pac {

/// Causal graph plus one learned mechanism per node: the factorized joint.
class TrainedModel {
public:
    TrainedModel() = default;
    /// Throws InvalidGraph unless every node has exactly one mechanism whose
    /// parents equal the graph parents in the same order.
    TrainedModel(CausalGraph graph, std::map<std::string, Mechanism> mechanisms);

    const CausalGraph& graph() const noexcept { return graph_; }
    const std::map<std::string, Mechanism>& mechanisms() const noexcept { return mechanisms_; }
    const Mechanism& mechanism(const std::string& node) const;

private:
    CausalGraph graph_;
    std::map<std::string, Mechanism> mechanisms_;
};

struct DoEstimate {
    double probability = 0.0;
    double std_error = 0.0;  // sample std of per-draw head probabilities / sqrt(n)
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultMonteCarloSamples = 10'000;
inline constexpr int kTruncationAttempts = 100;

/// P(outcome = 1 | do(assignments)) by ancestral sampling in the mutilated
/// graph. The outcome itself is never sampled: each draw contributes the
/// outcome mechanism's probability given its sampled parents.
DoEstimate interventional_probability(const TrainedModel& model, const std::string& outcome,
                                      const InterventionSet& assignments,
                                      std::size_t n_samples = kDefaultMonteCarloSamples, std::uint64_t seed = 0);

/// Single forward pass of the outcome mechanism. `assignment` must contain
/// every parent of the outcome; other keys are ignored.
double conditional_probability(const TrainedModel& model, const std::string& outcome,
                               const std::map<std::string, double>& assignment);

struct CurvePoint {
    double value = 0.0;
    DoEstimate estimate;
};

/// One estimate per grid value of `sweep_node`, all drawn with the same seed.
std::vector<CurvePoint> do_curve(const TrainedModel& model, const std::string& outcome,
                                 const std::string& sweep_node, std::span<const double> grid,
                                 const InterventionSet& context,
                                 std::size_t n_samples = kDefaultMonteCarloSamples, std::uint64_t seed = 0);

/// Draw restricted to a node's support: rejection up to kTruncationAttempts,
/// then clamping.
double sample_in_support(const DistributionParams& params, const VariableKind& kind, Rng& rng);

}  // namespace pac
