#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pac/causal_graph.hpp"
#include "pac/intervention.hpp"

namespace pac {

inline constexpr std::size_t kMaxMediators = 12;
inline constexpr std::size_t kDefaultGridPoints = 101;

/// One PC1 question: did X = context[X] rather than x' cause the outcome,
/// along `path`? `context` holds the observed value of every node except the
/// outcome (extra outcome entries are ignored).
struct AcQuery {
    std::string cause;
    std::string outcome;
    Path path;
    InterventionSet context;
    std::vector<double> grid;
    std::size_t n_samples = kDefaultMonteCarloSamples;
    std::uint64_t seed = 0;
};

/// "{}" for the empty set, "{A,B}" otherwise (members sorted).
std::string subset_key(const std::set<std::string>& subset);

struct AcRegion {
    std::string cause;
    std::string outcome;
    Path path;
    InterventionSet context;
    std::vector<double> grid;
    std::vector<DoEstimate> rhs;
    std::map<std::string, DoEstimate> lhs;  // keyed by subset_key
    std::vector<bool> raising;

    double actual_value() const { return context.at(cause); }
    /// Smallest reference probability over all mediator subsets.
    double min_reference() const;
};

/// 101 (or n) evenly spaced points over a continuous node's support.
std::vector<double> default_grid(const CausalGraph& graph, const std::string& node,
                                 std::size_t points = kDefaultGridPoints);

/// Throws unless the path runs from cause to outcome, the context covers
/// every other node and the grid lies in the cause's support.
void validate(const TrainedModel& model, const AcQuery& query);

/// P(Y | do(W = w*, X = x, Z' = z*)) for every Z' of the path's mediators.
std::map<std::string, DoEstimate> reference_probabilities(const TrainedModel& model, const AcQuery& query);

/// P(Y | do(W = w*, X = x')) per grid point; mediators respond to x'.
std::vector<CurvePoint> contrastive_curve(const TrainedModel& model, const AcQuery& query);

struct AcEvidence {
    bool raising = false;
    std::map<std::string, DoEstimate> lhs;
    DoEstimate rhs;
};

/// PC1 on point estimates for a single contrastive value.
AcEvidence ac_test(const TrainedModel& model, const AcQuery& query, double contrast);

AcRegion raising_region(const TrainedModel& model, const AcQuery& query);

}  // namespace pac
