#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "pac/actual_causation.hpp"

namespace pac {

enum class Criterion { ClosestToActual, LowestProbability };

struct SelectionPolicy {
    double threshold = 0.1;
    Criterion criterion = Criterion::ClosestToActual;

    void validate() const;
};

struct Alternative {
    double value = 0.0;
    double predicted_probability = 0.0;
};

struct NoChangeNeeded {
    double reference_probability = 0.0;
};

struct NoAlternative {};

using SelectionResult = std::variant<Alternative, NoChangeNeeded, NoAlternative>;

/// Three steps over a computed region: keep grid values where raising holds,
/// keep those whose contrastive probability is below the threshold, then pick
/// by criterion (ties go to the smaller value). Short-circuits to
/// NoChangeNeeded when the reference with every mediator fixed is already
/// below the threshold. Throws GridMismatch when `actual` is not the region's
/// observed cause value.
SelectionResult select_alternative(const AcRegion& region, double actual, const SelectionPolicy& policy);

/// Longest directed path from cause to outcome (first in enumeration order on
/// ties), e.g. RD->S, FU->RV->S, RC->RV->S in the pouring graph.
Path designated_path(const CausalGraph& graph, const std::string& cause, const std::string& outcome);

struct GridConfig {
    std::size_t points = kDefaultGridPoints;
    std::size_t n_samples = kDefaultMonteCarloSamples;
};

struct TrialSelection {
    AcRegion region;
    SelectionResult result;
};

TrialSelection select_for_trial(const TrainedModel& model, const InterventionSet& observed, const std::string& cause,
                                const std::string& outcome, const SelectionPolicy& policy, const GridConfig& grid,
                                std::uint64_t seed);

}  // namespace pac
