#include "pac/action_selection.hpp"

#include <cmath>
#include <optional>

#include "pac/error.hpp"

namespace pac {

void SelectionPolicy::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "threshold must lie strictly between 0 and 1");
    }
}

SelectionResult select_alternative(const AcRegion& region, double actual, const SelectionPolicy& policy) {
    policy.validate();
    auto it = region.context.find(region.cause);
    if (it == region.context.end() || it->second != actual) {
        throw Error(ErrorCode::GridMismatch, "actual value does not match the region's context for '" + region.cause + "'");
    }
    if (region.rhs.size() != region.grid.size() || region.raising.size() != region.grid.size()) {
        throw Error(ErrorCode::GridMismatch, "region arrays differ in length from the grid");
    }

    std::set<std::string> all_mediators;
    for (std::size_t i = 1; i + 1 < region.path.size(); ++i) all_mediators.insert(region.path[i]);
    if (auto full = region.lhs.find(subset_key(all_mediators)); full != region.lhs.end()) {
        if (full->second.probability < policy.threshold) return NoChangeNeeded{full->second.probability};
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < region.grid.size(); ++i) {
        if (!region.raising[i] || !(region.rhs[i].probability < policy.threshold)) continue;
        if (!best) {
            best = i;
            continue;
        }
        const double x = region.grid[i];
        const double bx = region.grid[*best];
        double key = 0.0;
        double best_key = 0.0;
        if (policy.criterion == Criterion::ClosestToActual) {
            key = std::abs(x - actual);
            best_key = std::abs(bx - actual);
        } else {
            key = region.rhs[i].probability;
            best_key = region.rhs[*best].probability;
        }
        if (key < best_key || (key == best_key && x < bx)) best = i;
    }
    if (!best) return NoAlternative{};
    return Alternative{region.grid[*best], region.rhs[*best].probability};
}

Path designated_path(const CausalGraph& graph, const std::string& cause, const std::string& outcome) {
    const auto paths = graph.directed_paths(cause, outcome);
    if (paths.empty()) throw Error(ErrorCode::PathInvalid, "no directed path from '" + cause + "' to '" + outcome + "'");
    const Path* longest = &paths.front();
    for (const Path& p : paths) {
        if (p.size() > longest->size()) longest = &p;
    }
    return *longest;
}

TrialSelection select_for_trial(const TrainedModel& model, const InterventionSet& observed, const std::string& cause,
                                const std::string& outcome, const SelectionPolicy& policy, const GridConfig& grid,
                                std::uint64_t seed) {
    AcQuery query;
    query.cause = cause;
    query.outcome = outcome;
    query.path = designated_path(model.graph(), cause, outcome);
    query.context = observed;
    query.grid = default_grid(model.graph(), cause, grid.points);
    query.n_samples = grid.n_samples;
    query.seed = seed;
    AcRegion region = raising_region(model, query);
    SelectionResult result = select_alternative(region, observed.at(cause), policy);
    return TrialSelection{std::move(region), result};
}

}  // namespace pac
