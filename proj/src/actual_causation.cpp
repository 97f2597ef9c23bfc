#include "pac/actual_causation.hpp"

#include <algorithm>
#include <limits>

#include "pac/error.hpp"

namespace pac {

std::string subset_key(const std::set<std::string>& subset) {
    std::string key = "{";
    bool first = true;
    for (const auto& name : subset) {
        if (!first) key += ",";
        key += name;
        first = false;
    }
    return key + "}";
}

double AcRegion::min_reference() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [key, est] : lhs) m = std::min(m, est.probability);
    return m;
}

std::vector<double> default_grid(const CausalGraph& graph, const std::string& node, std::size_t points) {
    const VariableKind& kind = graph.node(node).kind;
    if (is_binary(kind)) return {0.0, 1.0};
    if (points < 1) throw Error(ErrorCode::InvalidConfig, "grid needs at least one point");
    const auto& support = std::get<Continuous>(kind);
    if (points == 1) return {support.min};
    std::vector<double> grid(points);
    const double step = (support.max - support.min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = support.min + step * static_cast<double>(i);
    grid.back() = support.max;
    return grid;
}

void validate(const TrainedModel& model, const AcQuery& query) {
    const CausalGraph& graph = model.graph();
    if (query.cause == query.outcome) throw Error(ErrorCode::InvalidIntervention, "cause equals outcome");
    if (query.path.empty() || query.path.front() != query.cause) {
        throw Error(ErrorCode::PathInvalid, "path must start at the cause '" + query.cause + "'");
    }
    graph.partition_for_path(query.path, query.outcome);
    InterventionSet observed;
    for (const auto& name : graph.node_names()) {
        if (name == query.outcome) continue;
        auto it = query.context.find(name);
        if (it == query.context.end()) throw Error(ErrorCode::MissingParent, "context lacks '" + name + "'");
        observed.insert(*it);
    }
    validate_interventions(graph, observed);
    for (double v : query.grid) validate_interventions(graph, {{query.cause, v}});
}

namespace {

InterventionSet off_path_assignment(const AcQuery& query, const PathPartition& part) {
    InterventionSet a;
    for (const auto& w : part.off_path) a[w] = query.context.at(w);
    return a;
}

}  // namespace

std::map<std::string, DoEstimate> reference_probabilities(const TrainedModel& model, const AcQuery& query) {
    validate(model, query);
    const PathPartition part = model.graph().partition_for_path(query.path, query.outcome);
    if (part.mediators.size() > kMaxMediators) {
        throw Error(ErrorCode::TooManyMediators, std::to_string(part.mediators.size()) + " mediators on the path");
    }
    const std::vector<std::string> z(part.mediators.begin(), part.mediators.end());
    InterventionSet base = off_path_assignment(query, part);
    base[query.cause] = query.context.at(query.cause);

    std::map<std::string, DoEstimate> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << z.size()); ++mask) {
        InterventionSet a = base;
        std::set<std::string> subset;
        for (std::size_t k = 0; k < z.size(); ++k) {
            if ((mask >> k) & 1U) {
                a[z[k]] = query.context.at(z[k]);
                subset.insert(z[k]);
            }
        }
        out.emplace(subset_key(subset),
                    interventional_probability(model, query.outcome, a, query.n_samples, query.seed));
    }
    return out;
}

std::vector<CurvePoint> contrastive_curve(const TrainedModel& model, const AcQuery& query) {
    validate(model, query);
    const PathPartition part = model.graph().partition_for_path(query.path, query.outcome);
    return do_curve(model, query.outcome, query.cause, query.grid, off_path_assignment(query, part), query.n_samples,
                    query.seed);
}

AcEvidence ac_test(const TrainedModel& model, const AcQuery& query, double contrast) {
    AcQuery single = query;
    single.grid = {contrast};
    AcEvidence ev;
    ev.lhs = reference_probabilities(model, single);
    ev.rhs = contrastive_curve(model, single).front().estimate;
    ev.raising = std::all_of(ev.lhs.begin(), ev.lhs.end(),
                             [&](const auto& kv) { return kv.second.probability > ev.rhs.probability; });
    return ev;
}

AcRegion raising_region(const TrainedModel& model, const AcQuery& query) {
    AcRegion region;
    region.cause = query.cause;
    region.outcome = query.outcome;
    region.path = query.path;
    region.context = query.context;
    region.context.erase(query.outcome);
    region.grid = query.grid;
    region.lhs = reference_probabilities(model, query);
    const double lowest = region.min_reference();
    for (const CurvePoint& pt : contrastive_curve(model, query)) {
        region.rhs.push_back(pt.estimate);
        region.raising.push_back(lowest > pt.estimate.probability);
    }
    return region;
}

}  // namespace pac
