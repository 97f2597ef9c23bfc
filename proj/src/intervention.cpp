#include "pac/intervention.hpp"

#include <algorithm>
#include <cmath>

#include "pac/error.hpp"

namespace pac {

TrainedModel::TrainedModel(CausalGraph graph, std::map<std::string, Mechanism> mechanisms)
    : graph_(std::move(graph)), mechanisms_(std::move(mechanisms)) {
    if (mechanisms_.size() != graph_.nodes().size()) {
        throw Error(ErrorCode::InvalidGraph, "model needs exactly one mechanism per node");
    }
    for (const Node& n : graph_.nodes()) {
        auto it = mechanisms_.find(n.name);
        if (it == mechanisms_.end()) throw Error(ErrorCode::InvalidGraph, "no mechanism for '" + n.name + "'");
        const Mechanism& m = it->second;
        if (m.node != n.name) throw Error(ErrorCode::InvalidGraph, "mechanism keyed '" + n.name + "' models '" + m.node + "'");
        if (m.parents != graph_.parents(n.name)) {
            throw Error(ErrorCode::InvalidGraph, "mechanism parents of '" + n.name + "' differ from the graph");
        }
        if (m.head != head_for(n.kind)) throw Error(ErrorCode::InvalidGraph, "head kind mismatch for '" + n.name + "'");
    }
}

const Mechanism& TrainedModel::mechanism(const std::string& node) const {
    auto it = mechanisms_.find(node);
    if (it == mechanisms_.end()) throw Error(ErrorCode::UnknownNode, "'" + node + "'");
    return it->second;
}

double sample_in_support(const DistributionParams& params, const VariableKind& kind, Rng& rng) {
    if (is_binary(kind)) return sample_from(params, rng);
    const auto& support = std::get<Continuous>(kind);
    double x = 0.0;
    for (int attempt = 0; attempt < kTruncationAttempts; ++attempt) {
        x = sample_from(params, rng);
        if (x >= support.min && x <= support.max) return x;
    }
    return std::clamp(x, support.min, support.max);
}

namespace {

void check_outcome(const TrainedModel& model, const std::string& outcome) {
    if (!model.graph().has_node(outcome)) throw Error(ErrorCode::UnknownNode, "'" + outcome + "'");
    if (!is_binary(model.graph().node(outcome).kind)) {
        throw Error(ErrorCode::OutcomeNotBinary, "'" + outcome + "' is not binary");
    }
}

double head_probability(const DistributionParams& params) { return std::get<BernoulliParams>(params).p; }

// Ancestral sampler over the outcome's ancestors with interventions applied.
// Mechanisms whose parents are all fixed get their parameters computed once.
class MutilatedSampler {
public:
    MutilatedSampler(const TrainedModel& model, const std::string& outcome, const InterventionSet& assignments)
        : outcome_(&model.mechanism(outcome)) {
        const CausalGraph& graph = model.graph();
        const auto relevant = graph.ancestors(outcome);
        std::map<std::string, std::size_t> slot;
        std::set<std::string> fixed;

        for (const auto& name : graph.topological_order()) {
            if (!relevant.contains(name)) continue;
            const std::size_t s = values_.size();
            slot[name] = s;
            if (auto it = assignments.find(name); it != assignments.end()) {
                values_.push_back(it->second);
                fixed.insert(name);
                continue;
            }
            values_.push_back(0.0);
            Step step;
            step.mech = &model.mechanism(name);
            step.kind = &graph.node(name).kind;
            step.slot = s;
            step.constant = true;
            for (const auto& p : step.mech->parents) {
                step.parent_slots.push_back(slot.at(p));
                step.constant = step.constant && fixed.contains(p);
            }
            steps_.push_back(std::move(step));
        }
        outcome_constant_ = true;
        for (const auto& p : outcome_->parents) {
            outcome_slots_.push_back(slot.at(p));
            outcome_constant_ = outcome_constant_ && fixed.contains(p);
        }
        inputs_.reserve(8);
        for (auto& step : steps_) {
            if (step.constant) step.cached = forward(*step.mech, gather(step.parent_slots));
        }
    }

    bool outcome_constant() const { return outcome_constant_; }

    double draw(Rng& rng) {
        for (auto& step : steps_) {
            const DistributionParams params = step.constant ? step.cached : forward(*step.mech, gather(step.parent_slots));
            values_[step.slot] = sample_in_support(params, *step.kind, rng);
        }
        return head_probability(forward(*outcome_, gather(outcome_slots_)));
    }

private:
    struct Step {
        const Mechanism* mech = nullptr;
        const VariableKind* kind = nullptr;
        std::size_t slot = 0;
        std::vector<std::size_t> parent_slots;
        bool constant = false;
        DistributionParams cached;
    };

    std::span<const double> gather(const std::vector<std::size_t>& slots) {
        inputs_.clear();
        if (slots.empty()) {
            inputs_.push_back(1.0);
        } else {
            for (std::size_t s : slots) inputs_.push_back(values_[s]);
        }
        return inputs_;
    }

    const Mechanism* outcome_;
    std::vector<Step> steps_;
    std::vector<double> values_;
    std::vector<std::size_t> outcome_slots_;
    std::vector<double> inputs_;
    bool outcome_constant_ = false;
};

}  // namespace

DoEstimate interventional_probability(const TrainedModel& model, const std::string& outcome,
                                      const InterventionSet& assignments, std::size_t n_samples, std::uint64_t seed) {
    check_outcome(model, outcome);
    if (assignments.contains(outcome)) {
        throw Error(ErrorCode::InvalidIntervention, "cannot intervene on the outcome '" + outcome + "'");
    }
    if (n_samples < 1) throw Error(ErrorCode::InvalidIntervention, "n_samples must be >= 1");
    validate_interventions(model.graph(), assignments);

    MutilatedSampler sampler(model, outcome, assignments);
    Rng rng(seed);
    if (sampler.outcome_constant()) {
        return DoEstimate{sampler.draw(rng), 0.0, n_samples, seed};
    }

    // Welford running mean/variance.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double p = sampler.draw(rng);
        const double delta = p - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (p - mean);
    }
    const double n = static_cast<double>(n_samples);
    const double sd = n_samples > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    return DoEstimate{std::clamp(mean, 0.0, 1.0), sd / std::sqrt(n), n_samples, seed};
}

double conditional_probability(const TrainedModel& model, const std::string& outcome,
                               const std::map<std::string, double>& assignment) {
    check_outcome(model, outcome);
    const Mechanism& mech = model.mechanism(outcome);
    std::vector<double> inputs;
    for (const auto& p : mech.parents) {
        auto it = assignment.find(p);
        if (it == assignment.end()) throw Error(ErrorCode::MissingParent, "'" + p + "' of '" + outcome + "'");
        inputs.push_back(it->second);
    }
    if (inputs.empty()) inputs.push_back(1.0);
    return head_probability(forward(mech, inputs));
}

std::vector<CurvePoint> do_curve(const TrainedModel& model, const std::string& outcome, const std::string& sweep_node,
                                 std::span<const double> grid, const InterventionSet& context,
                                 std::size_t n_samples, std::uint64_t seed) {
    if (context.contains(sweep_node)) {
        throw Error(ErrorCode::InvalidIntervention, "sweep node '" + sweep_node + "' is also fixed in the context");
    }
    std::vector<CurvePoint> curve;
    curve.reserve(grid.size());
    InterventionSet assignments = context;
    for (double value : grid) {
        assignments[sweep_node] = value;
        curve.push_back(CurvePoint{value, interventional_probability(model, outcome, assignments, n_samples, seed)});
    }
    return curve;
}

}  // namespace pac
