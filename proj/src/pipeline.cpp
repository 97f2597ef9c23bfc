#include "pac/pipeline.hpp"

#include <algorithm>

#include "pac/error.hpp"
#include "pac/parallel.hpp"

namespace pac {

TrainedModel train_model(const Dataset& frame, const CausalGraph& graph, const TrainConfig& config,
                         std::map<std::string, FitReport>* reports) {
    config.validate();
    const auto& nodes = graph.nodes();
    std::vector<Mechanism> fitted(nodes.size());
    std::vector<FitReport> fit_reports(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) {
        TrainConfig node_config = config;
        node_config.seed = derive_seed(config.seed, k);
        fitted[k] = fit(frame, nodes[k], graph.parents(nodes[k].name), node_config, &fit_reports[k]);
    });
    std::map<std::string, Mechanism> mechs;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (reports != nullptr) (*reports)[nodes[k].name] = fit_reports[k];
        mechs.emplace(nodes[k].name, std::move(fitted[k]));
    }
    return TrainedModel(graph, std::move(mechs));
}

double ConfusionMatrix::true_positive_rate() const {
    const std::size_t p = true_positive + false_negative;
    return p == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(p);
}

double ConfusionMatrix::true_negative_rate() const {
    const std::size_t n = true_negative + false_positive;
    return n == 0 ? 0.0 : static_cast<double>(true_negative) / static_cast<double>(n);
}

ConfusionMatrix prediction_confusion(const TrainedModel& model, const std::vector<Trial>& trials, double cutoff) {
    ConfusionMatrix m;
    for (const Trial& t : trials) {
        const bool predicted = conditional_probability(model, kS, trial_context(t)) >= cutoff;
        if (t.spillage) {
            ++(predicted ? m.true_positive : m.false_negative);
        } else {
            ++(predicted ? m.false_positive : m.true_negative);
        }
    }
    return m;
}

double VariableSummary::coverage() const {
    return analyzed == 0 ? 0.0 : static_cast<double>(alternatives) / static_cast<double>(analyzed);
}

double VariableSummary::success_rate() const {
    return replications == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(replications);
}

const VariableSummary& EvaluationReport::summary(const std::string& variable) const {
    for (const auto& s : variables) {
        if (s.variable == variable) return s;
    }
    throw Error(ErrorCode::UnknownNode, "no summary for '" + variable + "'");
}

namespace {

Overrides override_for(const std::string& variable, double value) {
    Overrides o;
    if (variable == kRC) {
        o.rc = value;
    } else if (variable == kFU) {
        o.fu = value;
    } else if (variable == kRD) {
        o.rd = value;
    } else {
        throw Error(ErrorCode::InvalidConfig, "'" + variable + "' is not an action parameter (RC, FU or RD)");
    }
    return o;
}

}  // namespace

EvaluationReport evaluate(const TrainedModel& model, const PouringWorld& world, const std::vector<Trial>& trials,
                          const EvaluationConfig& config) {
    if (trials.empty()) throw Error(ErrorCode::EmptyDataset, "no test trials");
    config.policy.validate();
    for (const auto& v : config.variables) override_for(v, 0.0);

    EvaluationReport report;
    report.n_trials = trials.size();
    report.confusion = prediction_confusion(model, trials, config.cutoff);

    std::vector<std::size_t> spills;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].spillage) spills.push_back(i);
    }
    report.n_spillage = spills.size();

    const std::size_t nv = config.variables.size();
    report.outcomes.resize(spills.size() * nv);
    parallel_for(spills.size(), [&](std::size_t s) {
        const std::size_t i = spills[s];
        const InterventionSet observed = trial_context(trials[i]);
        for (std::size_t v = 0; v < nv; ++v) {
            const std::string& var = config.variables[v];
            TrialOutcome& out = report.outcomes[s * nv + v];
            out.trial_index = i;
            out.variable = var;
            out.result = select_for_trial(model, observed, var, kS, config.policy, config.grid,
                                          derive_seed(derive_seed(config.seed, v), i))
                             .result;
            if (const auto* alt = std::get_if<Alternative>(&out.result)) {
                out.replications = config.replications;
                out.successes = world.replay(trials[i], override_for(var, alt->value), config.replications,
                                             derive_seed(derive_seed(config.seed, nv + v), i));
            }
        }
    });

    for (std::size_t v = 0; v < nv; ++v) {
        VariableSummary sum;
        sum.variable = config.variables[v];
        for (std::size_t s = 0; s < spills.size(); ++s) {
            const TrialOutcome& out = report.outcomes[s * nv + v];
            ++sum.analyzed;
            if (std::holds_alternative<Alternative>(out.result)) {
                ++sum.alternatives;
                sum.successes += out.successes;
                sum.replications += out.replications;
                if (out.replications > 0) {
                    const double rate = static_cast<double>(out.successes) / static_cast<double>(out.replications);
                    sum.min_trial_success_rate = std::min(sum.min_trial_success_rate, rate);
                    if (rate > 0.5) ++sum.trials_above_chance;
                }
            } else if (std::holds_alternative<NoChangeNeeded>(out.result)) {
                ++sum.no_change;
            } else {
                ++sum.none;
            }
        }
        if (sum.alternatives == 0) sum.min_trial_success_rate = 0.0;
        report.variables.push_back(sum);
    }
    return report;
}

}  // namespace pac
