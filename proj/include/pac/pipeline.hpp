#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pac/action_selection.hpp"
#include "pac/density.hpp"
#include "pac/intervention.hpp"
#include "pac/pouring_world.hpp"

namespace pac {

/// Fits one mechanism per graph node; node k in graph order trains with seed
/// derive_seed(config.seed, k).
TrainedModel train_model(const Dataset& frame, const CausalGraph& graph, const TrainConfig& config,
                         std::map<std::string, FitReport>* reports = nullptr);

struct ConfusionMatrix {
    std::size_t true_positive = 0;
    std::size_t false_negative = 0;
    std::size_t true_negative = 0;
    std::size_t false_positive = 0;

    double true_positive_rate() const;
    double true_negative_rate() const;
};

/// Predicts S with P(S | FU, RD, RV) >= cutoff.
ConfusionMatrix prediction_confusion(const TrainedModel& model, const std::vector<Trial>& trials,
                                     double cutoff = 0.5);

struct EvaluationConfig {
    SelectionPolicy policy;
    std::vector<std::string> variables{kRD, kFU, kRC};
    GridConfig grid{kDefaultGridPoints, 1000};
    std::size_t replications = 10;
    std::uint64_t seed = 0;
    double cutoff = 0.5;
};

struct TrialOutcome {
    std::size_t trial_index = 0;
    std::string variable;
    SelectionResult result;
    std::size_t successes = 0;  // replays without spillage (alternatives only)
    std::size_t replications = 0;
};

struct VariableSummary {
    std::string variable;
    std::size_t analyzed = 0;
    std::size_t alternatives = 0;
    std::size_t no_change = 0;
    std::size_t none = 0;
    std::size_t successes = 0;
    std::size_t replications = 0;
    double min_trial_success_rate = 1.0;
    std::size_t trials_above_chance = 0;

    double coverage() const;
    double success_rate() const;
};

struct EvaluationReport {
    std::size_t n_trials = 0;
    std::size_t n_spillage = 0;
    ConfusionMatrix confusion;
    std::vector<VariableSummary> variables;
    std::vector<TrialOutcome> outcomes;  // spillage trials x variables, in trial order

    const VariableSummary& summary(const std::string& variable) const;
};

/// Runs alternative selection for every spillage trial and variable, then
/// replays each alternative in the ground-truth world.
EvaluationReport evaluate(const TrainedModel& model, const PouringWorld& world, const std::vector<Trial>& trials,
                          const EvaluationConfig& config);

}  // namespace pac
