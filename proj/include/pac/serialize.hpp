#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pac/action_selection.hpp"
#include "pac/actual_causation.hpp"
#include "pac/causal_graph.hpp"
#include "pac/density.hpp"
#include "pac/discovery.hpp"
#include "pac/intervention.hpp"
#include "pac/pouring_world.hpp"

namespace pac {

using Json = nlohmann::ordered_json;

// All *_from_json functions throw Schema on malformed input.

Json graph_to_json(const CausalGraph& graph);
CausalGraph graph_from_json(const Json& j);

Json mechanism_to_json(const Mechanism& mech);
Mechanism mechanism_from_json(const Json& j);

/// {"graph": ..., "mechanisms": [...]} in graph node order.
Json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const Json& j);

Json estimate_to_json(const DoEstimate& est);
DoEstimate estimate_from_json(const Json& j);

Json region_to_json(const AcRegion& region);
AcRegion region_from_json(const Json& j);
/// One row per grid value: value,rhs,rhs_std_error,raising, then one column per subset.
void write_region_csv(std::ostream& out, const AcRegion& region);

std::string selection_label(const SelectionResult& result);
Json selection_to_json(const std::string& trial_id, const std::string& variable, const SelectionResult& result,
                       double threshold);

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

Json tiers_to_json(const Tiers& tiers);
Tiers tiers_from_json(const Json& j);

void write_trials_jsonl(std::ostream& out, const std::vector<Trial>& trials);
std::vector<Trial> read_trials_jsonl(std::istream& in);

/// CSV or JSON-lines depending on the extension (.jsonl / .json -> JSON-lines).
std::vector<Trial> read_trials_file(const std::string& path);
void write_trials_file(const std::string& path, const std::vector<Trial>& trials);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json read_json_file(const std::string& path);

}  // namespace pac
