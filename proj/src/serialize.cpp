#include "pac/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pac/error.hpp"
#include "pac/format.hpp"

namespace pac {

namespace {

template <typename T>
T get(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::Schema, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Schema, std::string("field '") + key + "': " + e.what());
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Json graph_to_json(const CausalGraph& graph) {
    Json nodes = Json::array();
    for (const Node& n : graph.nodes()) {
        Json node{{"name", n.name}};
        if (is_binary(n.kind)) {
            node["kind"] = "binary";
            node["support"] = {0, 1};
        } else {
            const auto& c = std::get<Continuous>(n.kind);
            node["kind"] = "continuous";
            node["support"] = {c.min, c.max};
        }
        nodes.push_back(std::move(node));
    }
    Json edges = Json::array();
    for (const Edge& e : graph.edges()) edges.push_back({e.from, e.to});
    return Json{{"nodes", nodes}, {"edges", edges}};
}

CausalGraph graph_from_json(const Json& j) {
    std::vector<Node> nodes;
    for (const Json& n : get<Json>(j, "nodes")) {
        Node node;
        node.name = get<std::string>(n, "name");
        const auto kind = get<std::string>(n, "kind");
        if (kind == "binary") {
            node.kind = Binary{};
        } else if (kind == "continuous") {
            const auto support = get<std::vector<double>>(n, "support");
            if (support.size() != 2) throw Error(ErrorCode::Schema, "support of '" + node.name + "' needs [min,max]");
            node.kind = Continuous{support[0], support[1]};
        } else {
            throw Error(ErrorCode::Schema, "unknown kind '" + kind + "'");
        }
        nodes.push_back(std::move(node));
    }
    std::vector<Edge> edges;
    for (const Json& e : get<Json>(j, "edges")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
            throw Error(ErrorCode::Schema, "edges must be [\"from\",\"to\"] pairs");
        }
        edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    return CausalGraph(std::move(nodes), std::move(edges));
}

Json mechanism_to_json(const Mechanism& mech) {
    Json layers = Json::array();
    for (const DenseLayer& l : mech.params.layers) {
        Json w = Json::array();
        for (std::size_t o = 0; o < l.outputs; ++o) {
            Json row = Json::array();
            for (std::size_t i = 0; i < l.inputs; ++i) row.push_back(l.w(o, i));
            w.push_back(std::move(row));
        }
        layers.push_back(Json{{"w", w}, {"b", l.bias}});
    }
    return Json{{"node", mech.node},
                {"parents", mech.parents},
                {"head", mech.head == HeadKind::Gaussian ? "gaussian" : "bernoulli"},
                {"standardization", {{"mean", mech.standardization.mean}, {"scale", mech.standardization.scale}}},
                {"layers", layers}};
}

Mechanism mechanism_from_json(const Json& j) {
    Mechanism m;
    m.node = get<std::string>(j, "node");
    m.parents = get<std::vector<std::string>>(j, "parents");
    const auto head = get<std::string>(j, "head");
    if (head == "gaussian") {
        m.head = HeadKind::Gaussian;
    } else if (head == "bernoulli") {
        m.head = HeadKind::Bernoulli;
    } else {
        throw Error(ErrorCode::Schema, "unknown head '" + head + "'");
    }
    const Json st = get<Json>(j, "standardization");
    m.standardization.mean = get<std::vector<double>>(st, "mean");
    m.standardization.scale = get<std::vector<double>>(st, "scale");
    if (m.standardization.mean.size() != m.input_dim() || m.standardization.scale.size() != m.input_dim()) {
        throw Error(ErrorCode::Schema, "standardization of '" + m.node + "' has the wrong width");
    }
    std::size_t width = m.input_dim();
    for (const Json& lj : get<Json>(j, "layers")) {
        const auto w = get<std::vector<std::vector<double>>>(lj, "w");
        DenseLayer l;
        l.bias = get<std::vector<double>>(lj, "b");
        l.outputs = w.size();
        l.inputs = width;
        if (l.bias.size() != l.outputs) throw Error(ErrorCode::Schema, "bias size mismatch in '" + m.node + "'");
        for (const auto& row : w) {
            if (row.size() != width) throw Error(ErrorCode::Schema, "weight row width mismatch in '" + m.node + "'");
            l.weights.insert(l.weights.end(), row.begin(), row.end());
        }
        width = l.outputs;
        m.params.layers.push_back(std::move(l));
    }
    const std::size_t head_width = m.head == HeadKind::Gaussian ? 2 : 1;
    if (m.params.layers.empty() || width != head_width) {
        throw Error(ErrorCode::Schema, "output width of '" + m.node + "' does not match its head");
    }
    return m;
}

Json model_to_json(const TrainedModel& model) {
    Json mechs = Json::array();
    for (const Node& n : model.graph().nodes()) mechs.push_back(mechanism_to_json(model.mechanism(n.name)));
    return Json{{"graph", graph_to_json(model.graph())}, {"mechanisms", mechs}};
}

TrainedModel model_from_json(const Json& j) {
    CausalGraph graph = graph_from_json(get<Json>(j, "graph"));
    std::map<std::string, Mechanism> mechs;
    for (const Json& mj : get<Json>(j, "mechanisms")) {
        Mechanism m = mechanism_from_json(mj);
        const std::string name = m.node;
        if (!mechs.emplace(name, std::move(m)).second) {
            throw Error(ErrorCode::Schema, "two mechanisms for '" + name + "'");
        }
    }
    try {
        return TrainedModel(std::move(graph), std::move(mechs));
    } catch (const Error& e) {
        throw Error(ErrorCode::Schema, e.what());
    }
}

Json estimate_to_json(const DoEstimate& est) {
    return Json{{"probability", est.probability},
                {"std_error", est.std_error},
                {"n_samples", est.n_samples},
                {"seed", est.seed}};
}

DoEstimate estimate_from_json(const Json& j) {
    return DoEstimate{get<double>(j, "probability"), get<double>(j, "std_error"), get<std::size_t>(j, "n_samples"),
                      get<std::uint64_t>(j, "seed")};
}

Json region_to_json(const AcRegion& region) {
    Json rhs = Json::array();
    for (const auto& e : region.rhs) rhs.push_back(estimate_to_json(e));
    Json lhs = Json::object();
    for (const auto& [key, e] : region.lhs) lhs[key] = estimate_to_json(e);
    Json raising = Json::array();
    for (bool r : region.raising) raising.push_back(r);
    Json context = Json::object();
    for (const auto& [k, v] : region.context) context[k] = v;
    return Json{{"cause", region.cause}, {"outcome", region.outcome}, {"path", region.path},
                {"context", context},    {"grid", region.grid},       {"rhs", rhs},
                {"lhs", lhs},            {"raising", raising}};
}

AcRegion region_from_json(const Json& j) {
    AcRegion r;
    r.cause = get<std::string>(j, "cause");
    r.outcome = get<std::string>(j, "outcome");
    r.path = get<std::vector<std::string>>(j, "path");
    r.context = get<std::map<std::string, double>>(j, "context");
    r.grid = get<std::vector<double>>(j, "grid");
    for (const Json& e : get<Json>(j, "rhs")) r.rhs.push_back(estimate_from_json(e));
    const Json lhs = get<Json>(j, "lhs");  // items() must not outlive the object it walks
    if (!lhs.is_object()) throw Error(ErrorCode::Schema, "lhs must be an object keyed by subset");
    for (const auto& [key, e] : lhs.items()) r.lhs[key] = estimate_from_json(e);
    for (bool b : get<std::vector<bool>>(j, "raising")) r.raising.push_back(b);
    if (r.rhs.size() != r.grid.size() || r.raising.size() != r.grid.size()) {
        throw Error(ErrorCode::Schema, "region arrays differ in length");
    }
    return r;
}

void write_region_csv(std::ostream& out, const AcRegion& region) {
    out << "value,rhs,rhs_std_error,raising";
    for (const auto& [key, e] : region.lhs) out << ",lhs" << key;
    out << '\n';
    for (std::size_t i = 0; i < region.grid.size(); ++i) {
        out << format_double(region.grid[i]) << ',' << format_double(region.rhs[i].probability) << ','
            << format_double(region.rhs[i].std_error) << ',' << (region.raising[i] ? 1 : 0);
        for (const auto& [key, e] : region.lhs) out << ',' << format_double(e.probability);
        out << '\n';
    }
}

std::string selection_label(const SelectionResult& result) {
    if (std::holds_alternative<Alternative>(result)) return "alternative";
    if (std::holds_alternative<NoChangeNeeded>(result)) return "no_change";
    return "none";
}

Json selection_to_json(const std::string& trial_id, const std::string& variable, const SelectionResult& result,
                       double threshold) {
    Json j{{"trial_id", trial_id}, {"variable", variable}, {"result", selection_label(result)}};
    if (const auto* alt = std::get_if<Alternative>(&result)) {
        j["value"] = alt->value;
        j["predicted_probability"] = alt->predicted_probability;
    } else if (const auto* keep = std::get_if<NoChangeNeeded>(&result)) {
        j["value"] = nullptr;
        j["predicted_probability"] = keep->reference_probability;
    } else {
        j["value"] = nullptr;
        j["predicted_probability"] = nullptr;
    }
    j["threshold"] = threshold;
    return j;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "value,probability,std_error,n_samples,seed\n";
    for (const auto& pt : curve) {
        out << format_double(pt.value) << ',' << format_double(pt.estimate.probability) << ','
            << format_double(pt.estimate.std_error) << ',' << pt.estimate.n_samples << ',' << pt.estimate.seed << '\n';
    }
}

Json tiers_to_json(const Tiers& tiers) { return Json(tiers.groups); }

Tiers tiers_from_json(const Json& j) {
    Tiers t;
    try {
        t.groups = j.get<std::vector<std::vector<std::string>>>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::InvalidConfig, "tiers must be a JSON list of lists of node names");
    }
    t.validate();
    return t;
}

void write_trials_jsonl(std::ostream& out, const std::vector<Trial>& trials) {
    for (const Trial& t : trials) {
        out << Json{{"rc", t.rc}, {"fu", t.fu}, {"rd", t.rd}, {"rv", t.rv}, {"spillage", t.spillage ? 1 : 0}}.dump()
            << '\n';
    }
}

std::vector<Trial> read_trials_jsonl(std::istream& in) {
    Dataset data({"rc", "fu", "rd", "rv", "spillage"});
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::Schema, "line " + std::to_string(lineno) + ": invalid JSON");
        }
        const std::array<double, 5> row{get<double>(j, "rc"), get<double>(j, "fu"), get<double>(j, "rd"),
                                        get<double>(j, "rv"), get<double>(j, "spillage")};
        data.add_row(row);
    }
    return trials_from_dataset(data);
}

std::vector<Trial> read_trials_file(const std::string& path) {
    if (ends_with(path, ".jsonl") || ends_with(path, ".json")) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
        return read_trials_jsonl(in);
    }
    return trials_from_dataset(read_csv_file(path));
}

void write_trials_file(const std::string& path, const std::vector<Trial>& trials) {
    std::ostringstream out;
    if (ends_with(path, ".jsonl") || ends_with(path, ".json")) {
        write_trials_jsonl(out, trials);
    } else {
        write_csv(out, to_dataset(trials));
    }
    write_text_file(path, out.str());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

Json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Schema, "'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace pac
