#include "pac/causal_graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include "pac/error.hpp"

namespace pac {

namespace {

std::string join(const std::vector<std::string>& names, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += sep;
        out += names[i];
    }
    return out;
}

void validate_kind(const Node& node) {
    if (const auto* c = std::get_if<Continuous>(&node.kind)) {
        if (!(c->min < c->max)) {
            throw Error(ErrorCode::InvalidGraph, "node '" + node.name + "' has empty support");
        }
    }
}

// Returns one directed cycle as a node sequence (first == last), or empty.
std::vector<std::string> find_cycle(const std::vector<Node>& nodes,
                                    const std::vector<std::vector<std::size_t>>& children) {
    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(nodes.size(), Mark::White);
    std::vector<std::size_t> stack;
    std::vector<std::string> cycle;

    std::function<bool(std::size_t)> visit = [&](std::size_t v) {
        mark[v] = Mark::Grey;
        stack.push_back(v);
        for (std::size_t c : children[v]) {
            if (mark[c] == Mark::Grey) {
                auto it = std::find(stack.begin(), stack.end(), c);
                for (; it != stack.end(); ++it) cycle.push_back(nodes[*it].name);
                cycle.push_back(nodes[c].name);
                return true;
            }
            if (mark[c] == Mark::White && visit(c)) return true;
        }
        stack.pop_back();
        mark[v] = Mark::Black;
        return false;
    };
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        if (mark[v] == Mark::White && visit(v)) break;
    }
    return cycle;
}

}  // namespace

void validate(const std::vector<Node>& nodes, const std::vector<Edge>& edges) {
    std::map<std::string, std::size_t> index;
    for (const Node& n : nodes) {
        if (n.name.empty()) throw Error(ErrorCode::InvalidGraph, "empty node name");
        if (!index.emplace(n.name, index.size()).second) {
            throw Error(ErrorCode::InvalidGraph, "duplicate node '" + n.name + "'");
        }
        validate_kind(n);
    }
    std::set<Edge> seen;
    std::vector<std::vector<std::size_t>> children(nodes.size());
    for (const Edge& e : edges) {
        for (const auto* end : {&e.from, &e.to}) {
            if (!index.contains(*end)) throw Error(ErrorCode::UnknownNode, "edge endpoint '" + *end + "'");
        }
        if (e.from == e.to) throw Error(ErrorCode::CycleDetected, "self-loop on '" + e.from + "'");
        if (!seen.insert(e).second) {
            throw Error(ErrorCode::DuplicateEdge, e.from + " -> " + e.to);
        }
        children[index[e.from]].push_back(index[e.to]);
    }
    auto cycle = find_cycle(nodes, children);
    if (!cycle.empty()) throw Error(ErrorCode::CycleDetected, join(cycle, " -> "));
}

CausalGraph::CausalGraph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    validate(nodes_, edges_);
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].name] = i;
    children_.assign(nodes_.size(), {});
    parents_.assign(nodes_.size(), {});
    for (const Edge& e : edges_) {
        children_[index_.at(e.from)].push_back(index_.at(e.to));
        parents_[index_.at(e.to)].push_back(index_.at(e.from));
    }
    const auto by_name = [this](std::size_t a, std::size_t b) { return nodes_[a].name < nodes_[b].name; };
    for (auto& c : children_) std::sort(c.begin(), c.end(), by_name);
    for (auto& p : parents_) std::sort(p.begin(), p.end(), by_name);
}

void validate(const CausalGraph& graph) { validate(graph.nodes(), graph.edges()); }

std::vector<std::string> CausalGraph::node_names() const {
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const Node& n : nodes_) out.push_back(n.name);
    return out;
}

bool CausalGraph::has_node(const std::string& name) const { return index_.contains(name); }

std::size_t CausalGraph::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "'" + name + "'");
    return it->second;
}

const Node& CausalGraph::node(const std::string& name) const { return nodes_[index_of(name)]; }

bool CausalGraph::has_edge(const std::string& from, const std::string& to) const {
    const auto& c = children_[index_of(from)];
    const std::size_t t = index_of(to);
    return std::find(c.begin(), c.end(), t) != c.end();
}

std::vector<std::string> CausalGraph::parents(const std::string& name) const {
    std::vector<std::string> out;
    for (std::size_t p : parents_[index_of(name)]) out.push_back(nodes_[p].name);
    return out;
}

std::vector<std::string> CausalGraph::children(const std::string& name) const {
    std::vector<std::string> out;
    for (std::size_t c : children_[index_of(name)]) out.push_back(nodes_[c].name);
    return out;
}

std::set<std::string> CausalGraph::ancestors(const std::string& name) const {
    std::set<std::string> out;
    std::vector<std::size_t> frontier{index_of(name)};
    while (!frontier.empty()) {
        const std::size_t v = frontier.back();
        frontier.pop_back();
        for (std::size_t p : parents_[v]) {
            if (out.insert(nodes_[p].name).second) frontier.push_back(p);
        }
    }
    return out;
}

std::vector<std::string> CausalGraph::topological_order() const {
    std::vector<std::size_t> in_degree(nodes_.size(), 0);
    for (std::size_t v = 0; v < nodes_.size(); ++v) in_degree[v] = parents_[v].size();

    using Item = std::pair<std::string, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        if (in_degree[v] == 0) ready.emplace(nodes_[v].name, v);
    }
    std::vector<std::string> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        auto [name, v] = ready.top();
        ready.pop();
        order.push_back(name);
        for (std::size_t c : children_[v]) {
            if (--in_degree[c] == 0) ready.emplace(nodes_[c].name, c);
        }
    }
    return order;
}

std::vector<Path> CausalGraph::directed_paths(const std::string& x, const std::string& y) const {
    const std::size_t source = index_of(x);
    const std::size_t target = index_of(y);
    if (source == target) throw Error(ErrorCode::PathInvalid, "path endpoints must differ");

    std::vector<Path> paths;
    std::vector<std::size_t> current{source};
    std::vector<bool> on_path(nodes_.size(), false);
    on_path[source] = true;

    std::function<void(std::size_t)> dfs = [&](std::size_t v) {
        for (std::size_t c : children_[v]) {
            if (on_path[c]) continue;
            current.push_back(c);
            if (c == target) {
                if (paths.size() == kMaxEnumeratedPaths) {
                    throw Error(ErrorCode::TooManyPaths,
                                "more than " + std::to_string(kMaxEnumeratedPaths) + " paths from " + x + " to " + y);
                }
                Path p;
                for (std::size_t i : current) p.push_back(nodes_[i].name);
                paths.push_back(std::move(p));
            } else {
                on_path[c] = true;
                dfs(c);
                on_path[c] = false;
            }
            current.pop_back();
        }
    };
    dfs(source);
    // Shorter paths first, then lexicographic: FU->S before FU->RV->S.
    std::stable_sort(paths.begin(), paths.end(),
                     [](const Path& a, const Path& b) { return a.size() < b.size() || (a.size() == b.size() && a < b); });
    return paths;
}

PathPartition CausalGraph::partition_for_path(const Path& path, const std::string& outcome) const {
    if (path.size() < 2 || path.back() != outcome) {
        throw Error(ErrorCode::PathInvalid, "path must end at the outcome '" + outcome + "'");
    }
    for (const auto& name : path) {
        if (!has_node(name)) throw Error(ErrorCode::PathInvalid, "unknown node '" + name + "' on path");
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!seen.insert(path[i]).second) throw Error(ErrorCode::PathInvalid, "path repeats '" + path[i] + "'");
        if (i + 1 < path.size() && !has_edge(path[i], path[i + 1])) {
            throw Error(ErrorCode::PathInvalid, "no edge " + path[i] + " -> " + path[i + 1]);
        }
    }
    PathPartition out;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) out.mediators.insert(path[i]);
    for (const Node& n : nodes_) {
        if (!seen.contains(n.name)) out.off_path.insert(n.name);
    }
    return out;
}

void validate_interventions(const CausalGraph& graph, const InterventionSet& assignments) {
    for (const auto& [name, value] : assignments) {
        if (!graph.has_node(name)) throw Error(ErrorCode::InvalidIntervention, "unknown node '" + name + "'");
        const Node& n = graph.node(name);
        if (is_binary(n.kind)) {
            if (value != 0.0 && value != 1.0) {
                throw Error(ErrorCode::InvalidIntervention, "binary node '" + name + "' needs 0 or 1");
            }
        } else {
            const auto& c = std::get<Continuous>(n.kind);
            if (!(value >= c.min && value <= c.max)) {
                std::ostringstream msg;
                msg << name << "=" << value << " outside [" << c.min << ", " << c.max << "]";
                throw Error(ErrorCode::InvalidIntervention, msg.str());
            }
        }
    }
}

}  // namespace pac
