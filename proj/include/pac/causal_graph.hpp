#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace pac {

struct Continuous {
    double min = 0.0;
    double max = 1.0;
};

struct Binary {};

using VariableKind = std::variant<Continuous, Binary>;

inline bool is_binary(const VariableKind& kind) { return std::holds_alternative<Binary>(kind); }

struct Node {
    std::string name;
    VariableKind kind;
};

struct Edge {
    std::string from;
    std::string to;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Hard assignments for the do-operator. Binary nodes take 0.0 or 1.0.
using InterventionSet = std::map<std::string, double>;

using Path = std::vector<std::string>;

struct PathPartition {
    std::set<std::string> off_path;   // W
    std::set<std::string> mediators;  // Z
};

inline constexpr std::size_t kMaxEnumeratedPaths = 10'000;

/// Throws pac::Error (CycleDetected, UnknownNode, DuplicateEdge, InvalidGraph)
/// when the node/edge lists do not describe a DAG with unique names.
void validate(const std::vector<Node>& nodes, const std::vector<Edge>& edges);

/// A validated, immutable DAG over named variables.
///
/// Nodes are addressed by name everywhere. Parent lists are returned in
/// lexicographic order; that order is also the input order of every learned
/// mechanism.
class CausalGraph {
public:
    CausalGraph() = default;
    CausalGraph(std::vector<Node> nodes, std::vector<Edge> edges);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::vector<std::string> node_names() const;

    bool has_node(const std::string& name) const;
    const Node& node(const std::string& name) const;
    bool has_edge(const std::string& from, const std::string& to) const;

    std::vector<std::string> parents(const std::string& name) const;
    std::vector<std::string> children(const std::string& name) const;
    std::set<std::string> ancestors(const std::string& name) const;

    /// Kahn's algorithm with a lexicographic ready-queue.
    std::vector<std::string> topological_order() const;

    /// All simple directed paths from x to y, shortest first, ties in
    /// lexicographic order.
    /// Throws TooManyPaths beyond kMaxEnumeratedPaths.
    std::vector<Path> directed_paths(const std::string& x, const std::string& y) const;

    /// Splits the remaining nodes into off-path (W) and mediators (Z).
    PathPartition partition_for_path(const Path& path, const std::string& outcome) const;

private:
    std::size_t index_of(const std::string& name) const;

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> parents_;
};

void validate(const CausalGraph& graph);

/// Checks keys exist and values lie in each node's support.
void validate_interventions(const CausalGraph& graph, const InterventionSet& assignments);

}  // namespace pac
