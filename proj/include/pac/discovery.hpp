#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pac/causal_graph.hpp"
#include "pac/dataset.hpp"

namespace pac {

enum class CiKind { FisherZ, DegenerateGaussianLrt };

struct CiTest {
    CiKind kind = CiKind::FisherZ;
    double alpha = 0.05;
    /// Columns tested on log scale (must be strictly positive). Ratio variables
    /// such as a volume fraction become linear in their causes after the log.
    std::set<std::string> log_columns;

    void validate() const;
};

struct CiResult {
    bool independent = false;
    double p_value = 0.0;
};

/// Second moments of the (optionally log-transformed) columns. Binary columns
/// enter as 0/1 indicators, which is what the degenerate Gaussian test needs.
struct CovarianceStats {
    std::vector<std::string> names;
    Eigen::MatrixXd covariance;
    std::size_t n = 0;

    std::size_t index_of(const std::string& name) const;
};

/// Uses the given rows (with repetition) or all rows when `rows` is empty.
CovarianceStats covariance_stats(const Dataset& data, const std::set<std::string>& log_columns,
                                 std::span<const std::size_t> rows = {});

CiResult ci_test(const CovarianceStats& stats, const std::string& x, const std::string& y,
                 const std::vector<std::string>& given, const CiTest& test);
CiResult ci_test(const Dataset& data, const std::string& x, const std::string& y,
                 const std::vector<std::string>& given, const CiTest& test);

/// Ordered groups; a node in a later group can never cause one in an earlier
/// group. Unlisted nodes are unconstrained.
struct Tiers {
    std::vector<std::vector<std::string>> groups;
    bool allow_within_tier_edges = true;

    std::optional<std::size_t> tier_of(const std::string& node) const;
    bool forbids(const std::string& from, const std::string& to) const;
    void validate() const;
};

enum class EdgeType { Right, Left, Undirected, None };

/// Partially directed graph over lexicographically ordered nodes.
class Pdag {
public:
    explicit Pdag(std::vector<std::string> nodes);

    const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t index_of(const std::string& name) const;

    bool adjacent(std::size_t a, std::size_t b) const { return adj_[a][b]; }
    bool directed(std::size_t from, std::size_t to) const { return arrow_[from][to]; }
    bool undirected(std::size_t a, std::size_t b) const { return adj_[a][b] && !arrow_[a][b] && !arrow_[b][a]; }

    void connect(std::size_t a, std::size_t b);
    void disconnect(std::size_t a, std::size_t b);
    void orient(std::size_t from, std::size_t to);

    /// Type of the pair as seen from a towards b.
    EdgeType edge_type(std::size_t a, std::size_t b) const;
    EdgeType edge_type(const std::string& a, const std::string& b) const;

private:
    std::vector<std::string> nodes_;
    std::vector<std::vector<bool>> adj_;
    std::vector<std::vector<bool>> arrow_;
};

struct PcOptions {
    std::size_t max_condition_size = 3;
};

/// PC-stable: adjacency sets are frozen per conditioning level, pairs and
/// conditioning sets are visited in lexicographic order. Orientation applies
/// tiers, then unshielded colliders, then Meek rules 1-3.
Pdag pc(const CovarianceStats& stats, const CiTest& test, const Tiers& tiers, const PcOptions& options = {});
Pdag pc(const Dataset& data, const CiTest& test, const Tiers& tiers, const PcOptions& options = {});

struct EdgeFrequency {
    std::string a;  // a < b
    std::string b;
    double right = 0.0;  // a -> b
    double left = 0.0;   // a <- b
    double undirected = 0.0;
    double none = 0.0;
};

struct EdgeFrequencyTable {
    std::size_t n_boot = 0;
    std::vector<EdgeFrequency> rows;

    const EdgeFrequency& find(const std::string& a, const std::string& b) const;
};

/// Row resampling with replacement; bootstrap b uses derive_seed(seed, b).
EdgeFrequencyTable bootstrap(const Dataset& data, std::size_t n_boot, const CiTest& test, const Tiers& tiers,
                             std::uint64_t seed, const PcOptions& options = {});

/// Keeps every edge type seen in strictly more than `threshold` of the
/// bootstraps. Stable undirected edges are oriented by tier order or rejected
/// with UnresolvedUndirectedEdge.
CausalGraph stable_graph(const EdgeFrequencyTable& table, const std::vector<Node>& nodes, const Tiers& tiers,
                         double threshold = 0.5);

void write_edge_table(std::ostream& out, const EdgeFrequencyTable& table);
EdgeFrequencyTable read_edge_table(std::istream& in);

}  // namespace pac
