#include "pac/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pac/error.hpp"
#include "pac/format.hpp"
#include "pac/random.hpp"

namespace pac {

void CiTest::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie strictly between 0 and 1");
}

std::size_t CovarianceStats::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::Schema, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

CovarianceStats covariance_stats(const Dataset& data, const std::set<std::string>& log_columns,
                                 std::span<const std::size_t> rows) {
    const std::size_t n = rows.empty() ? data.rows() : rows.size();
    const std::size_t k = data.cols();
    if (n == 0) throw Error(ErrorCode::EmptyDataset, "no rows to test");
    for (const auto& c : log_columns) {
        if (!data.has_column(c)) throw Error(ErrorCode::Schema, "log column '" + c + "' not in data");
    }

    Eigen::MatrixXd x(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto col = data.column(j);
        const bool take_log = log_columns.contains(data.names()[j]);
        for (std::size_t i = 0; i < n; ++i) {
            double v = col[rows.empty() ? i : rows[i]];
            if (take_log) {
                if (!(v > 0.0)) throw Error(ErrorCode::Schema, "non-positive value in log column '" + data.names()[j] + "'");
                v = std::log(v);
            }
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    CovarianceStats stats;
    stats.names = data.names();
    stats.covariance = (x.transpose() * x) / static_cast<double>(n > 1 ? n - 1 : 1);
    stats.n = n;
    return stats;
}

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) out(a, b) = m(idx[a], idx[b]);
    }
    return out;
}

// Residual variance of variable `target` regressed on `given` (Schur complement).
double residual_variance(const Eigen::MatrixXd& cov, Eigen::Index target, const std::vector<Eigen::Index>& given) {
    const double vxx = cov(target, target);
    if (given.empty()) return vxx;
    const Eigen::MatrixXd s = submatrix(cov, given);
    Eigen::VectorXd c(static_cast<Eigen::Index>(given.size()));
    for (std::size_t i = 0; i < given.size(); ++i) c(static_cast<Eigen::Index>(i)) = cov(target, given[i]);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "conditioning set covariance is singular");
    return vxx - c.dot(llt.solve(c));
}

}  // namespace

CiResult ci_test(const CovarianceStats& stats, const std::string& x, const std::string& y,
                 const std::vector<std::string>& given, const CiTest& test) {
    test.validate();
    if (x == y) throw Error(ErrorCode::InvalidConfig, "ci_test needs two distinct variables");
    if (stats.n < given.size() + 10) {
        throw Error(ErrorCode::InsufficientData, std::to_string(stats.n) + " rows for a conditioning set of " +
                                                     std::to_string(given.size()));
    }
    const auto xi = static_cast<Eigen::Index>(stats.index_of(x));
    const auto yi = static_cast<Eigen::Index>(stats.index_of(y));
    std::vector<Eigen::Index> zi;
    for (const auto& g : given) zi.push_back(static_cast<Eigen::Index>(stats.index_of(g)));
    const double n = static_cast<double>(stats.n);

    CiResult result;
    if (test.kind == CiKind::FisherZ) {
        std::vector<Eigen::Index> idx{xi, yi};
        idx.insert(idx.end(), zi.begin(), zi.end());
        const Eigen::MatrixXd sub = submatrix(stats.covariance, idx);
        Eigen::LLT<Eigen::MatrixXd> llt(sub);
        if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "covariance of {x,y,Z} is singular");
        const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(sub.rows(), sub.cols()));
        double r = -precision(0, 1) / std::sqrt(precision(0, 0) * precision(1, 1));
        r = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);
        const double dof = n - static_cast<double>(zi.size()) - 3.0;
        const double z = std::atanh(r) * std::sqrt(std::max(dof, 1.0));
        result.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
    } else {
        // Nested Gaussian regressions of x on Z and on Z + {y}; 1 degree of freedom.
        const double rss0 = residual_variance(stats.covariance, xi, zi);
        std::vector<Eigen::Index> zy = zi;
        zy.push_back(yi);
        const double rss1 = residual_variance(stats.covariance, xi, zy);
        if (!(rss0 > 0.0) || !(rss1 > 0.0)) throw Error(ErrorCode::SingularCovariance, "degenerate residual variance");
        const double stat = std::max(0.0, n * std::log(rss0 / rss1));
        result.p_value = std::erfc(std::sqrt(stat / 2.0));
    }
    result.independent = result.p_value > test.alpha;
    return result;
}

CiResult ci_test(const Dataset& data, const std::string& x, const std::string& y,
                 const std::vector<std::string>& given, const CiTest& test) {
    return ci_test(covariance_stats(data, test.log_columns), x, y, given, test);
}

std::optional<std::size_t> Tiers::tier_of(const std::string& node) const {
    for (std::size_t t = 0; t < groups.size(); ++t) {
        if (std::find(groups[t].begin(), groups[t].end(), node) != groups[t].end()) return t;
    }
    return std::nullopt;
}

bool Tiers::forbids(const std::string& from, const std::string& to) const {
    const auto tf = tier_of(from);
    const auto tt = tier_of(to);
    if (!tf || !tt) return false;
    if (*tf > *tt) return true;
    return *tf == *tt && !allow_within_tier_edges;
}

void Tiers::validate() const {
    std::set<std::string> seen;
    for (const auto& g : groups) {
        for (const auto& n : g) {
            if (!seen.insert(n).second) throw Error(ErrorCode::InvalidConfig, "node '" + n + "' appears in two tiers");
        }
    }
}

Pdag::Pdag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    adj_.assign(nodes_.size(), std::vector<bool>(nodes_.size(), false));
    arrow_ = adj_;
}

std::size_t Pdag::index_of(const std::string& name) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end() || *it != name) throw Error(ErrorCode::UnknownNode, "'" + name + "'");
    return static_cast<std::size_t>(it - nodes_.begin());
}

void Pdag::connect(std::size_t a, std::size_t b) {
    adj_[a][b] = adj_[b][a] = true;
    arrow_[a][b] = arrow_[b][a] = false;
}

void Pdag::disconnect(std::size_t a, std::size_t b) {
    adj_[a][b] = adj_[b][a] = false;
    arrow_[a][b] = arrow_[b][a] = false;
}

void Pdag::orient(std::size_t from, std::size_t to) {
    adj_[from][to] = adj_[to][from] = true;
    arrow_[from][to] = true;
    arrow_[to][from] = false;
}

EdgeType Pdag::edge_type(std::size_t a, std::size_t b) const {
    if (!adj_[a][b]) return EdgeType::None;
    if (arrow_[a][b]) return EdgeType::Right;
    if (arrow_[b][a]) return EdgeType::Left;
    return EdgeType::Undirected;
}

EdgeType Pdag::edge_type(const std::string& a, const std::string& b) const { return edge_type(index_of(a), index_of(b)); }

namespace {

// Calls fn on each size-k subset of `items` in lexicographic order; stops
// when fn returns true.
template <typename Fn>
bool for_each_subset(const std::vector<std::size_t>& items, std::size_t k, Fn&& fn) {
    if (k > items.size()) return false;
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    std::vector<std::size_t> chosen(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) chosen[i] = items[pick[i]];
        if (fn(chosen)) return true;
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == items.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

class PcRun {
public:
    PcRun(const CovarianceStats& stats, const CiTest& test, const Tiers& tiers, const PcOptions& options)
        : stats_(stats), test_(test), tiers_(tiers), options_(options), g_(stats.names) {
        const std::size_t n = g_.size();
        sepsets_.assign(n, std::vector<std::vector<std::size_t>>(n));
        separated_.assign(n, std::vector<bool>(n, false));
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const auto& na = g_.nodes()[a];
                const auto& nb = g_.nodes()[b];
                if (tiers_.forbids(na, nb) && tiers_.forbids(nb, na)) continue;
                g_.connect(a, b);
            }
        }
    }

    Pdag run() {
        skeleton();
        orient_by_tiers();
        orient_colliders();
        apply_meek();
        return g_;
    }

private:
    std::vector<std::size_t> neighbours(const std::vector<std::vector<bool>>& adj, std::size_t a, std::size_t skip) const {
        std::vector<std::size_t> out;
        for (std::size_t c = 0; c < adj.size(); ++c) {
            if (c != a && c != skip && adj[a][c]) out.push_back(c);
        }
        return out;
    }

    bool independent(std::size_t a, std::size_t b, const std::vector<std::size_t>& given) {
        std::vector<std::string> names;
        for (std::size_t g : given) names.push_back(g_.nodes()[g]);
        // Columns are looked up by name, so pdag order and data order may differ.
        return ci_test(stats_, g_.nodes()[a], g_.nodes()[b], names, test_).independent;
    }

    void skeleton() {
        const std::size_t n = g_.size();
        for (std::size_t depth = 0; depth <= options_.max_condition_size; ++depth) {
            std::vector<std::vector<bool>> frozen(n, std::vector<bool>(n));
            bool any_candidate = false;
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) frozen[a][b] = g_.adjacent(a, b);
            }
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = a + 1; b < n; ++b) {
                    if (!g_.adjacent(a, b)) continue;
                    for (auto [from, other] : {std::pair{a, b}, std::pair{b, a}}) {
                        const auto adj = neighbours(frozen, from, other);
                        if (adj.size() < depth) continue;
                        any_candidate = true;
                        const bool removed = for_each_subset(adj, depth, [&](const std::vector<std::size_t>& s) {
                            if (!independent(a, b, s)) return false;
                            g_.disconnect(a, b);
                            sepsets_[a][b] = sepsets_[b][a] = s;
                            separated_[a][b] = separated_[b][a] = true;
                            return true;
                        });
                        if (removed) break;
                    }
                }
            }
            if (!any_candidate) break;
        }
    }

    bool may_orient(std::size_t from, std::size_t to) const {
        return g_.undirected(from, to) && !tiers_.forbids(g_.nodes()[from], g_.nodes()[to]);
    }

    void orient_by_tiers() {
        const std::size_t n = g_.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b && g_.undirected(a, b) && tiers_.forbids(g_.nodes()[b], g_.nodes()[a])) g_.orient(a, b);
            }
        }
    }

    void orient_colliders() {
        const std::size_t n = g_.size();
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = a + 1; b < n; ++b) {
                    if (a == k || b == k || !g_.adjacent(a, k) || !g_.adjacent(b, k) || g_.adjacent(a, b)) continue;
                    if (!separated_[a][b]) continue;
                    const auto& s = sepsets_[a][b];
                    if (std::find(s.begin(), s.end(), k) != s.end()) continue;
                    // Skip rather than overwrite an orientation that conflicts.
                    if (g_.directed(k, a) || g_.directed(k, b)) continue;
                    if (tiers_.forbids(g_.nodes()[a], g_.nodes()[k]) || tiers_.forbids(g_.nodes()[b], g_.nodes()[k])) {
                        continue;
                    }
                    g_.orient(a, k);
                    g_.orient(b, k);
                }
            }
        }
    }

    void apply_meek() {
        const std::size_t n = g_.size();
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t b = 0; b < n; ++b) {
                for (std::size_t c = 0; c < n; ++c) {
                    if (b == c || !may_orient(b, c)) continue;
                    if (rule1(b, c) || rule2(b, c) || rule3(b, c)) {
                        g_.orient(b, c);
                        changed = true;
                    }
                }
            }
        }
    }

    // a -> b, b - c, a and c not adjacent.
    bool rule1(std::size_t b, std::size_t c) const {
        for (std::size_t a = 0; a < g_.size(); ++a) {
            if (a != c && g_.directed(a, b) && !g_.adjacent(a, c)) return true;
        }
        return false;
    }

    // b -> m -> c with b - c.
    bool rule2(std::size_t b, std::size_t c) const {
        for (std::size_t m = 0; m < g_.size(); ++m) {
            if (g_.directed(b, m) && g_.directed(m, c)) return true;
        }
        return false;
    }

    // b - p, b - q, p -> c, q -> c, p and q not adjacent.
    bool rule3(std::size_t b, std::size_t c) const {
        const std::size_t n = g_.size();
        for (std::size_t p = 0; p < n; ++p) {
            if (!g_.undirected(b, p) || !g_.directed(p, c)) continue;
            for (std::size_t q = p + 1; q < n; ++q) {
                if (g_.undirected(b, q) && g_.directed(q, c) && !g_.adjacent(p, q)) return true;
            }
        }
        return false;
    }

    const CovarianceStats& stats_;
    const CiTest& test_;
    const Tiers& tiers_;
    const PcOptions& options_;
    Pdag g_;
    std::vector<std::vector<std::vector<std::size_t>>> sepsets_;
    std::vector<std::vector<bool>> separated_;
};

}  // namespace

Pdag pc(const CovarianceStats& stats, const CiTest& test, const Tiers& tiers, const PcOptions& options) {
    test.validate();
    tiers.validate();
    return PcRun(stats, test, tiers, options).run();
}

Pdag pc(const Dataset& data, const CiTest& test, const Tiers& tiers, const PcOptions& options) {
    if (data.rows() == 0) throw Error(ErrorCode::EmptyDataset, "no rows");
    return pc(covariance_stats(data, test.log_columns), test, tiers, options);
}

const EdgeFrequency& EdgeFrequencyTable::find(const std::string& a, const std::string& b) const {
    for (const auto& r : rows) {
        if ((r.a == a && r.b == b) || (r.a == b && r.b == a)) return r;
    }
    throw Error(ErrorCode::UnknownNode, "no pair " + a + "," + b);
}

EdgeFrequencyTable bootstrap(const Dataset& data, std::size_t n_boot, const CiTest& test, const Tiers& tiers,
                             std::uint64_t seed, const PcOptions& options) {
    if (n_boot < 1) throw Error(ErrorCode::InvalidConfig, "n_boot must be >= 1");
    if (data.rows() == 0) throw Error(ErrorCode::EmptyDataset, "no rows");
    Pdag shape(data.names());
    const std::size_t k = shape.size();
    // counts[a][b][type] for a < b
    std::vector<std::array<std::size_t, 4>> counts(k * k, std::array<std::size_t, 4>{});

    std::vector<std::size_t> rows(data.rows());
    for (std::size_t b = 0; b < n_boot; ++b) {
        Rng rng(derive_seed(seed, b));
        std::uniform_int_distribution<std::size_t> pick(0, data.rows() - 1);
        for (auto& r : rows) r = pick(rng);
        const Pdag g = pc(covariance_stats(data, test.log_columns, rows), test, tiers, options);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) ++counts[i * k + j][static_cast<std::size_t>(g.edge_type(i, j))];
        }
    }

    EdgeFrequencyTable table;
    table.n_boot = n_boot;
    const double total = static_cast<double>(n_boot);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const auto& c = counts[i * k + j];
            table.rows.push_back(EdgeFrequency{shape.nodes()[i], shape.nodes()[j], c[0] / total, c[1] / total,
                                               c[2] / total, c[3] / total});
        }
    }
    return table;
}

CausalGraph stable_graph(const EdgeFrequencyTable& table, const std::vector<Node>& nodes, const Tiers& tiers,
                         double threshold) {
    std::vector<Edge> edges;
    for (const auto& r : table.rows) {
        if (r.right > threshold) {
            edges.push_back({r.a, r.b});
        } else if (r.left > threshold) {
            edges.push_back({r.b, r.a});
        } else if (r.undirected > threshold) {
            if (tiers.forbids(r.b, r.a)) {
                edges.push_back({r.a, r.b});
            } else if (tiers.forbids(r.a, r.b)) {
                edges.push_back({r.b, r.a});
            } else {
                throw Error(ErrorCode::UnresolvedUndirectedEdge, r.a + " - " + r.b);
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    return CausalGraph(nodes, edges);
}

void write_edge_table(std::ostream& out, const EdgeFrequencyTable& table) {
    out << "node_a,node_b,right,left,undirected,none\n";
    for (const auto& r : table.rows) {
        out << r.a << ',' << r.b << ',' << format_double(r.right) << ',' << format_double(r.left) << ','
            << format_double(r.undirected) << ',' << format_double(r.none) << '\n';
    }
}

EdgeFrequencyTable read_edge_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "node_a,node_b,right,left,undirected,none") {
        throw Error(ErrorCode::Schema, "edge table header must be node_a,node_b,right,left,undirected,none");
    }
    EdgeFrequencyTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6) throw Error(ErrorCode::Schema, "line " + std::to_string(lineno) + ": expected 6 fields");
        EdgeFrequency r{cells[0], cells[1]};
        try {
            r.right = std::stod(cells[2]);
            r.left = std::stod(cells[3]);
            r.undirected = std::stod(cells[4]);
            r.none = std::stod(cells[5]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::Schema, "line " + std::to_string(lineno) + ": bad number");
        }
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace pac
