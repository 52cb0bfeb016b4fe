#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/matrix.hpp"

namespace mosaic {

struct ClustererConfig {
    size_t min_cluster_size = 10;
    size_t min_samples = 5;
};

struct ClusterAssignment {
    std::vector<int> labels;            // -1 = outlier; 0..m-1 by decreasing size
    std::vector<double> probabilities;  // 0 iff outlier
};

// Condensed-tree row: child < n_points means a point leaving `parent` at
// `lambda`; child >= n_points is a sub-cluster born there.
struct CondensedRow {
    size_t parent;
    size_t child;
    double lambda;
    size_t child_size;
};

struct CondensedTree {
    size_t n_points = 0;
    size_t root = 0;  // root cluster id (== n_points)
    std::vector<CondensedRow> rows;
    std::map<size_t, double> stability;     // per condensed cluster
    std::map<size_t, size_t> cluster_size;  // size at birth
    std::vector<size_t> selected;           // chosen cluster ids (EOM)
};

// Distance to the min_samples-th nearest neighbor, self excluded; Euclidean,
// since clustering runs in the reduced space.
inline std::vector<double> core_distances(const Matrix& X, size_t min_samples) {
    size_t n = X.rows();
    if (n <= min_samples)
        throw TooFewPointsError("need n > min_samples: n=" + std::to_string(n) +
                                " min_samples=" + std::to_string(min_samples));
    std::vector<double> core(n);
    std::vector<double> d(n - 1);
    for (size_t i = 0; i < n; ++i) {
        size_t m = 0;
        for (size_t j = 0; j < n; ++j)
            if (j != i) d[m++] = euclidean_distance(X.row(i), X.row(j));
        std::nth_element(d.begin(), d.begin() + static_cast<long>(min_samples - 1),
                         d.end());
        core[i] = d[min_samples - 1];
    }
    return core;
}

class MutualReachability {
public:
    MutualReachability(const Matrix& X, size_t min_samples)
        : X_(X), core_(core_distances(X, min_samples)) {}

    double operator()(size_t i, size_t j) const {
        double d = euclidean_distance(X_.row(i), X_.row(j));
        return std::max({core_[i], core_[j], d});
    }

    const std::vector<double>& core() const { return core_; }
    size_t size() const { return X_.rows(); }

private:
    const Matrix& X_;
    std::vector<double> core_;
};

struct MstEdge {
    size_t i, j;  // i < j
    double weight;
};

// Exact Prim MST over a pairwise-distance callable. Ties resolved by
// (weight, i, j) lexicographic so the edge list is unique.
template <typename DistFn>
std::vector<MstEdge> build_mst(const DistFn& dist, size_t n) {
    if (n < 2) throw TooFewPointsError("MST needs at least 2 points");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, kInf);
    std::vector<size_t> from(n, 0);
    in_tree[0] = true;
    for (size_t j = 1; j < n; ++j) {
        best[j] = dist(0, j);
        from[j] = 0;
    }

    std::vector<MstEdge> edges;
    edges.reserve(n - 1);
    for (size_t step = 1; step < n; ++step) {
        size_t pick = n;
        for (size_t j = 0; j < n; ++j) {
            if (in_tree[j] || best[j] == kInf) continue;
            if (pick == n) { pick = j; continue; }
            double bw = best[pick];
            if (best[j] < bw) { pick = j; continue; }
            if (best[j] == bw) {
                auto key = [&](size_t t) {
                    size_t a = std::min(from[t], t), b = std::max(from[t], t);
                    return std::make_pair(a, b);
                };
                if (key(j) < key(pick)) pick = j;
            }
        }
        size_t a = std::min(from[pick], pick), b = std::max(from[pick], pick);
        edges.push_back({a, b, best[pick]});
        in_tree[pick] = true;
        for (size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            double w = dist(pick, j);
            if (w < best[j]) {
                best[j] = w;
                from[j] = pick;
            } else if (w == best[j]) {
                size_t na = std::min(pick, j), nb = std::max(pick, j);
                size_t oa = std::min(from[j], j), ob = std::max(from[j], j);
                if (std::make_pair(na, nb) < std::make_pair(oa, ob)) from[j] = pick;
            }
        }
    }
    return edges;
}

namespace detail {

struct Dsu {
    std::vector<size_t> parent, size;
    explicit Dsu(size_t n) : parent(n), size(n, 1) {
        for (size_t i = 0; i < n; ++i) parent[i] = i;
    }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    size_t unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size[a] < size[b] || (size[a] == size[b] && b < a)) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        return a;
    }
};

// Single-linkage hierarchy where all edges of equal weight collapse into one
// multiway merge. This makes the tree independent of tie order, which is
// what lets the exact-equivalence tests against the naive reference pass.
struct Hierarchy {
    // nodes 0..n-1 are leaves; internal nodes follow
    std::vector<std::vector<size_t>> children;
    std::vector<double> dist;   // merge distance (leaves: 0)
    std::vector<size_t> size;   // leaf count
    size_t root = 0;
};

inline Hierarchy build_hierarchy(std::vector<MstEdge> edges, size_t n) {
    std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
        return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
    });
    Hierarchy h;
    h.children.assign(n, {});
    h.dist.assign(n, 0.0);
    h.size.assign(n, 1);

    Dsu dsu(n);
    std::vector<size_t> node_of(n);  // DSU root -> hierarchy node
    for (size_t i = 0; i < n; ++i) node_of[i] = i;

    size_t e = 0;
    while (e < edges.size()) {
        size_t g = e;
        double w = edges[e].weight;
        while (g < edges.size() && edges[g].weight == w) ++g;

        // Children sets of every component that changes in this tie group.
        std::map<size_t, std::set<size_t>> merged;  // final root -> child nodes
        for (size_t t = e; t < g; ++t) {
            size_t ra = dsu.find(edges[t].i), rb = dsu.find(edges[t].j);
            if (ra == rb) continue;  // cannot happen for MST edges, kept for safety
            size_t na = node_of[ra], nb = node_of[rb];
            size_t r = dsu.unite(ra, rb);
            auto moved = [&](size_t old_root, size_t node) {
                auto it = merged.find(old_root);
                if (it != merged.end() && old_root != r) {
                    merged[r].insert(it->second.begin(), it->second.end());
                    merged.erase(it);
                } else {
                    merged[r].insert(node);
                }
            };
            moved(ra, na);
            moved(rb, nb);
        }
        for (auto& [root, kids] : merged) {
            size_t id = h.children.size();
            h.children.emplace_back(kids.begin(), kids.end());
            h.dist.push_back(w);
            size_t sz = 0;
            for (size_t k : kids) sz += h.size[k];
            h.size.push_back(sz);
            node_of[root] = id;
        }
        e = g;
    }
    h.root = h.children.size() - 1;
    return h;
}

inline void collect_leaves(const Hierarchy& h, size_t node, std::vector<size_t>& out) {
    std::vector<size_t> stack{node};
    while (!stack.empty()) {
        size_t x = stack.back();
        stack.pop_back();
        if (h.children[x].empty()) {
            out.push_back(x);
        } else {
            for (size_t c : h.children[x]) stack.push_back(c);
        }
    }
}

}  // namespace detail

// Condense the hierarchy, score stability, select clusters by excess of
// mass, and label points. The root is selectable (a single tight cluster is
// a legitimate outcome) but only clusters of at least min_cluster_size ever
// get chosen.
inline CondensedTree condense_and_select(const detail::Hierarchy& h, size_t n,
                                         const ClustererConfig& cfg) {
    CondensedTree tree;
    tree.n_points = n;
    tree.root = n;
    size_t next_id = n + 1;

    std::vector<std::pair<size_t, size_t>> stack;  // (hierarchy node, condensed id)
    std::map<size_t, size_t> birth_row;            // condensed id -> creating row idx
    tree.cluster_size[n] = n;

    if (h.root < n) {
        // Degenerate single-point "hierarchy"; no clusters possible.
        tree.stability[n] = 0.0;
    }
    stack.emplace_back(h.root, n);
    std::map<size_t, double> birth;  // condensed id -> birth lambda
    birth[n] = 0.0;

    while (!stack.empty()) {
        auto [node, cid] = stack.back();
        stack.pop_back();
        if (h.children[node].empty()) continue;  // leaf reached as a cluster root
        double lam = 1.0 / std::max(h.dist[node], 1e-300);

        std::vector<size_t> big;
        for (size_t c : h.children[node])
            if (h.size[c] >= cfg.min_cluster_size) big.push_back(c);

        auto fall_out = [&](size_t sub) {
            std::vector<size_t> leaves;
            detail::collect_leaves(h, sub, leaves);
            std::sort(leaves.begin(), leaves.end());
            for (size_t p : leaves) tree.rows.push_back({cid, p, lam, 1});
        };

        if (big.size() >= 2) {
            for (size_t c : h.children[node]) {
                if (h.size[c] >= cfg.min_cluster_size) {
                    size_t id = next_id++;
                    tree.rows.push_back({cid, id, lam, h.size[c]});
                    tree.cluster_size[id] = h.size[c];
                    birth[id] = lam;
                    stack.emplace_back(c, id);
                } else {
                    fall_out(c);
                }
            }
        } else if (big.size() == 1) {
            for (size_t c : h.children[node]) {
                if (c == big[0]) stack.emplace_back(c, cid);
                else fall_out(c);
            }
        } else {
            fall_out(node);
        }
    }

    // Stability: sum over a cluster's rows of (lambda - birth) * child_size.
    for (auto& [cid, sz] : tree.cluster_size) tree.stability[cid] = 0.0;
    for (const auto& row : tree.rows)
        tree.stability[row.parent] +=
            (row.lambda - birth[row.parent]) * static_cast<double>(row.child_size);

    // Excess of mass, bottom-up. Cluster ids increase downward (BFS order),
    // so a reverse sweep sees children first. A parent keeps the win on
    // ties, matching the canonical selection rule.
    std::map<size_t, std::vector<size_t>> kids;
    for (const auto& row : tree.rows)
        if (row.child >= n) kids[row.parent].push_back(row.child);

    std::map<size_t, double> subtree_stab;
    std::map<size_t, bool> is_selected;
    std::vector<size_t> ids;
    for (auto& [cid, sz] : tree.cluster_size) ids.push_back(cid);
    std::sort(ids.rbegin(), ids.rend());
    for (size_t cid : ids) {
        double child_sum = 0.0;
        for (size_t k : kids[cid]) child_sum += subtree_stab[k];
        bool selectable = tree.cluster_size[cid] >= cfg.min_cluster_size;
        if (selectable && (kids[cid].empty() || tree.stability[cid] >= child_sum)) {
            is_selected[cid] = true;
            subtree_stab[cid] = tree.stability[cid];
            // deselect descendants
            std::vector<size_t> q = kids[cid];
            while (!q.empty()) {
                size_t x = q.back();
                q.pop_back();
                is_selected[x] = false;
                for (size_t k : kids[x]) q.push_back(k);
            }
        } else {
            is_selected[cid] = false;
            subtree_stab[cid] = child_sum;
        }
    }
    for (size_t cid : ids)
        if (is_selected[cid]) tree.selected.push_back(cid);
    std::sort(tree.selected.begin(), tree.selected.end());
    return tree;
}

inline ClusterAssignment label_points(const CondensedTree& tree) {
    size_t n = tree.n_points;
    ClusterAssignment out;
    out.labels.assign(n, -1);
    out.probabilities.assign(n, 0.0);
    if (tree.selected.empty()) return out;

    // Map every condensed cluster to its nearest selected ancestor (if any).
    std::map<size_t, size_t> parent_of;
    for (const auto& row : tree.rows)
        if (row.child >= n) parent_of[row.child] = row.parent;
    std::set<size_t> selected(tree.selected.begin(), tree.selected.end());
    std::map<size_t, long> owner;  // condensed cluster -> selected ancestor or -1
    std::function<long(size_t)> resolve = [&](size_t cid) -> long {
        auto it = owner.find(cid);
        if (it != owner.end()) return it->second;
        long res;
        if (selected.count(cid)) res = static_cast<long>(cid);
        else if (!parent_of.count(cid)) res = -1;
        else res = resolve(parent_of[cid]);
        owner[cid] = res;
        return res;
    };

    // Member points and their departure lambdas per selected cluster.
    std::map<size_t, std::vector<std::pair<size_t, double>>> members;
    for (const auto& row : tree.rows) {
        if (row.child >= n) continue;
        long own = resolve(row.parent);
        if (own >= 0)
            members[static_cast<size_t>(own)].emplace_back(row.child, row.lambda);
    }

    // Order clusters by decreasing size then smallest member index.
    struct Slot {
        size_t cid;
        size_t size;
        size_t min_idx;
    };
    std::vector<Slot> slots;
    for (size_t cid : tree.selected) {
        auto& m = members[cid];
        if (m.empty()) continue;
        size_t mn = n;
        for (auto& [p, lam] : m) mn = std::min(mn, p);
        slots.push_back({cid, m.size(), mn});
    }
    std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.min_idx < b.min_idx;
    });

    for (size_t rank = 0; rank < slots.size(); ++rank) {
        auto& m = members[slots[rank].cid];
        double lam_max = 0.0;
        for (auto& [p, lam] : m) lam_max = std::max(lam_max, lam);
        for (auto& [p, lam] : m) {
            out.labels[p] = static_cast<int>(rank);
            out.probabilities[p] =
                lam_max > 0.0 ? std::min(lam, lam_max) / lam_max : 1.0;
        }
    }
    return out;
}

struct ClusterResult {
    ClusterAssignment assignment;
    CondensedTree tree;
};

inline ClusterResult extract_clusters(const std::vector<MstEdge>& mst,
                                      const ClustererConfig& cfg) {
    if (cfg.min_cluster_size < 2) throw ConfigError("min_cluster_size must be >= 2");
    if (cfg.min_samples < 1) throw ConfigError("min_samples must be >= 1");
    size_t n = mst.size() + 1;
    detail::Hierarchy h = detail::build_hierarchy(mst, n);
    CondensedTree tree = condense_and_select(h, n, cfg);
    ClusterAssignment assignment = label_points(tree);
    return {std::move(assignment), std::move(tree)};
}

// Reduced coordinates in, labels out: the full density-clustering pass.
inline ClusterResult cluster_points(const Matrix& X, const ClustererConfig& cfg,
                                    const std::vector<MstEdge>* mst_in = nullptr) {
    std::vector<MstEdge> local;
    if (!mst_in) {
        MutualReachability mreach(X, cfg.min_samples);
        local = build_mst(mreach, X.rows());
        mst_in = &local;
    }
    return extract_clusters(*mst_in, cfg);
}

}  // namespace mosaic
