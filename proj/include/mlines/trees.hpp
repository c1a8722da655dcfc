#pragma once

#include "mlines/combinatorics.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlines {

// A 1-bracketing of {1..r}: laminar, contains {1..r} and every singleton.
struct Bracketing {
    int r = 0;
    std::set<LeafSet> sets;
    bool operator==(const Bracketing& o) const { return r == o.r && sets == o.sets; }
    bool operator<(const Bracketing& o) const { return r != o.r ? r < o.r : sets < o.sets; }
};

inline std::vector<std::string> bracketing_violations(const Bracketing& b)
{
    std::vector<std::string> out;
    if (b.r < 1 || b.r > 63) {
        out.push_back("r out of range");
        return out;
    }
    const LeafSet all = full_set(b.r);
    for (LeafSet s : b.sets) {
        if (s == 0) out.push_back("empty bracket");
        if (!is_subset(s, all)) out.push_back("bracket has labels outside 1..r");
    }
    if (!b.sets.count(all)) out.push_back("missing the full bracket");
    for (int i = 1; i <= b.r; ++i)
        if (!b.sets.count(singleton(i))) out.push_back("missing singleton {" + std::to_string(i) + "}");
    for (auto it = b.sets.begin(); it != b.sets.end(); ++it)
        for (auto jt = std::next(it); jt != b.sets.end(); ++jt) {
            const LeafSet x = *it, y = *jt;
            if ((x & y) && !is_subset(x, y) && !is_subset(y, x)) out.push_back("brackets overlap without nesting");
        }
    return out;
}

inline std::string set_str(LeafSet s)
{
    std::string out = "{";
    bool first = true;
    for (int l : labels_of(s)) {
        if (!first) out += ",";
        out += std::to_string(l);
        first = false;
    }
    return out + "}";
}

struct TreeNode {
    LeafSet leaves = 0;
    int parent = -1;
    std::vector<int> children;  // sorted by minimal leaf label
};

// Stable rooted tree with leaves labeled 1..r. Vertices are identified with
// their leaf sets; node 0 is the root and nodes are stored in preorder.
class StableTree {
public:
    StableTree() = default;

    static StableTree from_bracketing(const Bracketing& b)
    {
        auto bad = bracketing_violations(b);
        if (!bad.empty()) throw std::invalid_argument("invalid bracketing: " + bad.front());
        StableTree t;
        t.r_ = b.r;
        // parent of each bracket = smallest strictly larger bracket containing it
        std::vector<LeafSet> by_size(b.sets.begin(), b.sets.end());
        std::sort(by_size.begin(), by_size.end(), [](LeafSet x, LeafSet y) {
            return set_size(x) != set_size(y) ? set_size(x) > set_size(y) : min_label(x) < min_label(y);
        });
        std::map<LeafSet, std::vector<LeafSet>> kids;
        for (std::size_t i = 1; i < by_size.size(); ++i) {
            LeafSet best = 0;
            for (std::size_t j = 0; j < i; ++j)
                if (is_subset(by_size[i], by_size[j]) && by_size[j] != by_size[i])
                    if (best == 0 || set_size(by_size[j]) < set_size(best)) best = by_size[j];
            kids[best].push_back(by_size[i]);
        }
        for (auto& [p, ks] : kids)
            std::sort(ks.begin(), ks.end(), [](LeafSet x, LeafSet y) { return min_label(x) < min_label(y); });
        t.build(by_size.front(), -1, kids);
        return t;
    }

    int r() const { return r_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& node(int v) const { return nodes_.at(static_cast<std::size_t>(v)); }
    int size() const { return static_cast<int>(nodes_.size()); }
    static constexpr int root() { return 0; }
    LeafSet leaves(int v) const { return node(v).leaves; }
    int parent(int v) const { return node(v).parent; }
    const std::vector<int>& children(int v) const { return node(v).children; }
    bool is_leaf(int v) const { return node(v).children.empty(); }
    int num_children(int v) const { return static_cast<int>(node(v).children.size()); }

    int node_of(LeafSet s) const
    {
        auto it = index_.find(s);
        return it == index_.end() ? -1 : it->second;
    }
    bool contains(LeafSet s) const { return index_.count(s) > 0; }
    int leaf_node(int label) const { return node_of(singleton(label)); }

    std::vector<int> interior() const
    {
        std::vector<int> out;
        for (int v = 0; v < size(); ++v)
            if (!is_leaf(v)) out.push_back(v);
        return out;
    }
    std::vector<LeafSet> nonroot_interior() const
    {
        std::vector<LeafSet> out;
        for (int v = 1; v < size(); ++v)
            if (!is_leaf(v)) out.push_back(leaves(v));
        return out;
    }

    Bracketing bracketing() const
    {
        Bracketing b;
        b.r = r_;
        for (const auto& n : nodes_) b.sets.insert(n.leaves);
        return b;
    }

    bool is_ancestor(int a, int d) const { return is_subset(leaves(d), leaves(a)); }

    // Vertices from a down to d, both included.
    std::vector<int> path(int a, int d) const
    {
        if (!is_ancestor(a, d)) throw std::invalid_argument("path: not an ancestor");
        std::vector<int> up;
        for (int v = d; v != a; v = parent(v)) up.push_back(v);
        up.push_back(a);
        std::reverse(up.begin(), up.end());
        return up;
    }

    // Index of child c within parent(c)'s children.
    int child_index(int c) const
    {
        const auto& ks = children(parent(c));
        return static_cast<int>(std::find(ks.begin(), ks.end(), c) - ks.begin());
    }

    bool operator==(const StableTree& o) const { return r_ == o.r_ && index_ == o.index_; }
    bool operator!=(const StableTree& o) const { return !(*this == o); }

    std::string str() const { return str_at(root()); }

private:
    int build(LeafSet s, int parent, const std::map<LeafSet, std::vector<LeafSet>>& kids)
    {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{s, parent, {}});
        index_[s] = id;
        auto it = kids.find(s);
        if (it != kids.end())
            for (LeafSet k : it->second) {
                const int c = build(k, id, kids);
                nodes_[static_cast<std::size_t>(id)].children.push_back(c);
            }
        return id;
    }
    std::string str_at(int v) const
    {
        if (is_leaf(v)) return std::to_string(min_label(leaves(v)));
        std::string out = "[";
        for (std::size_t i = 0; i < children(v).size(); ++i) {
            if (i) out += ",";
            out += str_at(children(v)[i]);
        }
        return out + "]";
    }

    int r_ = 0;
    std::vector<TreeNode> nodes_;
    std::map<LeafSet, int> index_;
};

inline Bracketing tree_to_bracketing(const StableTree& t) { return t.bracketing(); }
inline StableTree bracketing_to_tree(const Bracketing& b) { return StableTree::from_bracketing(b); }

inline StableTree corolla(int r)
{
    Bracketing b;
    b.r = r;
    b.sets.insert(full_set(r));
    for (int i = 1; i <= r; ++i) b.sets.insert(singleton(i));
    return StableTree::from_bracketing(b);
}

namespace detail {
inline const std::vector<std::set<LeafSet>>& brackets_on(LeafSet s, std::map<LeafSet, std::vector<std::set<LeafSet>>>& memo)
{
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    std::vector<std::set<LeafSet>> out;
    if (set_size(s) == 1) {
        out.push_back({s});
    } else {
        for (const auto& blocks : mask_partitions(s)) {
            if (blocks.size() < 2) continue;
            std::vector<const std::vector<std::set<LeafSet>>*> options;
            std::vector<std::size_t> sizes;
            for (LeafSet b : blocks) {
                options.push_back(&brackets_on(b, memo));
                sizes.push_back(options.back()->size());
            }
            for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
                std::set<LeafSet> u{s};
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    const auto& part = (*options[k])[idx[k]];
                    u.insert(part.begin(), part.end());
                }
                out.push_back(std::move(u));
            });
        }
    }
    return memo[s] = std::move(out);
}
}  // namespace detail

// One tree per isomorphism class, in a fixed generation order.
inline std::vector<StableTree> enumerate_stable_trees(int r)
{
    if (r < 1 || r > 20) throw std::invalid_argument("enumerate_stable_trees: r out of range");
    std::map<LeafSet, std::vector<std::set<LeafSet>>> memo;
    std::vector<StableTree> out;
    for (const auto& sets : detail::brackets_on(full_set(r), memo)) out.push_back(StableTree::from_bracketing(Bracketing{r, sets}));
    return out;
}

inline int tree_dimension(const StableTree& t)
{
    int d = 0;
    for (int v : t.interior()) d += t.num_children(v) - 2;
    return d;
}

// T' <= T: T is obtained from T' by contracting edges.
inline bool poset_leq_tree(const StableTree& t1, const StableTree& t2)
{
    if (t1.r() != t2.r()) throw std::invalid_argument("poset_leq_tree: different r");
    const auto b1 = t1.bracketing().sets;
    for (LeafSet s : t2.bracketing().sets)
        if (!b1.count(s)) return false;
    return true;
}

// Values on the non-root interior vertices, keyed by leaf set.
using GlueVector = std::map<LeafSet, int>;

inline void check_glue_vector(const StableTree& t, const GlueVector& rv)
{
    const auto inner = t.nonroot_interior();
    if (rv.size() != inner.size()) throw std::invalid_argument("glue vector must cover exactly the non-root interior vertices");
    for (LeafSet s : inner) {
        auto it = rv.find(s);
        if (it == rv.end()) throw std::invalid_argument("glue vector missing vertex " + set_str(s));
        if (it->second != 0 && it->second != 1) throw std::invalid_argument("glue vector values must be 0 or 1");
    }
}

// Contract the edges whose incoming (lower) vertex carries a 1.
inline StableTree glue_tree(const StableTree& t, const GlueVector& rv)
{
    check_glue_vector(t, rv);
    Bracketing b = t.bracketing();
    for (const auto& [s, v] : rv)
        if (v == 1) b.sets.erase(s);
    return StableTree::from_bracketing(b);
}

// All {0,1} vectors on the non-root interior vertices, in binary counting order.
inline std::vector<GlueVector> all_glue_vectors(const StableTree& t)
{
    const auto inner = t.nonroot_interior();
    if (inner.size() > 24) throw std::invalid_argument("too many interior vertices");
    std::vector<GlueVector> out;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << inner.size()); ++m) {
        GlueVector g;
        for (std::size_t k = 0; k < inner.size(); ++k) g[inner[k]] = static_cast<int>((m >> k) & 1U);
        out.push_back(std::move(g));
    }
    return out;
}

// s[rho] = (s0(rho), s1(rho)), children given by leaf set.
struct Slice {
    std::map<LeafSet, std::pair<LeafSet, LeafSet>> s;
    bool operator==(const Slice& o) const { return s == o.s; }
};

inline std::vector<std::string> slice_violations(const StableTree& t, const Slice& sl)
{
    std::vector<std::string> out;
    for (int v : t.interior()) {
        const LeafSet rho = t.leaves(v);
        auto it = sl.s.find(rho);
        if (it == sl.s.end()) {
            out.push_back("slice missing vertex " + set_str(rho));
            continue;
        }
        const auto [a, b] = it->second;
        if (a == b) out.push_back("slice picks the same child twice at " + set_str(rho));
        const int na = t.node_of(a), nb = t.node_of(b);
        if (na < 0 || nb < 0 || t.parent(na) != v || t.parent(nb) != v) out.push_back("slice picks a non-child at " + set_str(rho));
    }
    if (sl.s.size() != t.interior().size()) out.push_back("slice has entries for non-interior vertices");
    return out;
}

inline Slice default_slice(const StableTree& t)
{
    Slice sl;
    for (int v : t.interior()) {
        const auto& ks = t.children(v);
        if (ks.size() < 2) throw std::invalid_argument("interior vertex with fewer than 2 children");
        sl.s[t.leaves(v)] = {t.leaves(ks[0]), t.leaves(ks[1])};
    }
    return sl;
}

// The slice on g_T(rv): start at s_i(rho) and follow s_0 through contracted vertices.
inline Slice pushforward_slice(const StableTree& t, const Slice& sl, const GlueVector& rv)
{
    auto bad = slice_violations(t, sl);
    if (!bad.empty()) throw std::invalid_argument(bad.front());
    const StableTree g = glue_tree(t, rv);
    auto walk = [&](LeafSet tau) {
        while (!g.contains(tau)) tau = sl.s.at(tau).first;
        return tau;
    };
    Slice out;
    for (int v : g.interior()) {
        const LeafSet rho = g.leaves(v);
        out.s[rho] = {walk(sl.s.at(rho).first), walk(sl.s.at(rho).second)};
    }
    return out;
}

// Leaf reached from vertex v by stepping to s_first(v) and then following s_0.
inline int slice_leaf(const StableTree& t, const Slice& sl, int v, bool first_step_one)
{
    if (t.is_leaf(v)) return min_label(t.leaves(v));
    LeafSet cur = first_step_one ? sl.s.at(t.leaves(v)).second : sl.s.at(t.leaves(v)).first;
    while (set_size(cur) > 1) cur = sl.s.at(cur).first;
    return min_label(cur);
}

inline nlohmann::json tree_to_json(const StableTree& t)
{
    std::function<nlohmann::json(int)> rec = [&](int v) -> nlohmann::json {
        if (t.is_leaf(v)) return min_label(t.leaves(v));
        nlohmann::json arr = nlohmann::json::array();
        for (int c : t.children(v)) arr.push_back(rec(c));
        return arr;
    };
    return rec(StableTree::root());
}

inline StableTree tree_from_json(const nlohmann::json& j)
{
    Bracketing b;
    std::function<LeafSet(const nlohmann::json&)> rec = [&](const nlohmann::json& x) -> LeafSet {
        if (x.is_number_integer()) {
            const int l = x.get<int>();
            if (l < 1 || l > 63) throw std::invalid_argument("leaf label out of range");
            if (b.sets.count(singleton(l))) throw std::invalid_argument("duplicate leaf label " + std::to_string(l));
            b.sets.insert(singleton(l));
            return singleton(l);
        }
        if (!x.is_array() || x.size() < 2) throw std::invalid_argument("tree node must be a leaf label or a list of >= 2 children");
        LeafSet s = 0;
        for (const auto& c : x) s |= rec(c);
        b.sets.insert(s);
        return s;
    };
    const LeafSet all = rec(j);
    b.r = set_size(all);
    if (all != full_set(b.r)) throw std::invalid_argument("leaf labels must be exactly 1..r");
    return StableTree::from_bracketing(b);
}

inline nlohmann::json slice_to_json(const Slice& sl)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [rho, kids] : sl.s)
        arr.push_back({{"vertex", labels_of(rho)}, {"s0", labels_of(kids.first)}, {"s1", labels_of(kids.second)}});
    return arr;
}

inline LeafSet leafset_from_json(const nlohmann::json& j)
{
    LeafSet s = 0;
    for (const auto& l : j) {
        const int v = l.get<int>();
        if (v < 1 || v > 63) throw std::invalid_argument("label out of range");
        s |= singleton(v);
    }
    return s;
}

inline Slice slice_from_json(const nlohmann::json& j)
{
    Slice sl;
    for (const auto& e : j)
        sl.s[leafset_from_json(e.at("vertex"))] = {leafset_from_json(e.at("s0")), leafset_from_json(e.at("s1"))};
    return sl;
}

}  // namespace mlines
