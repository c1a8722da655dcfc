#pragma once

#include "mlines/trees.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mlines {

enum class NodeKind { component, seam, mark };

inline const char* kind_name(NodeKind k)
{
    switch (k) {
    case NodeKind::component: return "component";
    case NodeKind::seam: return "seam";
    case NodeKind::mark: return "mark";
    }
    return "?";
}

// Nested description of a bubble tree, used for construction and JSON.
struct BubbleSpec {
    NodeKind kind = NodeKind::component;
    LeafSet lines = 0;  // seam label; ignored for components (derived) and marks
    int line = 0, point = 0;  // mark label (i,j)
    std::vector<BubbleSpec> children;

    static BubbleSpec mark(int i, int j) { return BubbleSpec{NodeKind::mark, singleton(i), i, j, {}}; }
    static BubbleSpec seam(LeafSet lines, std::vector<BubbleSpec> kids = {}) { return BubbleSpec{NodeKind::seam, lines, 0, 0, std::move(kids)}; }
    static BubbleSpec component(std::vector<BubbleSpec> seams) { return BubbleSpec{NodeKind::component, 0, 0, 0, std::move(seams)}; }
};

struct BubbleNode {
    NodeKind kind = NodeKind::component;
    int parent = -1;
    std::vector<int> children;
    LeafSet lines = 0;  // image under the coherence map, as a seam-tree vertex
    int line = 0, point = 0;
};

// A C-type tree-pair T_b -> T_s. The coherence map sends each bubble vertex to
// the seam-tree vertex with leaf set `lines`. Node 0 is the root; nodes are in
// preorder with canonically sorted children.
struct TreePair {
    std::vector<int> n;
    StableTree seam;
    std::vector<BubbleNode> bubble;

    int r() const { return static_cast<int>(n.size()); }
    const BubbleNode& node(int v) const { return bubble.at(static_cast<std::size_t>(v)); }
    int size() const { return static_cast<int>(bubble.size()); }
    bool is_component(int v) const { return node(v).kind == NodeKind::component; }
    bool is_multi_line(int v) const { return is_component(v) && node(v).children.size() >= 2; }
    bool is_single_line(int v) const { return is_component(v) && node(v).children.size() == 1; }

    // Parent component of a component or mark (through its seam), -1 at the root.
    int parent_component(int v) const
    {
        const int s = node(v).parent;
        return s < 0 ? -1 : node(s).parent;
    }
};

inline int total_points(const std::vector<int>& n) { return std::accumulate(n.begin(), n.end(), 0); }

namespace detail {

using MarkKey = std::pair<int, int>;
constexpr MarkKey no_mark{1 << 30, 0};

inline MarkKey min_mark(const BubbleSpec& b)
{
    if (b.kind == NodeKind::mark) return {b.line, b.point};
    MarkKey best = no_mark;
    for (const auto& c : b.children) best = std::min(best, min_mark(c));
    return best;
}

inline LeafSet derive_lines(BubbleSpec& b)
{
    if (b.kind == NodeKind::mark) return b.lines = singleton(b.line);
    if (b.kind == NodeKind::seam) {
        for (auto& c : b.children) derive_lines(c);
        return b.lines;
    }
    LeafSet s = 0;
    for (auto& c : b.children) s |= derive_lines(c);
    return b.lines = s;
}

inline void sort_spec(BubbleSpec& b)
{
    for (auto& c : b.children) sort_spec(c);
    if (b.kind == NodeKind::component) {
        std::stable_sort(b.children.begin(), b.children.end(), [](const BubbleSpec& x, const BubbleSpec& y) {
            return min_label(x.lines | (LeafSet{1} << 63)) < min_label(y.lines | (LeafSet{1} << 63));
        });
    } else if (b.kind == NodeKind::seam) {
        std::stable_sort(b.children.begin(), b.children.end(),
                         [](const BubbleSpec& x, const BubbleSpec& y) { return min_mark(x) < min_mark(y); });
    }
}

inline int flatten(const BubbleSpec& b, int parent, std::vector<BubbleNode>& out)
{
    const int id = static_cast<int>(out.size());
    out.push_back(BubbleNode{b.kind, parent, {}, b.lines, b.line, b.point});
    for (const auto& c : b.children) {
        const int k = flatten(c, id, out);
        out[static_cast<std::size_t>(id)].children.push_back(k);
    }
    return id;
}

}  // namespace detail

// Canonicalizes child order; does not validate.
inline TreePair make_tree_pair(std::vector<int> n, StableTree seam, BubbleSpec root)
{
    detail::derive_lines(root);
    detail::sort_spec(root);
    TreePair tp{std::move(n), std::move(seam), {}};
    detail::flatten(root, -1, tp.bubble);
    return tp;
}

inline BubbleSpec to_spec(const TreePair& tp, int v = 0)
{
    const auto& x = tp.node(v);
    BubbleSpec b{x.kind, x.lines, x.line, x.point, {}};
    for (int c : x.children) b.children.push_back(to_spec(tp, c));
    return b;
}

// Compact text form: components C(...), seams {lines}[...], marks m<i>.<j>.
inline std::string bubble_str(const TreePair& tp, int v = 0)
{
    const auto& x = tp.node(v);
    if (x.kind == NodeKind::mark) return "m" + std::to_string(x.line) + "." + std::to_string(x.point);
    std::string out = x.kind == NodeKind::component ? "C(" : set_str(x.lines) + "[";
    for (std::size_t i = 0; i < x.children.size(); ++i) {
        if (i) out += " ";
        out += bubble_str(tp, x.children[i]);
    }
    return out + (x.kind == NodeKind::component ? ")" : "]");
}

inline std::string tree_pair_str(const TreePair& tp) { return tp.seam.str() + " <- " + bubble_str(tp); }

// Unique key of the isomorphism class (canonical form).
inline std::string tree_pair_key(const TreePair& tp)
{
    std::string n;
    for (int v : tp.n) n += std::to_string(v) + ",";
    return n + "|" + tree_pair_str(tp);
}

inline bool operator==(const TreePair& a, const TreePair& b) { return tree_pair_key(a) == tree_pair_key(b); }

inline std::vector<std::string> validate_tree_pair(const TreePair& tp)
{
    std::vector<std::string> out;
    const int r = tp.r();
    if (r < 1) return {"n must be nonempty"};
    for (int v : tp.n)
        if (v < 0) out.push_back("negative entry in n");
    if (total_points(tp.n) == 0) out.push_back("n is the zero vector");
    if (tp.seam.r() != r) return {"seam tree has " + std::to_string(tp.seam.r()) + " leaves but n has " + std::to_string(r) + " entries"};
    if (tp.bubble.empty()) return {"empty bubble tree"};
    if (tp.node(0).parent != -1) out.push_back("root has a parent");

    // tree shape
    std::vector<int> seen(tp.bubble.size(), 0);
    std::function<void(int)> walk = [&](int v) {
        if (seen[static_cast<std::size_t>(v)]++) return;
        for (int c : tp.node(v).children) {
            if (c < 0 || c >= tp.size()) {
                out.push_back("child index out of range");
                continue;
            }
            if (tp.node(c).parent != v) out.push_back("parent/child links disagree");
            walk(c);
        }
    };
    walk(0);
    for (std::size_t v = 0; v < seen.size(); ++v)
        if (seen[v] != 1) out.push_back("bubble vertex " + std::to_string(v) + " is not reached exactly once from the root");
    if (!out.empty()) return out;

    const auto& root = tp.node(0);
    if (root.kind == NodeKind::seam) out.push_back("seam vertex at the root (needs a solid outgoing edge)");
    if (root.kind == NodeKind::mark && !(r == 1 && tp.n[0] == 1)) out.push_back("a lone mark is a tree-pair only for n=(1)");

    std::set<std::pair<int, int>> marks;
    std::function<LeafSet(int)> lines_of = [&](int v) -> LeafSet {
        const auto& x = tp.node(v);
        if (x.kind == NodeKind::mark) return singleton(x.line);
        if (x.kind == NodeKind::seam) return x.lines;
        LeafSet s = 0;
        for (int c : x.children) s |= lines_of(c);
        return s;
    };

    for (int v = 0; v < tp.size(); ++v) {
        const auto& x = tp.node(v);
        const std::string at = " at bubble vertex " + std::to_string(v);
        switch (x.kind) {
        case NodeKind::mark: {
            if (!x.children.empty()) out.push_back("mark with incoming edges" + at);
            if (x.line < 1 || x.line > r || x.point < 1 || x.point > tp.n[static_cast<std::size_t>(x.line - 1)])
                out.push_back("mark label out of range" + at);
            else if (!marks.insert({x.line, x.point}).second)
                out.push_back("duplicate mark" + at);
            if (x.parent >= 0 && tp.node(x.parent).kind != NodeKind::seam) out.push_back("mark not attached to a seam vertex" + at);
            break;
        }
        case NodeKind::seam: {
            if (x.parent < 0 || tp.node(x.parent).kind != NodeKind::component) out.push_back("seam vertex without solid outgoing edge" + at);
            if (!tp.seam.contains(x.lines)) {
                out.push_back("seam label " + set_str(x.lines) + " is not a seam-tree vertex" + at);
                break;
            }
            for (int c : x.children) {
                if (tp.node(c).kind == NodeKind::seam) out.push_back("seam vertex with solid incoming edge" + at);
                else if (lines_of(c) != x.lines) out.push_back("dashed edge not contracted by the coherence map" + at);
            }
            break;
        }
        case NodeKind::component: {
            if (x.children.empty()) {
                out.push_back("component without incoming edges" + at);
                break;
            }
            if (x.parent >= 0 && tp.node(x.parent).kind != NodeKind::seam) out.push_back("component with a solid outgoing edge" + at);
            bool kinds_ok = true;
            for (int c : x.children)
                if (tp.node(c).kind != NodeKind::seam) {
                    out.push_back("component with a dashed incoming edge" + at);
                    kinds_ok = false;
                }
            if (!kinds_ok) break;
            const LeafSet mine = lines_of(v);
            if (x.children.size() == 1) {
                if (tp.node(x.children[0]).children.size() < 2) out.push_back("unstable single-line component" + at);
            } else {
                const int s = tp.seam.node_of(mine);
                std::set<LeafSet> want, got;
                if (s >= 0)
                    for (int c : tp.seam.children(s)) want.insert(tp.seam.leaves(c));
                for (int c : x.children) got.insert(tp.node(c).lines);
                if (s < 0 || want != got || got.size() != x.children.size())
                    out.push_back("incoming edges of a multi-line component do not map bijectively" + at);
                bool some = false;
                for (int c : x.children) some = some || !tp.node(c).children.empty();
                if (!some) out.push_back("unstable multi-line component (no points on any line)" + at);
            }
            break;
        }
        }
    }
    if (root.kind == NodeKind::component && lines_of(0) != full_set(r)) out.push_back("coherence map does not send root to root");
    if (static_cast<int>(marks.size()) != total_points(tp.n)) out.push_back("marks do not match n");
    return out;
}

inline int stratum_dimension(const TreePair& tp)
{
    int d = 0;
    if (tp.r() >= 2)
        for (int v : tp.seam.interior()) d += tp.seam.num_children(v) - 2;
    for (int v = 0; v < tp.size(); ++v) {
        if (!tp.is_component(v)) continue;
        const auto& seams = tp.node(v).children;
        if (seams.size() == 1) {
            d += static_cast<int>(tp.node(seams[0]).children.size()) - 2;
        } else {
            int pts = 0;
            for (int s : seams) pts += static_cast<int>(tp.node(s).children.size());
            d += pts - 1;
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// 2-bracketings

struct TwoBracket {
    LeafSet lines = 0;
    std::vector<std::uint64_t> pts;  // pts[i-1] = bitmask of points j on line i (bit j-1)

    bool operator<(const TwoBracket& o) const { return std::tie(lines, pts) < std::tie(o.lines, o.pts); }
    bool operator==(const TwoBracket& o) const { return lines == o.lines && pts == o.pts; }
    int count() const
    {
        int c = 0;
        for (auto p : pts) c += std::popcount(p);
        return c;
    }
    bool subset_of(const TwoBracket& o) const
    {
        if (!is_subset(lines, o.lines)) return false;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if ((pts[i] & ~o.pts[i]) != 0) return false;
        return true;
    }
    bool overlaps(const TwoBracket& o) const
    {
        for (std::size_t i = 0; i < pts.size(); ++i)
            if ((lines & o.lines & singleton(static_cast<int>(i) + 1)) && (pts[i] & o.pts[i])) return true;
        return false;
    }
};

inline std::string two_bracket_str(const TwoBracket& b)
{
    std::string out = "(" + set_str(b.lines) + ",(";
    bool first = true;
    for (int i : labels_of(b.lines)) {
        if (!first) out += ",";
        first = false;
        std::vector<int> js;
        for (int j = 1; j <= 63; ++j)
            if (b.pts[static_cast<std::size_t>(i - 1)] >> (j - 1) & 1U) js.push_back(j);
        std::string s = "{";
        for (std::size_t k = 0; k < js.size(); ++k) s += (k ? "," : "") + std::to_string(js[k]);
        out += s + "}";
    }
    return out + "))";
}

struct TwoBracketing {
    std::vector<int> n;
    Bracketing one;
    std::set<TwoBracket> two;
    bool operator==(const TwoBracketing& o) const { return n == o.n && one == o.one && two == o.two; }
    bool operator<(const TwoBracketing& o) const { return std::tie(n, one, two) < std::tie(o.n, o.one, o.two); }
};

inline std::uint64_t point_mask(int count) { return count >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1; }

inline TwoBracket root_two_bracket(const std::vector<int>& n)
{
    TwoBracket b{full_set(static_cast<int>(n.size())), {}};
    for (int v : n) b.pts.push_back(point_mask(v));
    return b;
}

inline TwoBracket point_two_bracket(const std::vector<int>& n, int i, int j)
{
    TwoBracket b{singleton(i), std::vector<std::uint64_t>(n.size(), 0)};
    b.pts[static_cast<std::size_t>(i - 1)] = std::uint64_t{1} << (j - 1);
    return b;
}

inline std::vector<std::string> two_bracketing_violations(const TwoBracketing& tb)
{
    std::vector<std::string> out;
    const int r = static_cast<int>(tb.n.size());
    if (r < 1 || tb.one.r != r) return {"bracketing size does not match n"};
    for (const auto& e : bracketing_violations(tb.one)) out.push_back("(1-bracketing) " + e);
    if (!out.empty()) return out;
    for (const auto& b : tb.two) {
        const std::string w = " in " + two_bracket_str(b);
        if (b.pts.size() != tb.n.size()) {
            out.push_back("wrong point vector length" + w);
            continue;
        }
        if (!tb.one.sets.count(b.lines)) out.push_back("(1-bracketing) lines not a 1-bracket" + w);
        if (b.count() == 0) out.push_back("empty 2-bracket" + w);
        for (int i = 1; i <= r; ++i) {
            const auto p = b.pts[static_cast<std::size_t>(i - 1)];
            if (p && !(b.lines & singleton(i))) out.push_back("points on a line outside the 2-bracket" + w);
            if (p & ~point_mask(tb.n[static_cast<std::size_t>(i - 1)])) out.push_back("point index out of range" + w);
        }
    }
    if (!out.empty()) return out;
    for (auto it = tb.two.begin(); it != tb.two.end(); ++it)
        for (auto jt = std::next(it); jt != tb.two.end(); ++jt)
            if (it->overlaps(*jt) && !it->subset_of(*jt) && !jt->subset_of(*it))
                out.push_back("(2-bracketing) overlapping 2-brackets not nested: " + two_bracket_str(*it) + " " + two_bracket_str(*jt));
    if (!tb.two.count(root_two_bracket(tb.n))) out.push_back("(root and marked points) missing the root 2-bracket");
    for (int i = 1; i <= r; ++i)
        for (int j = 1; j <= tb.n[static_cast<std::size_t>(i - 1)]; ++j)
            if (!tb.two.count(point_two_bracket(tb.n, i, j)))
                out.push_back("(root and marked points) missing point (" + std::to_string(i) + "," + std::to_string(j) + ")");
    for (LeafSet b0 : tb.one.sets) {
        std::vector<const TwoBracket*> over;
        for (const auto& b : tb.two)
            if (b.lines == b0) over.push_back(&b);
        for (int i : labels_of(b0)) {
            std::uint64_t u = 0;
            for (const auto* b : over) u |= b->pts[static_cast<std::size_t>(i - 1)];
            if (u != point_mask(tb.n[static_cast<std::size_t>(i - 1)]))
                out.push_back("(marked seams are unfused) points of line " + std::to_string(i) + " not covered over " + set_str(b0));
        }
        for (const auto* b : over) {
            std::vector<const TwoBracket*> proper;
            for (const auto* c : over)
                if (c != b && c->subset_of(*b)) proper.push_back(c);
            if (proper.empty()) continue;
            for (int i : labels_of(b0)) {
                std::uint64_t u = 0;
                for (const auto* c : proper) u |= c->pts[static_cast<std::size_t>(i - 1)];
                if (u != b->pts[static_cast<std::size_t>(i - 1)])
                    out.push_back("(marked seams are unfused) " + two_bracket_str(*b) + " not covered by its proper sub-2-brackets");
            }
        }
    }
    return out;
}

inline TwoBracketing tree_pair_to_two_bracketing(const TreePair& tp)
{
    TwoBracketing tb{tp.n, tp.seam.bracketing(), {}};
    std::function<TwoBracket(int)> rec = [&](int v) -> TwoBracket {
        const auto& x = tp.node(v);
        if (x.kind == NodeKind::mark) {
            auto b = point_two_bracket(tp.n, x.line, x.point);
            tb.two.insert(b);
            return b;
        }
        TwoBracket acc{x.lines, std::vector<std::uint64_t>(tp.n.size(), 0)};
        for (int c : x.children) {
            auto sub = rec(c);
            for (std::size_t i = 0; i < acc.pts.size(); ++i) acc.pts[i] |= sub.pts[i];
        }
        if (x.kind == NodeKind::component) {
            acc.lines = x.lines;
            tb.two.insert(acc);
        }
        return acc;
    };
    rec(0);
    return tb;
}

// 2-bracket of every component and mark, indexed by bubble vertex.
inline std::map<int, TwoBracket> two_brackets_by_vertex(const TreePair& tp)
{
    std::map<int, TwoBracket> out;
    std::function<TwoBracket(int)> rec = [&](int v) -> TwoBracket {
        const auto& x = tp.node(v);
        if (x.kind == NodeKind::mark) return out[v] = point_two_bracket(tp.n, x.line, x.point);
        TwoBracket acc{x.lines, std::vector<std::uint64_t>(tp.n.size(), 0)};
        for (int c : x.children) {
            auto sub = rec(c);
            for (std::size_t i = 0; i < acc.pts.size(); ++i) acc.pts[i] |= sub.pts[i];
        }
        if (x.kind == NodeKind::component) out[v] = acc;
        return acc;
    };
    rec(0);
    return out;
}

inline TreePair two_bracketing_to_tree_pair(const TwoBracketing& tb)
{
    auto bad = two_bracketing_violations(tb);
    if (!bad.empty()) throw std::invalid_argument("invalid 2-bracketing: " + bad.front());
    const StableTree seam = StableTree::from_bracketing(tb.one);
    std::vector<TwoBracket> all(tb.two.begin(), tb.two.end());
    auto maximal_inside = [&](const TwoBracket& x, LeafSet lines) {
        std::vector<TwoBracket> cand;
        for (const auto& y : all)
            if (y.lines == lines && !(y == x) && y.subset_of(x)) cand.push_back(y);
        std::vector<TwoBracket> out;
        for (const auto& y : cand) {
            bool covered = false;
            for (const auto& z : cand)
                if (!(z == y) && y.subset_of(z)) covered = true;
            if (!covered) out.push_back(y);
        }
        return out;
    };
    std::function<BubbleSpec(const TwoBracket&)> build = [&](const TwoBracket& x) -> BubbleSpec {
        if (set_size(x.lines) == 1 && x.count() == 1) {
            const int i = min_label(x.lines);
            const int j = std::countr_zero(x.pts[static_cast<std::size_t>(i - 1)]) + 1;
            return BubbleSpec::mark(i, j);
        }
        auto same = maximal_inside(x, x.lines);
        std::vector<BubbleSpec> seams;
        if (!same.empty()) {
            std::vector<BubbleSpec> kids;
            for (const auto& y : same) kids.push_back(build(y));
            seams.push_back(BubbleSpec::seam(x.lines, std::move(kids)));
        } else {
            const int v = seam.node_of(x.lines);
            for (int c : seam.children(v)) {
                std::vector<BubbleSpec> kids;
                for (const auto& y : maximal_inside(x, seam.leaves(c))) kids.push_back(build(y));
                seams.push_back(BubbleSpec::seam(seam.leaves(c), std::move(kids)));
            }
        }
        return BubbleSpec::component(std::move(seams));
    };
    const TwoBracket top = root_two_bracket(tb.n);
    BubbleSpec root = (tb.n.size() == 1 && tb.n[0] == 1) ? BubbleSpec::mark(1, 1) : build(top);
    TreePair tp = make_tree_pair(tb.n, seam, std::move(root));
    auto tbad = validate_tree_pair(tp);
    if (!tbad.empty()) throw std::invalid_argument("2-bracketing does not describe a tree-pair: " + tbad.front());
    if (!(tree_pair_to_two_bracketing(tp) == tb)) throw std::invalid_argument("2-bracketing is not realized by a tree-pair");
    return tp;
}

// Exhaustive search over collections of 2-brackets, one 1-bracketing at a time.
inline std::vector<TwoBracketing> enumerate_two_bracketings_bruteforce(const std::vector<int>& n, std::size_t max_candidates = 40)
{
    const int r = static_cast<int>(n.size());
    if (r < 1 || total_points(n) == 0) throw std::invalid_argument("n must be a nonzero vector");
    std::vector<TwoBracketing> out;
    for (const auto& tree : enumerate_stable_trees(r)) {
        const Bracketing one = tree.bracketing();
        std::set<TwoBracket> mandatory{root_two_bracket(n)};
        for (int i = 1; i <= r; ++i)
            for (int j = 1; j <= n[static_cast<std::size_t>(i - 1)]; ++j) mandatory.insert(point_two_bracket(n, i, j));
        std::vector<TwoBracket> optional;
        for (LeafSet b : one.sets) {
            const auto ls = labels_of(b);
            std::vector<std::size_t> sizes;
            for (int i : ls) sizes.push_back(std::size_t{1} << n[static_cast<std::size_t>(i - 1)]);
            for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
                TwoBracket x{b, std::vector<std::uint64_t>(n.size(), 0)};
                for (std::size_t k = 0; k < ls.size(); ++k) x.pts[static_cast<std::size_t>(ls[k] - 1)] = idx[k];
                if (x.count() > 0 && !mandatory.count(x)) optional.push_back(x);
            });
        }
        if (optional.size() > max_candidates)
            throw std::length_error("2-bracket candidate count " + std::to_string(optional.size()) + " exceeds bound " + std::to_string(max_candidates));
        std::vector<TwoBracket> chosen(mandatory.begin(), mandatory.end());
        auto compatible = [&](const TwoBracket& x) {
            for (const auto& y : chosen)
                if (x.overlaps(y) && !x.subset_of(y) && !y.subset_of(x)) return false;
            return true;
        };
        std::function<void(std::size_t)> rec = [&](std::size_t k) {
            if (k == optional.size()) {
                TwoBracketing tb{n, one, std::set<TwoBracket>(chosen.begin(), chosen.end())};
                if (two_bracketing_violations(tb).empty()) out.push_back(std::move(tb));
                return;
            }
            rec(k + 1);
            if (compatible(optional[k])) {
                chosen.push_back(optional[k]);
                rec(k + 1);
                chosen.pop_back();
            }
        };
        rec(0);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Recursive enumeration of tree-pairs

namespace detail {

using Pt = std::pair<int, int>;

inline std::vector<BubbleSpec> bubbles_over(const StableTree& t, int v, const std::vector<Pt>& pts);

inline std::vector<BubbleSpec> single_line_bubbles(const StableTree& t, int v, const std::vector<Pt>& pts)
{
    std::vector<BubbleSpec> out;
    for_each_set_partition(pts, [&](const std::vector<std::vector<Pt>>& blocks) {
        if (blocks.size() < 2) return;
        std::vector<std::vector<BubbleSpec>> opts;
        std::vector<std::size_t> sizes;
        for (const auto& b : blocks) {
            opts.push_back(bubbles_over(t, v, b));
            sizes.push_back(opts.back().size());
        }
        for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
            std::vector<BubbleSpec> kids;
            for (std::size_t k = 0; k < idx.size(); ++k) kids.push_back(opts[k][idx[k]]);
            out.push_back(BubbleSpec::component({BubbleSpec::seam(t.leaves(v), std::move(kids))}));
        });
    });
    return out;
}

inline std::vector<BubbleSpec> multi_line_bubbles(const StableTree& t, int v, const std::vector<Pt>& pts)
{
    // per child of v: every way to fill its seam vertex
    std::vector<std::vector<BubbleSpec>> seam_opts;
    for (int c : t.children(v)) {
        std::vector<Pt> mine;
        for (const auto& p : pts)
            if (t.leaves(c) & singleton(p.first)) mine.push_back(p);
        std::vector<BubbleSpec> opts;
        if (mine.empty()) {
            opts.push_back(BubbleSpec::seam(t.leaves(c)));
        } else {
            for_each_set_partition(mine, [&](const std::vector<std::vector<Pt>>& blocks) {
                std::vector<std::vector<BubbleSpec>> bo;
                std::vector<std::size_t> sizes;
                for (const auto& b : blocks) {
                    bo.push_back(bubbles_over(t, c, b));
                    sizes.push_back(bo.back().size());
                }
                for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
                    std::vector<BubbleSpec> kids;
                    for (std::size_t k = 0; k < idx.size(); ++k) kids.push_back(bo[k][idx[k]]);
                    opts.push_back(BubbleSpec::seam(t.leaves(c), std::move(kids)));
                });
            });
        }
        seam_opts.push_back(std::move(opts));
    }
    std::vector<std::size_t> sizes;
    for (const auto& o : seam_opts) sizes.push_back(o.size());
    std::vector<BubbleSpec> out;
    for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
        std::vector<BubbleSpec> seams;
        for (std::size_t k = 0; k < idx.size(); ++k) seams.push_back(seam_opts[k][idx[k]]);
        out.push_back(BubbleSpec::component(std::move(seams)));
    });
    return out;
}

// Bubble subtrees (a component or a mark) lying over seam vertex v and
// carrying exactly the points pts.
inline std::vector<BubbleSpec> bubbles_over(const StableTree& t, int v, const std::vector<Pt>& pts)
{
    if (t.is_leaf(v)) {
        if (pts.size() == 1) return {BubbleSpec::mark(pts[0].first, pts[0].second)};
        return single_line_bubbles(t, v, pts);
    }
    auto out = multi_line_bubbles(t, v, pts);
    if (pts.size() >= 2) {
        auto s = single_line_bubbles(t, v, pts);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

}  // namespace detail

inline std::vector<detail::Pt> all_points(const std::vector<int>& n)
{
    std::vector<detail::Pt> pts;
    for (std::size_t i = 0; i < n.size(); ++i)
        for (int j = 1; j <= n[i]; ++j) pts.emplace_back(static_cast<int>(i) + 1, j);
    return pts;
}

inline void check_vector(const std::vector<int>& n)
{
    if (n.empty()) throw std::invalid_argument("n must be nonempty");
    if (n.size() > 20) throw std::invalid_argument("too many lines");
    for (int v : n)
        if (v < 0 || v > 60) throw std::invalid_argument("entries of n must lie in 0..60");
    if (total_points(n) == 0) throw std::invalid_argument("n must be a nonzero vector");
}

// One tree-pair per isomorphism class, ordered by seam tree then generation order.
inline std::vector<TreePair> enumerate_tree_pairs(const std::vector<int>& n)
{
    check_vector(n);
    std::vector<TreePair> out;
    const auto pts = all_points(n);
    for (const auto& t : enumerate_stable_trees(static_cast<int>(n.size())))
        for (auto& b : detail::bubbles_over(t, StableTree::root(), pts)) out.push_back(make_tree_pair(n, t, std::move(b)));
    return out;
}

inline std::vector<long long> f_vector(const std::vector<int>& n)
{
    std::vector<long long> f;
    for (const auto& tp : enumerate_tree_pairs(n)) {
        const auto d = static_cast<std::size_t>(stratum_dimension(tp));
        if (f.size() <= d) f.resize(d + 1, 0);
        ++f[d];
    }
    return f;
}

inline TreePair top_tree_pair(const std::vector<int>& n)
{
    check_vector(n);
    const int r = static_cast<int>(n.size());
    if (r == 1 && n[0] == 1) return make_tree_pair(n, corolla(1), BubbleSpec::mark(1, 1));
    std::vector<BubbleSpec> seams;
    if (r == 1) {
        std::vector<BubbleSpec> kids;
        for (int j = 1; j <= n[0]; ++j) kids.push_back(BubbleSpec::mark(1, j));
        seams.push_back(BubbleSpec::seam(singleton(1), std::move(kids)));
    } else {
        for (int i = 1; i <= r; ++i) {
            std::vector<BubbleSpec> kids;
            for (int j = 1; j <= n[static_cast<std::size_t>(i - 1)]; ++j) kids.push_back(BubbleSpec::mark(i, j));
            seams.push_back(BubbleSpec::seam(singleton(i), std::move(kids)));
        }
    }
    return make_tree_pair(n, corolla(r), BubbleSpec::component(std::move(seams)));
}

// 2T <= 2T' in W_n: the 2-bracketing of 2T contains that of 2T'.
inline bool poset_leq_tree_pair(const TreePair& a, const TreePair& b)
{
    const auto x = tree_pair_to_two_bracketing(a), y = tree_pair_to_two_bracketing(b);
    if (x.n != y.n) throw std::invalid_argument("tree-pairs of different n");
    for (LeafSet s : y.one.sets)
        if (!x.one.sets.count(s)) return false;
    for (const auto& t : y.two)
        if (!x.two.count(t)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Gluing coordinates and coherences

// Non-root components in breadth-first order, then non-root interior seam vertices in preorder.
struct Coordinates {
    std::vector<int> components;  // bubble vertex ids
    std::vector<LeafSet> seams;
    std::size_t size() const { return components.size() + seams.size(); }
    int index_of_component(int v) const
    {
        auto it = std::find(components.begin(), components.end(), v);
        return it == components.end() ? -1 : static_cast<int>(it - components.begin());
    }
    int index_of_seam(LeafSet s) const
    {
        auto it = std::find(seams.begin(), seams.end(), s);
        return it == seams.end() ? -1 : static_cast<int>(components.size() + static_cast<std::size_t>(it - seams.begin()));
    }
};

inline Coordinates gluing_coordinates(const TreePair& tp)
{
    Coordinates c;
    std::vector<int> frontier{0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int v : frontier)
            for (int s : tp.node(v).children)
                for (int k : tp.node(s).children)
                    if (tp.is_component(k)) {
                        c.components.push_back(k);
                        next.push_back(k);
                    }
        frontier = std::move(next);
    }
    if (!tp.is_component(0)) c.components.clear();
    c.seams = tp.seam.nonroot_interior();
    return c;
}

inline std::vector<std::string> default_coordinate_names(const TreePair& tp)
{
    const auto c = gluing_coordinates(tp);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < c.components.size(); ++k) names.push_back("a" + std::to_string(k + 1));
    for (LeafSet s : c.seams) {
        std::string nm = "b[";
        bool first = true;
        for (int l : labels_of(s)) {
            nm += (first ? "" : ",") + std::to_string(l);
            first = false;
        }
        names.push_back(nm + "]");
    }
    return names;
}

// First multi-line component strictly above component v (beta_v); -1 if none.
inline int multi_line_ancestor(const TreePair& tp, int v)
{
    for (int a = tp.parent_component(v); a >= 0; a = tp.parent_component(a))
        if (tp.is_multi_line(a)) return a;
    return -1;
}

// Components in [v, beta): v and its component ancestors strictly below beta.
inline std::vector<int> path_components(const TreePair& tp, int v, int beta)
{
    std::vector<int> out;
    for (int a = v; a != beta; a = tp.parent_component(a)) {
        if (a < 0) throw std::logic_error("path_components: beta is not above v");
        out.push_back(a);
    }
    return out;
}

inline std::vector<int> component_ancestors(const TreePair& tp, int v)
{
    std::vector<int> out;
    for (int a = tp.parent_component(v); a >= 0; a = tp.parent_component(a)) out.push_back(a);
    return out;
}

// prod over lhs coordinates = prod over rhs coordinates.
struct CoherenceEquation {
    std::vector<int> lhs, rhs;
};

inline std::string equation_str(const CoherenceEquation& e, const std::vector<std::string>& names)
{
    auto side = [&](const std::vector<int>& v) {
        std::string s;
        for (int k : v) s += (s.empty() ? "" : "*") + names.at(static_cast<std::size_t>(k));
        return s.empty() ? std::string("1") : s;
    };
    return side(e.lhs) + " = " + side(e.rhs);
}

// Both coherence families: equal path products from two multi-line components
// over one seam vertex down from a common ancestor, and b_rho equal to the
// path product from a multi-line component over rho up to its beta.
inline std::vector<CoherenceEquation> coherence_equations(const TreePair& tp)
{
    std::vector<CoherenceEquation> out;
    if (!tp.is_component(0)) return out;
    const auto coords = gluing_coordinates(tp);
    auto idx = [&](const std::vector<int>& comps) {
        std::vector<int> v;
        for (int c : comps) v.push_back(coords.index_of_component(c));
        return v;
    };
    std::map<LeafSet, std::vector<int>> over;
    for (int v = 1; v < tp.size(); ++v)
        if (tp.is_multi_line(v)) over[tp.node(v).lines].push_back(v);
    for (const auto& [rho, alphas] : over) {
        for (std::size_t i = 0; i < alphas.size(); ++i)
            for (std::size_t j = i + 1; j < alphas.size(); ++j) {
                const auto anc1 = component_ancestors(tp, alphas[i]);
                const auto anc2 = component_ancestors(tp, alphas[j]);
                for (int beta : anc1)
                    if (std::find(anc2.begin(), anc2.end(), beta) != anc2.end())
                        out.push_back({idx(path_components(tp, alphas[i], beta)), idx(path_components(tp, alphas[j], beta))});
            }
        if (rho == full_set(tp.r())) continue;
        for (int a : alphas) out.push_back({{coords.index_of_seam(rho)}, idx(path_components(tp, a, multi_line_ancestor(tp, a)))});
    }
    return out;
}

inline bool coherent_01(const std::vector<CoherenceEquation>& eqs, const std::vector<int>& q)
{
    auto prod = [&](const std::vector<int>& v) {
        for (int k : v)
            if (q[static_cast<std::size_t>(k)] == 0) return 0;
        return 1;
    };
    for (const auto& e : eqs)
        if (prod(e.lhs) != prod(e.rhs)) return false;
    return true;
}

// All {0,1} assignments to the gluing coordinates satisfying the coherences.
inline std::vector<std::vector<int>> local_poset_elements(const TreePair& tp)
{
    const auto coords = gluing_coordinates(tp);
    const std::size_t n = coords.size();
    if (n > 24) throw std::length_error("too many gluing coordinates for exhaustive search");
    const auto eqs = coherence_equations(tp);
    std::vector<std::vector<int>> out;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        std::vector<int> q(n);
        for (std::size_t k = 0; k < n; ++k) q[k] = static_cast<int>((m >> k) & 1U);
        if (coherent_01(eqs, q)) out.push_back(std::move(q));
    }
    return out;
}

// Cut the bubble tree at the zero coordinates, keep the top 2-bracket of each
// piece, and glue the seam tree along the seam coordinates equal to 1.
inline TreePair glue_tree_pair(const TreePair& tp, const std::vector<int>& q)
{
    const auto coords = gluing_coordinates(tp);
    if (q.size() != coords.size())
        throw std::invalid_argument("gluing assignment has " + std::to_string(q.size()) + " entries, expected " + std::to_string(coords.size()));
    for (int v : q)
        if (v != 0 && v != 1) throw std::invalid_argument("gluing assignment entries must be 0 or 1");
    const auto names = default_coordinate_names(tp);
    for (const auto& e : coherence_equations(tp))
        if (!coherent_01({e}, q)) throw std::invalid_argument("coherence violated: " + equation_str(e, names));
    TwoBracketing tb{tp.n, tp.seam.bracketing(), {}};
    for (std::size_t k = 0; k < coords.seams.size(); ++k)
        if (q[coords.components.size() + k] == 1) tb.one.sets.erase(coords.seams[k]);
    for (const auto& [v, b] : two_brackets_by_vertex(tp)) {
        const int k = coords.index_of_component(v);
        if (tp.node(v).kind == NodeKind::mark || v == 0 || q[static_cast<std::size_t>(k)] == 0) tb.two.insert(b);
    }
    return two_bracketing_to_tree_pair(tb);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json bubble_to_json(const TreePair& tp, int v = 0)
{
    const auto& x = tp.node(v);
    nlohmann::json j;
    j["kind"] = kind_name(x.kind);
    if (x.kind == NodeKind::mark)
        j["label"] = {x.line, x.point};
    else
        j["label"] = labels_of(x.lines);
    if (x.parent < 0)
        j["edge"] = nullptr;
    else
        j["edge"] = x.kind == NodeKind::seam ? "solid" : "dashed";
    if (x.kind != NodeKind::mark) {
        j["children"] = nlohmann::json::array();
        for (int c : x.children) j["children"].push_back(bubble_to_json(tp, c));
    }
    return j;
}

inline nlohmann::json tree_pair_to_json(const TreePair& tp)
{
    return {{"n", tp.n}, {"seam", tree_to_json(tp.seam)}, {"bubble", bubble_to_json(tp)}};
}

inline BubbleSpec bubble_from_json(const nlohmann::json& j, bool is_root = true)
{
    const auto kind = j.at("kind").get<std::string>();
    BubbleSpec b;
    if (kind == "component") b.kind = NodeKind::component;
    else if (kind == "seam") b.kind = NodeKind::seam;
    else if (kind == "mark") b.kind = NodeKind::mark;
    else throw std::invalid_argument("unknown bubble vertex kind '" + kind + "'");
    if (j.contains("edge") && !j["edge"].is_null()) {
        const auto e = j["edge"].get<std::string>();
        const std::string want = b.kind == NodeKind::seam ? "solid" : "dashed";
        if (is_root) throw std::invalid_argument("root vertex cannot have an outgoing edge");
        if (e != want) throw std::invalid_argument(std::string(kind_name(b.kind)) + " vertex must have a " + want + " outgoing edge");
    }
    if (b.kind == NodeKind::mark) {
        const auto& l = j.at("label");
        b.line = l.at(0).get<int>();
        b.point = l.at(1).get<int>();
        if (b.line < 1 || b.line > 63) throw std::invalid_argument("mark line out of range");
        b.lines = singleton(b.line);
        return b;
    }
    if (b.kind == NodeKind::seam) b.lines = leafset_from_json(j.at("label"));
    if (j.contains("children"))
        for (const auto& c : j["children"]) b.children.push_back(bubble_from_json(c, false));
    if (b.kind == NodeKind::component && j.contains("label")) b.lines = leafset_from_json(j["label"]);
    return b;
}

inline TreePair tree_pair_from_json(const nlohmann::json& j)
{
    std::vector<int> n = j.at("n").get<std::vector<int>>();
    check_vector(n);
    StableTree seam = tree_from_json(j.at("seam"));
    BubbleSpec b = bubble_from_json(j.at("bubble"));
    // a component label, when given, must agree with the derived coherence image
    std::function<void(const BubbleSpec&)> check = [&](const BubbleSpec& x) {
        for (const auto& c : x.children) check(c);
    };
    check(b);
    BubbleSpec derived = b;
    detail::derive_lines(derived);
    std::function<void(const BubbleSpec&, const BubbleSpec&)> cmp = [&](const BubbleSpec& given, const BubbleSpec& d) {
        if (given.kind == NodeKind::component && given.lines != 0 && given.lines != d.lines)
            throw std::invalid_argument("component label disagrees with the coherence map");
        for (std::size_t k = 0; k < given.children.size(); ++k) cmp(given.children[k], d.children[k]);
    };
    cmp(b, derived);
    TreePair tp = make_tree_pair(std::move(n), std::move(seam), std::move(b));
    auto bad = validate_tree_pair(tp);
    if (!bad.empty()) throw std::invalid_argument("invalid tree-pair: " + bad.front());
    return tp;
}

inline nlohmann::json two_bracketing_to_json(const TwoBracketing& tb)
{
    nlohmann::json ones = nlohmann::json::array(), twos = nlohmann::json::array();
    for (LeafSet s : tb.one.sets) ones.push_back(labels_of(s));
    for (const auto& b : tb.two) {
        nlohmann::json pts = nlohmann::json::object();
        for (int i : labels_of(b.lines)) {
            std::vector<int> js;
            for (int k = 0; k < 63; ++k)
                if (b.pts[static_cast<std::size_t>(i - 1)] >> k & 1U) js.push_back(k + 1);
            pts[std::to_string(i)] = js;
        }
        twos.push_back({{"lines", labels_of(b.lines)}, {"points", pts}});
    }
    return {{"n", tb.n}, {"brackets", ones}, {"two_brackets", twos}};
}

}  // namespace mlines
