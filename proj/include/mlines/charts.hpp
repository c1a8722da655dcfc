#pragma once

#include "mlines/exact_poly.hpp"
#include "mlines/local_models.hpp"
#include "mlines/numbers.hpp"
#include "mlines/tree_pairs.hpp"
#include "mlines/trees.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlines {

inline std::string labels_csv(LeafSet s)
{
    std::string out;
    for (int l : labels_of(s)) out += (out.empty() ? "" : ",") + std::to_string(l);
    return out;
}

inline std::string seam_variable(LeafSet s) { return "b[" + labels_csv(s) + "]"; }

// ---------------------------------------------------------------------------
// Stable curves in M_r-bar: one affine screen per interior vertex

struct StableCurve {
    StableTree tree;
    std::map<LeafSet, std::vector<Rational>> x;  // children positions, in tree child order
};

inline std::vector<std::string> curve_violations(const StableCurve& c)
{
    std::vector<std::string> out;
    const auto inner = c.tree.interior();
    if (c.x.size() != inner.size()) out.push_back("positions given for non-interior vertices");
    for (int v : inner) {
        const LeafSet rho = c.tree.leaves(v);
        auto it = c.x.find(rho);
        if (it == c.x.end()) {
            out.push_back("no positions at " + set_str(rho));
            continue;
        }
        if (static_cast<int>(it->second.size()) != c.tree.num_children(v)) {
            out.push_back("wrong number of positions at " + set_str(rho));
            continue;
        }
        std::set<Rational> seen(it->second.begin(), it->second.end());
        if (seen.size() != it->second.size()) out.push_back("colliding positions at " + set_str(rho));
    }
    return out;
}

// A point of the screen of rho: a child direction, or the outgoing direction at infinity.
struct ScreenPoint {
    bool at_infinity = false;
    Rational finite;
    const Rational& value() const
    {
        if (at_infinity) throw std::domain_error("the outgoing edge sits at infinity");
        return finite;
    }
};

inline ScreenPoint screen_point(const StableCurve& c, LeafSet rho, LeafSet tau)
{
    const int v = c.tree.node_of(rho), w = c.tree.node_of(tau);
    if (v < 0 || w < 0 || c.tree.is_leaf(v)) throw std::invalid_argument("screen_point: unknown vertex");
    if (w == v || !c.tree.is_ancestor(v, w)) return {true, 0};
    const auto p = c.tree.path(v, w);
    return {false, c.x.at(rho).at(static_cast<std::size_t>(c.tree.child_index(p[1])))};
}

// p_{rho sigma} = sum over tau in [rho, sigma[ of x_{tau sigma} * prod over ]rho, tau] of b.
inline MultiPoly gluing_polynomial(const StableCurve& c, LeafSet rho, LeafSet sigma)
{
    const int v = c.tree.node_of(rho), w = c.tree.node_of(sigma);
    if (v < 0 || w < 0 || v == w || !c.tree.is_ancestor(v, w)) throw std::invalid_argument("gluing_polynomial: sigma must lie strictly below rho");
    const auto p = c.tree.path(v, w);
    MultiPoly out;
    MultiPoly scale(Rational(1));
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        if (k > 0) scale *= MultiPoly::variable(seam_variable(c.tree.leaves(p[k])));
        const Rational xk = c.x.at(c.tree.leaves(p[k])).at(static_cast<std::size_t>(c.tree.child_index(p[k + 1])));
        out += MultiPoly(xk) * scale;
    }
    return out;
}

inline std::set<std::string> seam_variables(const StableTree& t)
{
    std::set<std::string> out;
    for (LeafSet s : t.nonroot_interior()) out.insert(seam_variable(s));
    return out;
}

// p_{root,i} - p_{root,j} = (monomial in b) * q_ij.
inline ContentSplit extract_q_factor(const StableCurve& c, int i, int j)
{
    if (i == j || i < 1 || j < 1 || i > c.tree.r() || j > c.tree.r()) throw std::invalid_argument("extract_q_factor: need two distinct leaves");
    const LeafSet root = c.tree.leaves(StableTree::root());
    const MultiPoly d = gluing_polynomial(c, root, singleton(i)) - gluing_polynomial(c, root, singleton(j));
    return monomial_content_split(d, seam_variables(c.tree));
}

// ---------------------------------------------------------------------------
// Sliced charts on M_r-bar

// (rho, sigma) -> x_{rho sigma} for the children sigma of rho outside the slice.
using FreeCoords = std::map<std::pair<LeafSet, LeafSet>, Rational>;

struct ChartPoint {
    FreeCoords x;
    std::map<LeafSet, Rational> b;  // non-root interior vertices
    bool operator==(const ChartPoint& o) const { return x == o.x && b == o.b; }
};

inline std::vector<std::pair<LeafSet, LeafSet>> free_slots(const StableTree& t, const Slice& sl)
{
    std::vector<std::pair<LeafSet, LeafSet>> out;
    for (int v : t.interior()) {
        const LeafSet rho = t.leaves(v);
        const auto [s0, s1] = sl.s.at(rho);
        for (int c : t.children(v))
            if (t.leaves(c) != s0 && t.leaves(c) != s1) out.emplace_back(rho, t.leaves(c));
    }
    return out;
}

inline std::string free_coordinate_name(LeafSet rho, LeafSet sigma)
{
    return "x[" + labels_csv(rho) + "|" + labels_csv(sigma) + "]";
}

// The curve C_T: slice children at 0 and 1, the others at their free coordinates.
inline StableCurve slice_curve(const StableTree& t, const Slice& sl, const FreeCoords& free)
{
    auto bad = slice_violations(t, sl);
    if (!bad.empty()) throw std::invalid_argument("invalid slice: " + bad.front());
    const auto slots = free_slots(t, sl);
    if (free.size() != slots.size()) throw std::invalid_argument("expected " + std::to_string(slots.size()) + " free coordinates");
    StableCurve c{t, {}};
    for (int v : t.interior()) {
        const LeafSet rho = t.leaves(v);
        const auto [s0, s1] = sl.s.at(rho);
        std::vector<Rational> pos;
        for (int k : t.children(v)) {
            const LeafSet sig = t.leaves(k);
            if (sig == s0) pos.emplace_back(0);
            else if (sig == s1) pos.emplace_back(1);
            else {
                auto it = free.find({rho, sig});
                if (it == free.end()) throw std::invalid_argument("missing free coordinate at " + set_str(rho) + " toward " + set_str(sig));
                pos.push_back(it->second);
            }
        }
        c.x[rho] = std::move(pos);
    }
    if (!curve_violations(c).empty())
        throw std::domain_error("free coordinates must avoid 0, 1 and each other");
    return c;
}

inline std::map<std::string, Rational> seam_values(const StableTree& t, const ChartPoint& p)
{
    std::map<std::string, Rational> at;
    const auto inner = t.nonroot_interior();
    if (p.b.size() != inner.size()) throw std::invalid_argument("expected " + std::to_string(inner.size()) + " b-coordinates");
    for (LeafSet s : inner) {
        auto it = p.b.find(s);
        if (it == p.b.end()) throw std::invalid_argument("missing b-coordinate at " + set_str(s));
        at[seam_variable(s)] = it->second;
    }
    return at;
}

// phi_T(x, b): a stable curve on g_T(pi(b)).
inline StableCurve evaluate_chart(const StableTree& t, const Slice& sl, const ChartPoint& p)
{
    const StableCurve c = slice_curve(t, sl, p.x);
    const auto at = seam_values(t, p);
    GlueVector rv;
    for (const auto& [s, v] : p.b) rv[s] = v != 0 ? 1 : 0;
    const StableTree g = glue_tree(t, rv);
    StableCurve out{g, {}};
    for (int v : g.interior()) {
        const LeafSet rho = g.leaves(v);
        std::vector<Rational> pos;
        for (int k : g.children(v)) pos.push_back(gluing_polynomial(c, rho, g.leaves(k)).eval(at));
        for (std::size_t a = 0; a < pos.size(); ++a)
            for (std::size_t b = a + 1; b < pos.size(); ++b)
                if (pos[a] == pos[b]) {
                    const int i = min_label(g.leaves(g.children(v)[a])), j = min_label(g.leaves(g.children(v)[b]));
                    throw std::domain_error("point outside the chart domain: q_" + std::to_string(i) + std::to_string(j) + " vanishes");
                }
        out.x[rho] = std::move(pos);
    }
    return out;
}

// Affine map sending tuple[i0] to 0 and tuple[i1] to 1.
inline std::vector<Rational> normalize_to_slice(const std::vector<Rational>& tuple, std::size_t i0, std::size_t i1)
{
    if (i0 >= tuple.size() || i1 >= tuple.size()) throw std::invalid_argument("normalize_to_slice: index out of range");
    const Rational d = tuple[i1] - tuple[i0];
    if (d == 0) throw std::domain_error("normalize_to_slice: the pinned points coincide");
    std::vector<Rational> out;
    for (const auto& v : tuple) out.push_back((v - tuple[i0]) / d);
    return out;
}

inline bool curves_isomorphic(const StableCurve& a, const StableCurve& b)
{
    if (a.tree != b.tree) return false;
    for (int v : a.tree.interior()) {
        const LeafSet rho = a.tree.leaves(v);
        if (normalize_to_slice(a.x.at(rho), 0, 1) != normalize_to_slice(b.x.at(rho), 0, 1)) return false;
    }
    return true;
}

// phi_T^{-1}: scales S(c) = p(lambda_1(c)) - p(lambda_0(c)) in each surviving screen,
// b_c = S(c) / S(parent c) on contracted vertices and 0 on surviving ones.
inline ChartPoint invert_chart(const StableTree& t, const Slice& sl, const StableCurve& target)
{
    auto cbad = curve_violations(target);
    if (!cbad.empty()) throw std::invalid_argument("invalid curve: " + cbad.front());
    if (target.tree.r() != t.r() || !poset_leq_tree(t, target.tree))
        throw std::domain_error("curve is not in the image of this chart: its tree is not a contraction of " + t.str());
    const StableTree& g = target.tree;
    GlueVector rv;
    for (LeafSet s : t.nonroot_interior()) rv[s] = g.contains(s) ? 0 : 1;
    const Slice psl = pushforward_slice(t, sl, rv);

    std::map<LeafSet, Rational> pos;  // normalized position of each non-root vertex of g in its parent screen
    for (int v : g.interior()) {
        const LeafSet rho = g.leaves(v);
        const auto [s0, s1] = psl.s.at(rho);
        std::size_t i0 = 0, i1 = 0;
        for (std::size_t k = 0; k < g.children(v).size(); ++k) {
            if (g.leaves(g.children(v)[k]) == s0) i0 = k;
            if (g.leaves(g.children(v)[k]) == s1) i1 = k;
        }
        const auto norm = normalize_to_slice(target.x.at(rho), i0, i1);
        for (std::size_t k = 0; k < norm.size(); ++k) pos[g.leaves(g.children(v)[k])] = norm[k];
    }
    auto settle = [&](LeafSet v) {
        while (!g.contains(v)) v = sl.s.at(v).first;
        return v;
    };
    auto scale = [&](LeafSet c) { return pos.at(settle(sl.s.at(c).second)) - pos.at(settle(sl.s.at(c).first)); };

    ChartPoint p;
    for (int v : t.interior()) {
        const LeafSet c = t.leaves(v);
        const Rational sc = scale(c);
        if (v != StableTree::root()) p.b[c] = g.contains(c) ? Rational(0) : sc / scale(t.leaves(t.parent(v)));
        const auto [s0, s1] = sl.s.at(c);
        for (int k : t.children(v)) {
            const LeafSet sig = t.leaves(k);
            if (sig == s0 || sig == s1) continue;
            p.x[{c, sig}] = (pos.at(settle(sig)) - pos.at(settle(s0))) / sc;
        }
    }
    return p;
}

inline ChartPoint transition_map(const StableTree& t1, const Slice& s1, const StableTree& t2, const Slice& s2, const ChartPoint& p)
{
    return invert_chart(t2, s2, evaluate_chart(t1, s1, p));
}

inline Rational random_rational(std::mt19937_64& rng, int span = 12, int max_den = 7)
{
    std::uniform_int_distribution<int> num(-span, span), den(1, max_den);
    int a = 0;
    while (a == 0) a = num(rng);
    return Rational(a, den(rng));
}

inline ChartPoint random_chart_point(const StableTree& t, const Slice& sl, std::mt19937_64& rng, double zero_probability)
{
    ChartPoint p;
    std::map<LeafSet, std::set<Rational>> used;
    for (const auto& [rho, sig] : free_slots(t, sl)) {
        auto& u = used[rho];
        Rational v;
        do v = random_rational(rng);
        while (v == 1 || u.count(v));
        u.insert(v);
        p.x[{rho, sig}] = v;
    }
    std::bernoulli_distribution zero(zero_probability);
    for (LeafSet s : t.nonroot_interior()) p.b[s] = zero(rng) ? Rational(0) : random_rational(rng);
    return p;
}

struct TransitionReport {
    int samples = 0;
    int checked = 0;
    int outside_first = 0;   // sample left the domain of the first chart
    int outside_second = 0;  // image lies in a stratum the second chart does not reach
    std::vector<std::string> failures;
};

// For random points of the first chart: invert through the second chart,
// map back, and require both round trips to be exact.
inline TransitionReport transition_check(const StableTree& t1, const Slice& s1, const StableTree& t2, const Slice& s2, int samples,
                                         std::uint64_t seed, double zero_probability = 0.25)
{
    if (t1.r() != t2.r()) throw std::invalid_argument("transition_check: trees on different leaf sets");
    std::mt19937_64 rng(seed);
    TransitionReport rep;
    for (int k = 0; k < samples; ++k) {
        ++rep.samples;
        const ChartPoint p = random_chart_point(t1, s1, rng, zero_probability);
        StableCurve c;
        try {
            c = evaluate_chart(t1, s1, p);
        } catch (const std::domain_error&) {
            ++rep.outside_first;
            continue;
        }
        if (!poset_leq_tree(t2, c.tree)) {
            ++rep.outside_second;
            continue;
        }
        ++rep.checked;
        try {
            const ChartPoint q = invert_chart(t2, s2, c);
            const StableCurve c2 = evaluate_chart(t2, s2, q);
            if (!curves_isomorphic(c, c2)) rep.failures.push_back("sample " + std::to_string(k) + ": second chart does not reproduce the curve");
            else if (!(invert_chart(t1, s1, c2) == p)) rep.failures.push_back("sample " + std::to_string(k) + ": round trip does not return the point");
        } catch (const std::exception& e) {
            rep.failures.push_back("sample " + std::to_string(k) + ": " + e.what());
        }
    }
    return rep;
}

inline nlohmann::json curve_to_json(const StableCurve& c)
{
    nlohmann::json screens = nlohmann::json::array();
    for (int v : c.tree.interior()) {
        nlohmann::json pts = nlohmann::json::array();
        for (std::size_t k = 0; k < c.tree.children(v).size(); ++k)
            pts.push_back({{"child", labels_of(c.tree.leaves(c.tree.children(v)[k]))}, {"x", to_string(c.x.at(c.tree.leaves(v))[k])}});
        screens.push_back({{"vertex", labels_of(c.tree.leaves(v))}, {"points", pts}});
    }
    return {{"tree", tree_to_json(c.tree)}, {"screens", screens}};
}

inline nlohmann::json chart_point_to_json(const ChartPoint& p)
{
    nlohmann::json xs = nlohmann::json::array(), bs = nlohmann::json::array();
    for (const auto& [k, v] : p.x) xs.push_back({{"vertex", labels_of(k.first)}, {"child", labels_of(k.second)}, {"value", to_string(v)}});
    for (const auto& [s, v] : p.b) bs.push_back({{"vertex", labels_of(s)}, {"value", to_string(v)}});
    return {{"x", xs}, {"b", bs}};
}

inline Rational rational_from_json(const nlohmann::json& j)
{
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
    throw std::invalid_argument("expected an integer or a rational string");
}

inline ChartPoint chart_point_from_json(const nlohmann::json& j)
{
    ChartPoint p;
    if (j.contains("x"))
        for (const auto& e : j["x"]) p.x[{leafset_from_json(e.at("vertex")), leafset_from_json(e.at("child"))}] = rational_from_json(e.at("value"));
    if (j.contains("b"))
        for (const auto& e : j["b"]) p.b[leafset_from_json(e.at("vertex"))] = rational_from_json(e.at("value"));
    return p;
}

// ---------------------------------------------------------------------------
// Stable plane-trees and the charts on 2M_n-bar

struct PlanePoint {
    Rational x, y;
    bool operator==(const PlanePoint& o) const { return x == o.x && y == o.y; }
    bool operator<(const PlanePoint& o) const { return x != o.x ? x < o.x : y < o.y; }
};

// Children of component alpha that sit in its screen: seams in order, then their children.
inline std::vector<int> plane_slots(const TreePair& tp, int alpha)
{
    if (!tp.is_component(alpha)) throw std::invalid_argument("plane_slots: not a component");
    std::vector<int> out;
    for (int s : tp.node(alpha).children)
        for (int k : tp.node(s).children) out.push_back(k);
    return out;
}

struct StablePlaneTree {
    TreePair tp;
    StableCurve seam;                           // configuration of the lines, on tp.seam
    std::map<int, std::vector<PlanePoint>> z;   // per component, one point per plane slot
};

inline std::vector<std::string> plane_tree_violations(const StablePlaneTree& p)
{
    std::vector<std::string> out;
    if (p.seam.tree != p.tp.seam) out.push_back("line configuration lives on a different seam tree");
    for (const auto& e : curve_violations(p.seam)) out.push_back("lines: " + e);
    if (!out.empty()) return out;
    for (int a = 0; a < p.tp.size(); ++a) {
        if (!p.tp.is_component(a)) continue;
        auto it = p.z.find(a);
        const auto slots = plane_slots(p.tp, a);
        if (it == p.z.end() || it->second.size() != slots.size()) {
            out.push_back("component " + std::to_string(a) + " has the wrong number of points");
            continue;
        }
        std::size_t k = 0;
        std::optional<Rational> single_x;
        for (int s : p.tp.node(a).children) {
            std::set<Rational> ys;
            const LeafSet tau = p.tp.node(s).lines;
            for (std::size_t m = 0; m < p.tp.node(s).children.size(); ++m, ++k) {
                const auto& z = it->second[k];
                if (!ys.insert(z.y).second) out.push_back("two points collide on a line of component " + std::to_string(a));
                if (p.tp.is_multi_line(a)) {
                    const LeafSet rho = p.tp.node(a).lines;
                    const auto want = screen_point(p.seam, rho, tau).value();
                    if (z.x != want) out.push_back("point of component " + std::to_string(a) + " is off its line");
                } else {
                    if (single_x && *single_x != z.x) out.push_back("points of single-line component " + std::to_string(a) + " are not collinear");
                    single_x = z.x;
                }
            }
        }
    }
    return out;
}

namespace detail {
inline void require_plane_chart(const TreePair& tp)
{
    auto bad = validate_tree_pair(tp);
    if (!bad.empty()) throw std::invalid_argument("invalid tree-pair: " + bad.front());
    if (!tp.is_component(0)) throw std::domain_error("the tree-pair has no components");
    if (stratum_dimension(tp) != 0)
        throw std::domain_error("charts are defined for dimension-0 tree-pairs; this one has dimension " + std::to_string(stratum_dimension(tp)));
}
}  // namespace detail

inline StableCurve sliced_lines(const StableTree& t)
{
    StableCurve c{t, {}};
    if (t.is_leaf(StableTree::root())) return c;
    return slice_curve(t, default_slice(t), {});
}

// The sliced plane-tree of a dimension-0 tree-pair: single-line screens hold
// their two points at (0,0) and (0,1); a multi-line screen holds its one point
// at height 0 on its line.
inline StablePlaneTree sliced_plane_tree(const TreePair& tp)
{
    detail::require_plane_chart(tp);
    StablePlaneTree p{tp, sliced_lines(tp.seam), {}};
    for (int a = 0; a < tp.size(); ++a) {
        if (!tp.is_component(a)) continue;
        std::vector<PlanePoint> pts;
        if (tp.is_single_line(a)) {
            pts = {{0, 0}, {0, 1}};
        } else {
            for (int s : tp.node(a).children)
                for (std::size_t m = 0; m < tp.node(s).children.size(); ++m)
                    pts.push_back({screen_point(p.seam, tp.node(a).lines, tp.node(s).lines).value(), 0});
        }
        p.z[a] = std::move(pts);
    }
    auto bad = plane_tree_violations(p);
    if (!bad.empty()) throw std::logic_error("sliced plane-tree is invalid: " + bad.front());
    return p;
}

// Components and marks from alpha down to beta (both included), skipping seams.
inline std::vector<int> component_chain(const TreePair& tp, int alpha, int beta)
{
    std::vector<int> up;
    for (int v = beta; v != alpha; v = tp.parent_component(v)) {
        if (v < 0) throw std::invalid_argument("component_chain: beta is not below alpha");
        up.push_back(v);
    }
    up.push_back(alpha);
    std::reverse(up.begin(), up.end());
    return up;
}

inline std::size_t slot_index(const TreePair& tp, int alpha, int child)
{
    const auto slots = plane_slots(tp, alpha);
    return static_cast<std::size_t>(std::find(slots.begin(), slots.end(), child) - slots.begin());
}

// 2p_{alpha beta} = sum over gamma in [alpha, beta[ of z_{gamma beta} * prod over ]alpha, gamma] of a.
inline std::pair<MultiPoly, MultiPoly> gluing_polynomial_2d(const StablePlaneTree& p, int alpha, int beta)
{
    const TreePair& tp = p.tp;
    if (!tp.is_component(alpha) || alpha == beta) throw std::invalid_argument("gluing_polynomial_2d: need a component above beta");
    const auto chain = component_chain(tp, alpha, beta);
    const auto coords = gluing_coordinates(tp);
    const auto names = default_coordinate_names(tp);
    MultiPoly x, y, scale(Rational(1));
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        if (k > 0) scale *= MultiPoly::variable(names.at(static_cast<std::size_t>(coords.index_of_component(chain[k]))));
        const PlanePoint& z = p.z.at(chain[k]).at(slot_index(tp, chain[k], chain[k + 1]));
        x += MultiPoly(z.x) * scale;
        y += MultiPoly(z.y) * scale;
    }
    return {x, y};
}

// Result of 2phi at a point: the glued tree-pair, the line configuration and,
// for each surviving component (by vertex of the chart's tree-pair), the
// positions of its surviving descendants.
struct GluedPlaneTree {
    TreePair glued;
    StableCurve lines;
    std::map<int, std::vector<std::pair<int, PlanePoint>>> screens;
};

namespace detail {
inline std::map<std::string, Rational> coordinate_values(const TreePair& tp, const std::vector<Rational>& coords)
{
    const auto names = default_coordinate_names(tp);
    if (coords.size() != names.size())
        throw std::invalid_argument("expected " + std::to_string(names.size()) + " gluing coordinates, got " + std::to_string(coords.size()));
    std::map<std::string, Rational> at;
    for (std::size_t k = 0; k < names.size(); ++k) at[names[k]] = coords[k];
    return at;
}

inline std::string mark_name(const TreePair& tp, int v)
{
    int best = v;
    std::function<void(int)> rec = [&](int u) {
        const auto& x = tp.node(u);
        if (x.kind == NodeKind::mark) {
            const auto& b = tp.node(best);
            if (b.kind != NodeKind::mark || std::make_pair(x.line, x.point) < std::make_pair(b.line, b.point)) best = u;
        }
        for (int c : x.children) rec(c);
    };
    rec(v);
    return "m" + std::to_string(tp.node(best).line) + "." + std::to_string(tp.node(best).point);
}
}  // namespace detail

inline void check_on_local_model(const TreePair& tp, const std::vector<Rational>& coords)
{
    const auto names = default_coordinate_names(tp);
    if (coords.size() != names.size()) throw std::invalid_argument("expected " + std::to_string(names.size()) + " gluing coordinates");
    for (const auto& e : coherence_equations(tp)) {
        Rational l = 1, r = 1;
        for (int k : e.lhs) l *= coords[static_cast<std::size_t>(k)];
        for (int k : e.rhs) r *= coords[static_cast<std::size_t>(k)];
        if (l != r) throw std::domain_error("point is not on the local model: " + equation_str(e, names) + " fails");
    }
}

inline GluedPlaneTree evaluate_chart_2d(const TreePair& tp, const std::vector<Rational>& coords)
{
    detail::require_plane_chart(tp);
    check_on_local_model(tp, coords);
    const auto coords_of = gluing_coordinates(tp);
    const auto at = detail::coordinate_values(tp, coords);
    std::vector<int> q;
    for (const auto& v : coords) q.push_back(v != 0 ? 1 : 0);

    GluedPlaneTree out;
    out.glued = glue_tree_pair(tp, q);
    ChartPoint sp;
    for (std::size_t k = 0; k < coords_of.seams.size(); ++k) sp.b[coords_of.seams[k]] = coords[coords_of.components.size() + k];
    out.lines = tp.seam.is_leaf(StableTree::root()) ? StableCurve{tp.seam, {}} : evaluate_chart(tp.seam, default_slice(tp.seam), sp);

    const StablePlaneTree base = sliced_plane_tree(tp);
    auto survives = [&](int v) {
        if (!tp.is_component(v)) return true;
        const int k = coords_of.index_of_component(v);
        return k < 0 || coords[static_cast<std::size_t>(k)] == 0;
    };
    for (int beta = 1; beta < tp.size(); ++beta) {
        if (tp.node(beta).kind == NodeKind::seam || !survives(beta)) continue;
        int alpha = tp.parent_component(beta);
        while (!survives(alpha)) alpha = tp.parent_component(alpha);
        const auto [px, py] = gluing_polynomial_2d(base, alpha, beta);
        out.screens[alpha].push_back({beta, {px.eval(at), py.eval(at)}});
    }

    // domain: compare against the seams of the glued tree-pair
    const auto bt = two_brackets_by_vertex(tp);
    const auto gt = two_brackets_by_vertex(out.glued);
    std::map<TwoBracket, int> glued_id;
    for (const auto& [v, b] : gt) glued_id[b] = v;
    for (const auto& [alpha, kids] : out.screens) {
        const int ga = glued_id.at(bt.at(alpha));
        std::map<int, int> seam_of;  // glued child id -> glued seam id
        for (int s : out.glued.node(ga).children)
            for (int k : out.glued.node(s).children) seam_of[k] = s;
        std::map<int, std::vector<std::pair<int, PlanePoint>>> groups;
        for (const auto& [beta, z] : kids) groups[seam_of.at(glued_id.at(bt.at(beta)))].push_back({beta, z});
        std::vector<std::pair<int, Rational>> line_x;
        for (const auto& [s, g] : groups) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g[i].second.x != g[0].second.x) throw std::logic_error("evaluate_chart_2d: points of one line are not collinear");
                for (std::size_t j = i + 1; j < g.size(); ++j)
                    if (g[i].second == g[j].second)
                        throw std::domain_error("point outside the chart domain: Q^" + std::to_string(min_label(out.glued.node(s).lines)) +
                                                " vanishes (" + detail::mark_name(tp, g[i].first) + " meets " + detail::mark_name(tp, g[j].first) + ")");
            }
            for (const auto& [s2, x2] : line_x)
                if (x2 == g[0].second.x)
                    throw std::domain_error("point outside the chart domain: q_" + std::to_string(min_label(out.glued.node(s2).lines)) +
                                            std::to_string(min_label(out.glued.node(s).lines)) + " vanishes");
            line_x.push_back({s, g[0].second.x});
        }
    }
    return out;
}

// A configuration in the open stratum: r distinct vertical lines and n_i
// distinct points on line i.
struct SmoothPlaneConfig {
    std::vector<Rational> lines;
    std::map<std::pair<int, int>, PlanePoint> marks;
    bool operator==(const SmoothPlaneConfig& o) const { return lines == o.lines && marks == o.marks; }
};

inline std::vector<std::string> smooth_config_violations(const std::vector<int>& n, const SmoothPlaneConfig& c)
{
    std::vector<std::string> out;
    if (c.lines.size() != n.size()) return {"wrong number of lines"};
    if (std::set<Rational>(c.lines.begin(), c.lines.end()).size() != c.lines.size()) out.push_back("two lines coincide");
    std::set<std::pair<int, int>> want;
    for (std::size_t i = 0; i < n.size(); ++i)
        for (int j = 1; j <= n[i]; ++j) want.insert({static_cast<int>(i) + 1, j});
    std::set<std::pair<int, int>> have;
    std::set<std::pair<int, Rational>> ys;
    for (const auto& [k, z] : c.marks) {
        have.insert(k);
        if (k.first < 1 || k.first > static_cast<int>(n.size())) continue;
        if (z.x != c.lines[static_cast<std::size_t>(k.first - 1)]) out.push_back("a point is off its line");
        if (!ys.insert({k.first, z.y}).second) out.push_back("two points coincide on a line");
    }
    if (have != want) out.push_back("points do not match n");
    return out;
}

// (x, y) -> lambda (x, y) + (tx, ty)
inline SmoothPlaneConfig act_affine(const SmoothPlaneConfig& c, const Rational& lambda, const Rational& tx, const Rational& ty)
{
    if (lambda == 0) throw std::invalid_argument("act_affine: zero dilation");
    SmoothPlaneConfig out;
    for (const auto& x : c.lines) out.lines.push_back(lambda * x + tx);
    for (const auto& [k, z] : c.marks) out.marks[k] = {lambda * z.x + tx, lambda * z.y + ty};
    return out;
}

// Smooth configuration from a point with every coordinate nonzero. Lines are
// placed by the line chart, scaled by the root-frame scale of the components
// over the root seam vertex; every point must land on its own line.
inline SmoothPlaneConfig smooth_config_2d(const TreePair& tp, const std::vector<Rational>& coords)
{
    for (const auto& v : coords)
        if (v == 0) throw std::domain_error("smooth_config_2d: a gluing coordinate vanishes");
    const GluedPlaneTree g = evaluate_chart_2d(tp, coords);
    const auto cidx = gluing_coordinates(tp);
    const int r = tp.r();
    SmoothPlaneConfig out;
    for (const auto& [beta, z] : g.screens.at(0)) {
        const auto& x = tp.node(beta);
        if (x.kind != NodeKind::mark) throw std::logic_error("smooth_config_2d: unexpected surviving component");
        out.marks[{x.line, x.point}] = z;
    }
    if (r == 1) {
        out.lines = {out.marks.begin()->second.x};
    } else {
        Rational k = 1;
        bool found = tp.is_multi_line(0);
        for (int a = 1; a < tp.size() && !found; ++a)
            if (tp.is_multi_line(a) && tp.node(a).lines == full_set(r)) {
                for (int c : component_chain(tp, 0, a))
                    if (c != 0) k *= coords[static_cast<std::size_t>(cidx.index_of_component(c))];
                found = true;
            }
        if (!found) throw std::logic_error("smooth_config_2d: no component separates the lines");
        const auto& xs = g.lines.x.at(full_set(r));
        for (int i = 1; i <= r; ++i) out.lines.push_back(k * xs[static_cast<std::size_t>(g.lines.tree.child_index(g.lines.tree.leaf_node(i)))]);
    }
    auto bad = smooth_config_violations(tp.n, out);
    if (!bad.empty()) throw std::logic_error("smooth_config_2d: " + bad.front());
    return out;
}

namespace detail {
// Mark reached from a child slot by always taking the pinned slot at height 0.
inline std::pair<int, int> anchor_mark(const TreePair& tp, int v)
{
    while (tp.node(v).kind != NodeKind::mark) v = plane_slots(tp, v).front();
    return {tp.node(v).line, tp.node(v).point};
}
}  // namespace detail

// Root-frame scale of every component of the chart's tree-pair, read off a smooth configuration.
inline std::map<int, Rational> component_scales(const TreePair& tp, const SmoothPlaneConfig& c)
{
    const Slice sl = tp.seam.is_leaf(StableTree::root()) ? Slice{} : default_slice(tp.seam);
    std::map<int, Rational> s;
    for (int a = 0; a < tp.size(); ++a) {
        if (!tp.is_component(a)) continue;
        if (tp.is_multi_line(a)) {
            const int v = tp.seam.node_of(tp.node(a).lines);
            const int l1 = slice_leaf(tp.seam, sl, v, true), l0 = slice_leaf(tp.seam, sl, v, false);
            s[a] = c.lines.at(static_cast<std::size_t>(l1 - 1)) - c.lines.at(static_cast<std::size_t>(l0 - 1));
        } else {
            const auto slots = plane_slots(tp, a);
            s[a] = c.marks.at(detail::anchor_mark(tp, slots.at(1))).y - c.marks.at(detail::anchor_mark(tp, slots.at(0))).y;
        }
        if (s[a] == 0) throw std::domain_error("configuration is outside the chart: a component scale vanishes");
    }
    return s;
}

// 2phi^{-1} on the open stratum: a = ratio of root-frame scales, b from the line chart.
inline std::vector<Rational> invert_chart_2d(const TreePair& tp, const SmoothPlaneConfig& c)
{
    detail::require_plane_chart(tp);
    auto bad = smooth_config_violations(tp.n, c);
    if (!bad.empty()) throw std::invalid_argument("invalid configuration: " + bad.front());
    const auto s = component_scales(tp, c);
    const auto coords = gluing_coordinates(tp);
    std::vector<Rational> out;
    for (int a : coords.components) out.push_back(s.at(a) / s.at(tp.parent_component(a)));
    if (!coords.seams.empty()) {
        const StableTree top = corolla(tp.r());
        StableCurve lines{top, {{full_set(tp.r()), c.lines}}};
        const ChartPoint p = invert_chart(tp.seam, default_slice(tp.seam), lines);
        for (LeafSet sv : coords.seams) out.push_back(p.b.at(sv));
    }
    return out;
}

// Random point of the local model with every coordinate nonzero, built from
// free scales: the b's, the single-line scales and, when the root is
// single-line, the common scale of the components over the root seam vertex.
inline std::vector<Rational> random_coherent_point(const TreePair& tp, std::mt19937_64& rng)
{
    detail::require_plane_chart(tp);
    const auto coords = gluing_coordinates(tp);
    std::map<LeafSet, Rational> b, seam_scale;
    for (LeafSet sv : coords.seams) b[sv] = random_rational(rng);
    const Rational k = tp.is_multi_line(0) ? Rational(1) : random_rational(rng);
    for (int v = 0; v < tp.seam.size(); ++v) {
        const LeafSet sv = tp.seam.leaves(v);
        seam_scale[sv] = v == 0 ? k : seam_scale.at(tp.seam.leaves(tp.seam.parent(v))) * (b.count(sv) ? b.at(sv) : Rational(1));
    }
    std::map<int, Rational> s;
    for (int a = 0; a < tp.size(); ++a) {
        if (!tp.is_component(a)) continue;
        if (a == 0) s[a] = 1;
        else if (tp.is_multi_line(a)) s[a] = seam_scale.at(tp.node(a).lines);
        else s[a] = random_rational(rng);
    }
    std::vector<Rational> out;
    for (int a : coords.components) out.push_back(s.at(a) / s.at(tp.parent_component(a)));
    for (LeafSet sv : coords.seams) out.push_back(b.at(sv));
    return out;
}

struct PlaneRoundTripReport {
    int samples = 0;
    int checked = 0;
    int outside = 0;
    std::vector<std::string> failures;
};

// Random open-stratum points: 2phi, a random affine motion, 2phi^{-1}, compare.
inline PlaneRoundTripReport plane_round_trip_check(const TreePair& tp, int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    PlaneRoundTripReport rep;
    for (int k = 0; k < samples; ++k) {
        ++rep.samples;
        const auto p = random_coherent_point(tp, rng);
        SmoothPlaneConfig c;
        try {
            c = smooth_config_2d(tp, p);
        } catch (const std::domain_error&) {
            ++rep.outside;
            continue;
        }
        ++rep.checked;
        try {
            Rational lambda = random_rational(rng);
            while (lambda == 0) lambda = random_rational(rng);
            const auto moved = act_affine(c, lambda, random_rational(rng), random_rational(rng));
            const auto back = invert_chart_2d(tp, moved);
            if (back != p) rep.failures.push_back("sample " + std::to_string(k) + ": inversion does not return the point");
            else if (!(smooth_config_2d(tp, back) == c)) rep.failures.push_back("sample " + std::to_string(k) + ": configuration not reproduced");
        } catch (const std::exception& e) {
            rep.failures.push_back("sample " + std::to_string(k) + ": " + e.what());
        }
    }
    return rep;
}

inline nlohmann::json glued_plane_tree_to_json(const TreePair& tp, const GluedPlaneTree& g)
{
    nlohmann::json screens = nlohmann::json::array();
    const auto bt = two_brackets_by_vertex(tp);
    for (const auto& [alpha, kids] : g.screens) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& [beta, z] : kids)
            pts.push_back({{"vertex", two_bracket_str(bt.at(beta))}, {"x", to_string(z.x)}, {"y", to_string(z.y)}});
        screens.push_back({{"component", two_bracket_str(bt.at(alpha))}, {"points", pts}});
    }
    return {{"tree_pair", tree_pair_to_json(g.glued)}, {"lines", curve_to_json(g.lines)}, {"screens", screens}};
}

// The chart pair of the worked example on M_4-bar: T1 = (2,(1,(3,4))) with the
// default slice and T2 = (1,((3,4),2)) pinning {3,4} at 0 and 2 at 1 in the
// screen of {2,3,4}.
struct ChartPair {
    StableTree t1, t2;
    Slice s1, s2;
};

inline ChartPair mr_morphism_example()
{
    ChartPair c;
    c.t1 = tree_from_json(nlohmann::json::parse("[2,[1,[3,4]]]"));
    c.t2 = tree_from_json(nlohmann::json::parse("[1,[[3,4],2]]"));
    c.s1 = default_slice(c.t1);
    c.s2 = default_slice(c.t2);
    c.s2.s[singleton(2) | singleton(3) | singleton(4)] = {singleton(3) | singleton(4), singleton(2)};
    return c;
}

// (r, s) = (b[1,3,4], b[3,4]) on T1 goes to (r', s') = (b[2,3,4], b[3,4]) on T2.
inline std::pair<Rational, Rational> mr_morphism_expected(const Rational& r, const Rational& s)
{
    if (r == 0 || r == 1) throw std::domain_error("transition undefined at r = 0 or r = 1");
    return {(1 - r) / r, r * s / (1 - r)};
}

inline ChartPoint mr_morphism_point(const Rational& r, const Rational& s)
{
    ChartPoint p;
    p.b[singleton(1) | singleton(3) | singleton(4)] = r;
    p.b[singleton(3) | singleton(4)] = s;
    return p;
}

struct ClosedFormReport {
    int samples = 0;
    int checked = 0;
    std::vector<std::string> failures;
};

// Random (r, s), a fifth of them on s = 0; r avoids 0 and 1.
inline ClosedFormReport mr_morphism_closed_form_check(int samples, std::uint64_t seed)
{
    const ChartPair c = mr_morphism_example();
    std::mt19937_64 rng(seed);
    ClosedFormReport rep;
    for (int k = 0; k < samples; ++k) {
        ++rep.samples;
        Rational r = random_rational(rng);
        while (r == 0 || r == 1) r = random_rational(rng);
        const Rational s = k % 5 == 0 ? Rational(0) : random_rational(rng);
        const auto want = mr_morphism_expected(r, s);
        try {
            const ChartPoint q = transition_map(c.t1, c.s1, c.t2, c.s2, mr_morphism_point(r, s));
            const Rational r2 = q.b.at(singleton(2) | singleton(3) | singleton(4)), s2 = q.b.at(singleton(3) | singleton(4));
            ++rep.checked;
            if (r2 != want.first || s2 != want.second)
                rep.failures.push_back("r=" + to_string(r) + " s=" + to_string(s) + ": got (" + to_string(r2) + ", " + to_string(s2) + ")");
        } catch (const std::domain_error&) {
            // the first chart puts 1, 3, 4, 2 at 0, r, r(1+s), 1
            if (s != -1 && r * (1 + s) != 1) rep.failures.push_back("r=" + to_string(r) + " s=" + to_string(s) + ": unexpected domain error");
        }
    }
    return rep;
}

}  // namespace mlines
