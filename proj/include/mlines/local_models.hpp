#pragma once

#include "mlines/numbers.hpp"
#include "mlines/tree_pairs.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlines {

using IntVec = std::vector<Int>;
using IntMat = std::vector<IntVec>;

struct LatticeModel {
    std::vector<std::string> names;
    IntMat generators;
    std::size_t rank_n() const { return names.size(); }
};

// ---------------------------------------------------------------------------
// Integer lattice normal forms

inline bool is_zero_row(const IntVec& v)
{
    return std::all_of(v.begin(), v.end(), [](const Int& x) { return x == 0; });
}

// Reduced row-style Hermite normal form: positive pivots, entries above a
// pivot in [0, pivot), zero rows dropped. Canonical for the row lattice.
inline IntMat hermite_normal_form(IntMat m)
{
    if (m.empty()) return m;
    const std::size_t cols = m[0].size();
    for (const auto& row : m)
        if (row.size() != cols) throw std::invalid_argument("ragged matrix");
    std::size_t top = 0;
    for (std::size_t c = 0; c < cols && top < m.size(); ++c) {
        // Euclid down the column until one nonzero remains at `top`
        while (true) {
            std::size_t best = m.size();
            for (std::size_t i = top; i < m.size(); ++i)
                if (m[i][c] != 0 && (best == m.size() || abs(m[i][c]) < abs(m[best][c]))) best = i;
            if (best == m.size()) break;
            std::swap(m[top], m[best]);
            bool done = true;
            for (std::size_t i = top + 1; i < m.size(); ++i) {
                if (m[i][c] == 0) continue;
                const Int q = m[i][c] / m[top][c];
                for (std::size_t k = c; k < cols; ++k) m[i][k] -= q * m[top][k];
                if (m[i][c] != 0) done = false;
            }
            if (done) break;
        }
        if (m[top][c] == 0) continue;
        if (m[top][c] < 0)
            for (auto& x : m[top]) x = -x;
        for (std::size_t i = 0; i < top; ++i) {
            Int q = m[i][c] / m[top][c];
            if (m[i][c] - q * m[top][c] < 0) q -= 1;
            if (q != 0)
                for (std::size_t k = c; k < cols; ++k) m[i][k] -= q * m[top][k];
        }
        ++top;
    }
    m.resize(top);
    return m;
}

inline std::size_t lattice_rank(const IntMat& m) { return hermite_normal_form(m).size(); }

inline bool lattice_span_equal(const IntMat& g1, const IntMat& g2, std::size_t ambient)
{
    for (const auto* g : {&g1, &g2})
        for (const auto& v : *g)
            if (v.size() != ambient) throw std::invalid_argument("generator length differs from the ambient rank");
    IntMat a, b;
    for (const auto& v : g1)
        if (!is_zero_row(v)) a.push_back(v);
    for (const auto& v : g2)
        if (!is_zero_row(v)) b.push_back(v);
    return hermite_normal_form(a) == hermite_normal_form(b);
}

// Nonzero invariant factors of the row lattice.
inline std::vector<Int> smith_invariant_factors(IntMat m)
{
    std::vector<Int> out;
    if (m.empty()) return out;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t t = 0;
    while (t < rows && t < cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        std::size_t pi = rows, pj = cols;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j)
                if (m[i][j] != 0 && (pi == rows || abs(m[i][j]) < abs(m[pi][pj]))) {
                    pi = i;
                    pj = j;
                }
        if (pi == rows) break;
        std::swap(m[t], m[pi]);
        for (auto& row : m) std::swap(row[t], row[pj]);
        bool clean = true;
        for (std::size_t i = t + 1; i < rows; ++i) {
            const Int q = m[i][t] / m[t][t];
            if (q != 0)
                for (std::size_t k = t; k < cols; ++k) m[i][k] -= q * m[t][k];
            if (m[i][t] != 0) clean = false;
        }
        for (std::size_t j = t + 1; j < cols; ++j) {
            const Int q = m[t][j] / m[t][t];
            if (q != 0)
                for (std::size_t k = t; k < rows; ++k) m[k][j] -= q * m[k][t];
            if (m[t][j] != 0) clean = false;
        }
        if (!clean) continue;
        // divisibility condition on the rest of the block
        bool divides = true;
        for (std::size_t i = t + 1; i < rows && divides; ++i)
            for (std::size_t j = t + 1; j < cols; ++j)
                if (m[i][j] % m[t][t] != 0) {
                    for (std::size_t k = t; k < cols; ++k) m[t][k] += m[i][k];
                    divides = false;
                    break;
                }
        if (!divides) continue;
        out.push_back(abs(m[t][t]));
        ++t;
    }
    return out;
}

inline bool lattice_is_saturated(const IntMat& generators)
{
    for (const auto& d : smith_invariant_factors(generators))
        if (d != 1) return false;
    return true;
}

inline bool lattice_is_saturated(const LatticeModel& m) { return lattice_is_saturated(m.generators); }

// ---------------------------------------------------------------------------
// Generators of the coherence lattice

inline void require_dimension_zero(const TreePair& tp, bool allow_positive_dimension)
{
    if (!allow_positive_dimension && stratum_dimension(tp) != 0)
        throw std::domain_error("local models are defined for dimension-0 tree-pairs; this one has dimension " +
                                std::to_string(stratum_dimension(tp)));
}

inline LatticeModel coherence_generators(const TreePair& tp, bool allow_positive_dimension = false)
{
    require_dimension_zero(tp, allow_positive_dimension);
    LatticeModel m{default_coordinate_names(tp), {}};
    for (const auto& e : coherence_equations(tp)) {
        IntVec v(m.rank_n(), 0);
        for (int k : e.lhs) v[static_cast<std::size_t>(k)] += 1;
        for (int k : e.rhs) v[static_cast<std::size_t>(k)] -= 1;
        m.generators.push_back(std::move(v));
    }
    return m;
}

struct CanonicalGenerator {
    int alpha = -1;  // bubble vertex owning the generator
    int next = -1;   // following multi-line component over the same seam vertex, or -1
    IntVec v;
};

inline int nearest_common_component(const TreePair& tp, int x, int y)
{
    const auto ax = component_ancestors(tp, x);
    for (int a = tp.parent_component(y); a >= 0; a = tp.parent_component(a))
        if (std::find(ax.begin(), ax.end(), a) != ax.end()) return a;
    throw std::logic_error("components without a common ancestor");
}

// Inorder on multi-line components over one seam vertex: none is an ancestor
// of another, so this is the preorder of the canonical planar embedding.
inline std::vector<CanonicalGenerator> canonical_generator_list(const TreePair& tp, bool allow_positive_dimension = false)
{
    require_dimension_zero(tp, allow_positive_dimension);
    std::vector<CanonicalGenerator> out;
    if (!tp.is_component(0)) return out;
    const auto coords = gluing_coordinates(tp);
    const std::size_t n = coords.size();
    std::map<LeafSet, std::vector<int>> over;
    for (int v = 0; v < tp.size(); ++v)
        if (tp.is_multi_line(v)) over[tp.node(v).lines].push_back(v);
    auto add_path = [&](IntVec& vec, int from, int to, int sign) {
        for (int c : path_components(tp, from, to)) vec[static_cast<std::size_t>(coords.index_of_component(c))] += sign;
    };
    for (int alpha = 0; alpha < tp.size(); ++alpha) {
        if (!tp.is_multi_line(alpha)) continue;
        const LeafSet rho = tp.node(alpha).lines;
        const auto& group = over[rho];
        const auto pos = static_cast<std::size_t>(std::find(group.begin(), group.end(), alpha) - group.begin());
        IntVec vec(n, 0);
        if (pos + 1 < group.size()) {
            const int next = group[pos + 1];
            const int g = multi_line_ancestor(tp, alpha), g2 = multi_line_ancestor(tp, next);
            int beta = g, beta2 = g2;
            if (g == g2) beta = beta2 = nearest_common_component(tp, alpha, next);
            add_path(vec, next, beta2, +1);
            add_path(vec, alpha, beta, -1);
            out.push_back({alpha, next, std::move(vec)});
        } else if (rho != full_set(tp.r())) {
            vec[static_cast<std::size_t>(coords.index_of_seam(rho))] += 1;
            add_path(vec, alpha, multi_line_ancestor(tp, alpha), -1);
            out.push_back({alpha, -1, std::move(vec)});
        }
    }
    return out;
}

inline LatticeModel canonical_generators(const TreePair& tp, bool allow_positive_dimension = false)
{
    LatticeModel m{default_coordinate_names(tp), {}};
    for (auto& g : canonical_generator_list(tp, allow_positive_dimension)) m.generators.push_back(std::move(g.v));
    return m;
}

// ---------------------------------------------------------------------------
// Difference constraints  x_i - x_j >= A_ij (i<j),  B_i <= x_i <= C_i

struct DiffConstraintSystem {
    int n = 0;
    std::map<std::pair<int, int>, Int> diff;  // (i,j) with i<j -> A_ij
    std::vector<std::optional<Int>> lower, upper;  // nullopt = -inf / +inf

    explicit DiffConstraintSystem(int vars = 0) : n(vars), lower(static_cast<std::size_t>(vars)), upper(static_cast<std::size_t>(vars)) {}

    void add_difference(int i, int j, const Int& a)
    {
        if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw std::out_of_range("difference constraint index out of range");
        if (i > j) throw std::invalid_argument("difference constraints need i < j");
        auto [it, fresh] = diff.try_emplace({i, j}, a);
        if (!fresh && it->second < a) it->second = a;
    }
    void add_lower(int i, const Int& b)
    {
        auto& l = lower.at(static_cast<std::size_t>(i));
        if (!l || *l < b) l = b;
    }
    void add_upper(int i, const Int& c)
    {
        auto& u = upper.at(static_cast<std::size_t>(i));
        if (!u || *u > c) u = c;
    }

    bool satisfied_by(const IntVec& x) const
    {
        if (static_cast<int>(x.size()) != n) return false;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (lower[k] && x[k] < *lower[k]) return false;
            if (upper[k] && x[k] > *upper[k]) return false;
        }
        for (const auto& [ij, a] : diff)
            if (x[static_cast<std::size_t>(ij.first)] - x[static_cast<std::size_t>(ij.second)] < a) return false;
        return true;
    }
};

struct DiffSolution {
    bool feasible = false;
    IntVec x;
    std::vector<std::string> certificate;  // fold chain ending in an empty box when infeasible
};

inline DiffSolution solve_difference_constraints(const DiffConstraintSystem& sys)
{
    const auto n = static_cast<std::size_t>(sys.n);
    std::vector<std::optional<Int>> B = sys.lower;
    std::vector<std::string> why(n);
    for (std::size_t i = 0; i < n; ++i)
        if (B[i]) why[i] = "x" + std::to_string(i + 1) + " >= " + B[i]->str() + " (given)";
    IntVec x(n, 0);
    std::vector<bool> deferred(n, false);
    DiffSolution res;
    for (std::size_t k = n; k-- > 0;) {
        if (!B[k]) {
            deferred[k] = true;
            continue;
        }
        if (sys.upper[k] && *B[k] > *sys.upper[k]) {
            res.certificate.push_back(why[k]);
            res.certificate.push_back("x" + std::to_string(k + 1) + " <= " + sys.upper[k]->str() + " (given): empty box");
            return res;
        }
        x[k] = *B[k];
        for (std::size_t i = 0; i < k; ++i) {
            auto it = sys.diff.find({static_cast<int>(i), static_cast<int>(k)});
            if (it == sys.diff.end()) continue;
            const Int folded = x[k] + it->second;
            if (!B[i] || *B[i] < folded) {
                B[i] = folded;
                why[i] = why[k] + "; pin x" + std::to_string(k + 1) + " = " + x[k].str() + ", x" + std::to_string(i + 1) + " - x" +
                         std::to_string(k + 1) + " >= " + it->second.str() + " gives x" + std::to_string(i + 1) + " >= " + folded.str();
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!deferred[k]) continue;
        std::optional<Int> cap = sys.upper[k];
        for (std::size_t i = 0; i < k; ++i) {
            auto it = sys.diff.find({static_cast<int>(i), static_cast<int>(k)});
            if (it == sys.diff.end()) continue;
            const Int c = x[i] - it->second;
            if (!cap || c < *cap) cap = c;
        }
        x[k] = cap ? *cap : Int(0);
    }
    if (!sys.satisfied_by(x)) throw std::logic_error("difference-constraint solver produced a non-solution");
    res.feasible = true;
    res.x = std::move(x);
    return res;
}

// ---------------------------------------------------------------------------
// Incidence of canonical generators and the normality witness

struct CoordinateIncidence {
    bool is_seam = false;
    std::vector<std::pair<int, int>> hits;  // (generator index, entry)
};

struct IncidenceReport {
    bool ok = true;
    std::vector<CoordinateIncidence> coords;
    std::vector<std::string> problems;
};

// Each a-coordinate is hit at most twice, +1 in the earlier generator and -1 in
// the later; each b-coordinate at most once.
inline IncidenceReport incidence_analysis(const IntMat& gens, std::size_t component_count)
{
    IncidenceReport rep;
    const std::size_t n = gens.empty() ? component_count : gens[0].size();
    rep.coords.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        auto& ci = rep.coords[c];
        ci.is_seam = c >= component_count;
        for (std::size_t g = 0; g < gens.size(); ++g)
            if (gens[g][c] != 0) ci.hits.emplace_back(static_cast<int>(g), static_cast<int>(gens[g][c]));
        const std::string at = "coordinate " + std::to_string(c + 1);
        for (const auto& h : ci.hits)
            if (h.second != 1 && h.second != -1) rep.problems.push_back(at + ": entry outside {-1,1}");
        if (ci.is_seam && ci.hits.size() > 1) rep.problems.push_back(at + ": seam coordinate hit by more than one generator");
        if (!ci.is_seam && ci.hits.size() > 2) rep.problems.push_back(at + ": hit by more than two generators");
        if (!ci.is_seam && ci.hits.size() == 2 && !(ci.hits[0].second == 1 && ci.hits[1].second == -1))
            rep.problems.push_back(at + ": signs are not +1 then -1 in inorder");
    }
    rep.ok = rep.problems.empty();
    return rep;
}

// One inequality of the normality system, in the generator-coefficient variables.
struct SymbolicConstraint {
    enum Kind { upper, lower, difference, nonnegative } kind;
    int i = -1, j = -1;  // generator indices (0-based)
    int coord = -1;      // coordinate index (0-based)
};

inline std::string constraint_str(const SymbolicConstraint& c)
{
    const std::string bi = "b" + std::to_string(c.i + 1), xc = "x" + std::to_string(c.coord + 1);
    switch (c.kind) {
    case SymbolicConstraint::upper: return bi + " <= " + xc;
    case SymbolicConstraint::lower: return bi + " >= -" + xc;
    case SymbolicConstraint::difference: return bi + " - b" + std::to_string(c.j + 1) + " >= -" + xc;
    case SymbolicConstraint::nonnegative: return xc + " >= 0";
    }
    return "?";
}

inline std::vector<SymbolicConstraint> normality_constraints(const IncidenceReport& rep)
{
    if (!rep.ok) throw std::domain_error("canonical generator incidence pattern fails: " + rep.problems.front());
    std::vector<SymbolicConstraint> out;
    for (std::size_t c = 0; c < rep.coords.size(); ++c) {
        const auto& h = rep.coords[c].hits;
        const int ci = static_cast<int>(c);
        if (h.empty())
            out.push_back({SymbolicConstraint::nonnegative, -1, -1, ci});
        else if (h.size() == 1)
            out.push_back({h[0].second == 1 ? SymbolicConstraint::lower : SymbolicConstraint::upper, h[0].first, -1, ci});
        else
            out.push_back({SymbolicConstraint::difference, h[0].first, h[1].first, ci});
    }
    return out;
}

inline DiffConstraintSystem normality_system(const std::vector<SymbolicConstraint>& cons, std::size_t generator_count, const IntVec& x)
{
    DiffConstraintSystem sys(static_cast<int>(generator_count));
    for (const auto& c : cons) {
        const Int& xc = x.at(static_cast<std::size_t>(c.coord));
        switch (c.kind) {
        case SymbolicConstraint::upper: sys.add_upper(c.i, xc); break;
        case SymbolicConstraint::lower: sys.add_lower(c.i, -xc); break;
        case SymbolicConstraint::difference: sys.add_difference(c.i, c.j, -xc); break;
        case SymbolicConstraint::nonnegative: break;
        }
    }
    return sys;
}

struct WitnessResult {
    bool found = false;
    IntVec b;
    std::string message;
};

inline IntVec combine(const IntVec& x, const IntMat& gens, const IntVec& coeffs, const Int& k = 1)
{
    IntVec out(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = k * x[c];
    for (std::size_t g = 0; g < gens.size(); ++g)
        for (std::size_t c = 0; c < x.size(); ++c) out[c] += coeffs[g] * gens[g][c];
    return out;
}

// Given k*x + sum a_g v_g >= 0, find integers b with x + sum b_g v_g >= 0.
inline WitnessResult monoid_saturation_witness(const IntMat& gens, std::size_t component_count, const IntVec& x, const Int& k,
                                               const IntVec& a)
{
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (a.size() != gens.size()) throw std::invalid_argument("one coefficient per generator expected");
    for (const auto& v : combine(x, gens, a, k))
        if (v < 0) throw std::invalid_argument("precondition fails: k*x + sum a*v has a negative entry");
    const auto rep = incidence_analysis(gens, component_count);
    const auto cons = normality_constraints(rep);
    WitnessResult res;
    for (const auto& c : cons)
        if (c.kind == SymbolicConstraint::nonnegative && x[static_cast<std::size_t>(c.coord)] < 0) {
            res.message = "counterexample: untouched coordinate " + std::to_string(c.coord + 1) + " is negative";
            return res;
        }
    const auto sol = solve_difference_constraints(normality_system(cons, gens.size(), x));
    if (!sol.feasible) {
        res.message = "counterexample: integer system infeasible";
        for (const auto& s : sol.certificate) res.message += "; " + s;
        return res;
    }
    for (const auto& v : combine(x, gens, sol.x))
        if (v < 0) throw std::logic_error("witness fails re-substitution");
    res.found = true;
    res.b = sol.x;
    return res;
}

// ---------------------------------------------------------------------------
// Binomial relations

inline std::string relation_str(const IntVec& v, const std::vector<std::string>& names)
{
    auto side = [&](int sign) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const Int e = v[k] * sign;
            if (e <= 0) continue;
            for (Int t = 0; t < e; ++t) s += (s.empty() ? "" : "*") + names.at(k);
        }
        return s.empty() ? std::string("1") : s;
    };
    return side(-1) + " = " + side(1);
}

inline std::vector<std::string> model_defining_relations(const LatticeModel& m)
{
    std::vector<std::string> out;
    for (const auto& v : m.generators) out.push_back(relation_str(v, m.names));
    return out;
}

inline nlohmann::json lattice_model_to_json(const LatticeModel& m)
{
    nlohmann::json g = nlohmann::json::array();
    for (const auto& v : m.generators) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& x : v) row.push_back(static_cast<long long>(x));
        g.push_back(row);
    }
    return {{"names", m.names}, {"generators", g}};
}

inline LatticeModel lattice_model_from_json(const nlohmann::json& j)
{
    LatticeModel m;
    m.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& row : j.at("generators")) {
        IntVec v;
        for (const auto& x : row) v.emplace_back(x.get<long long>());
        if (v.size() != m.names.size()) throw std::invalid_argument("generator length differs from the number of names");
        m.generators.push_back(std::move(v));
    }
    return m;
}

// n = (4,0,0), seam ((1,2),3): two single-line components over {1,2}, each
// holding two one-point components, under one multi-line root.  Coordinates
// a1..a6, b[1,2] play the roles of a,b,c,d,e,f,A in the worked 4x7 example.
inline TreePair four_point_example()
{
    const LeafSet l1 = singleton(1), l2 = singleton(2), l3 = singleton(3), l12 = l1 | l2;
    auto one_point = [&](int j) { return BubbleSpec::component({BubbleSpec::seam(l1, {BubbleSpec::mark(1, j)}), BubbleSpec::seam(l2, {})}); };
    auto pair = [&](int j) { return BubbleSpec::component({BubbleSpec::seam(l12, {one_point(j), one_point(j + 1)})}); };
    return make_tree_pair({4, 0, 0}, StableTree::from_bracketing(Bracketing{3, {l1, l2, l3, l12, full_set(3)}}),
                          BubbleSpec::component({BubbleSpec::seam(l12, {pair(1), pair(3)}), BubbleSpec::seam(l3, {})}));
}

// ---------------------------------------------------------------------------
// Randomized checks

struct WitnessTrials {
    int trials = 0;
    int found = 0;
    std::vector<std::string> failures;
};

// Random instances of the saturation hypothesis: z >= 0, k in 1..5, integer a,
// and x = ceil((z - sum a v) / k), so that k*x + sum a v >= z >= 0.
inline WitnessTrials witness_trials(const IntMat& gens, std::size_t component_count, std::size_t ambient, int trials, std::mt19937_64& rng)
{
    WitnessTrials rep;
    std::uniform_int_distribution<int> zd(0, 6), kd(1, 5), ad(-6, 6);
    for (int t = 0; t < trials; ++t) {
        ++rep.trials;
        IntVec z(ambient), a(gens.size()), x(ambient);
        for (auto& v : z) v = zd(rng);
        for (auto& v : a) v = ad(rng);
        const Int k = kd(rng);
        const IntVec s = combine(IntVec(ambient, 0), gens, a);
        for (std::size_t c = 0; c < ambient; ++c) {
            const Int num = z[c] - s[c];
            Int q = num / k;
            if (q * k < num) q += 1;
            x[c] = q;
        }
        try {
            const auto w = monoid_saturation_witness(gens, component_count, x, k, a);
            if (w.found) ++rep.found;
            else rep.failures.push_back("trial " + std::to_string(t) + ": " + w.message);
        } catch (const std::exception& e) {
            rep.failures.push_back("trial " + std::to_string(t) + ": " + e.what());
        }
    }
    return rep;
}

struct LocalModelCheck {
    bool span_equal = false;
    bool saturated = false;
    bool incidence_ok = false;
    std::size_t rank = 0;
    WitnessTrials witness;
    bool ok() const { return span_equal && saturated && incidence_ok && witness.failures.empty(); }
};

inline LocalModelCheck check_local_model(const TreePair& tp, int trials, std::mt19937_64& rng)
{
    LocalModelCheck c;
    const auto coh = coherence_generators(tp);
    const auto can = canonical_generators(tp);
    const std::size_t comps = gluing_coordinates(tp).components.size();
    c.span_equal = lattice_span_equal(coh.generators, can.generators, can.rank_n());
    c.saturated = lattice_is_saturated(can);
    c.incidence_ok = incidence_analysis(can.generators, comps).ok;
    c.rank = lattice_rank(can.generators);
    if (c.incidence_ok) c.witness = witness_trials(can.generators, comps, can.rank_n(), trials, rng);
    return c;
}

}  // namespace mlines
