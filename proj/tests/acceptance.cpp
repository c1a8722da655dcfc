// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "support.hpp"

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

using namespace mlines;
using namespace mlines::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> notes;
    void fail(const std::string& why)
    {
        pass = false;
        if (notes.size() < 8) notes.push_back(why);
    }
};

std::string vec_str(const std::vector<int>& n)
{
    std::string s = "(";
    for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
    return s + ")";
}

Outcome table_one()
{
    Outcome o;
    VppMemo memo;
    const auto t0 = Clock::now();
    int matched = 0;
    for (const auto& row : table1()) {
        const UniPoly p = vpp(row.n, &memo);
        if (p == row.p) ++matched;
        else o.fail(vec_str(row.n) + ": got " + p.str() + ", expected " + row.p.str());
    }
    const double t = seconds_since(t0);
    if (t >= 10) o.fail("took " + std::to_string(t) + " s");
    o.detail = std::to_string(matched) + "/16 rows exact, " + std::to_string(t) + " s with a cold memo";
    return o;
}

Outcome appendix_identifications()
{
    Outcome o;
    const std::vector<std::pair<std::vector<int>, UniPoly>> want = {
        {{2, 0}, even_poly({1, 1})},       {{1, 1}, even_poly({1, 1})},       {{3, 0}, even_poly({1, 5, 1})},
        {{2, 1}, even_poly({1, 4, 1})},    {{2, 0, 0}, even_poly({1, 4, 1})}, {{1, 1, 0}, even_poly({1, 3, 1})},
    };
    for (const auto& [n, p] : want) {
        const UniPoly got = vpp(n);
        if (!(got == p)) o.fail(vec_str(n) + ": got " + got.str() + ", expected " + p.str());
    }
    o.detail = "6 low-dimensional spaces checked";
    return o;
}

Outcome codim_one_counts()
{
    Outcome o;
    const std::vector<std::pair<std::vector<int>, long long>> want = {{{2, 0}, 2}, {{1, 1}, 1}, {{3, 0}, 8}, {{2, 0, 0}, 7}, {{1, 1, 0}, 5}, {{2, 1}, 5}};
    std::ostringstream d;
    for (const auto& [n, c] : want) {
        const auto f = f_vector(n);
        const long long got = f.size() >= 2 ? f[f.size() - 2] : 0;
        d << vec_str(n) << ":" << got << " ";
        if (got != c) o.fail(vec_str(n) + ": " + std::to_string(got) + " codimension-1 strata, expected " + std::to_string(c));
    }
    o.detail = d.str() + "((2,1) figure caption says eight; enumeration gives five)";
    return o;
}

Outcome oracle_equivalence()
{
    Outcome o;
    int count = 0;
    for (const auto& n : vectors_up_to(6)) {
        if (vpp_dimension(n) > 3) continue;
        ++count;
        const UniPoly a = vpp_by_strata(n), b = vpp(n);
        if (!(a == b)) o.fail(vec_str(n) + ": strata sum " + a.str() + " vs recursion " + b.str());
    }
    o.detail = std::to_string(count) + " vectors with dimension <= 3";
    return o;
}

Outcome seam_consistency()
{
    Outcome o;
    for (int r = 2; r <= 8; ++r)
        if (!(vpp_seam(r) == vpp({r}))) o.fail("r=" + std::to_string(r) + ": " + vpp_seam(r).str() + " vs " + vpp({r}).str());
    if (!(vpp_seam(4) == even_poly({1, 5, 1}))) o.fail("p_4 = " + vpp_seam(4).str());
    if (!(vpp_seam(5) == even_poly({1, 16, 16, 1}))) o.fail("p_5 = " + vpp_seam(5).str());
    o.detail = "r = 2..8";
    return o;
}

Outcome performance()
{
    Outcome o;
    VppMemo memo;
    const auto t0 = Clock::now();
    const UniPoly p = vpp({4, 4}, &memo);
    const double t = seconds_since(t0);
    for (const auto& v : vpp_shape_violations(p, 7)) o.fail(v);
    if (t > 60) o.fail("took " + std::to_string(t) + " s");
    o.detail = "(4,4) = " + p.str() + " in " + std::to_string(t) + " s";
    return o;
}

Outcome local_models()
{
    Outcome o;
    int models = 0, trials = 0;
    std::mt19937_64 rng(2024);
    for (const auto& n : vectors_up_to(6))
        for (const auto& tp : enumerate_tree_pairs(n)) {
            if (stratum_dimension(tp) != 0) continue;
            if (!tp.is_component(0)) continue;  // n = (1): a lone mark, no coordinates
            ++models;
            const auto c = check_local_model(tp, 200, rng);
            trials += c.witness.found;
            if (!c.ok()) {
                std::string why = tree_pair_str(tp) + ":";
                if (!c.span_equal) why += " span";
                if (!c.saturated) why += " saturation";
                if (!c.incidence_ok) why += " incidence";
                if (!c.witness.failures.empty()) why += " " + c.witness.failures.front();
                o.fail(why);
            }
        }
    // fixed 4x7 example
    const TreePair ex = four_point_example();
    const auto can = canonical_generators(ex, true);
    const IntMat printed = {{0, 0, -1, 1, 0, 0, 0}, {-1, 1, 0, -1, 1, 0, 0}, {0, 0, 0, 0, -1, 1, 0}, {0, -1, 0, 0, 0, -1, 1}};
    if (can.generators != printed) o.fail("4x7 example: generator matrix differs");
    if (!lattice_span_equal(can.generators, coherence_generators(ex, true).generators, 7)) o.fail("4x7 example: span differs");
    if (!lattice_is_saturated(can)) o.fail("4x7 example: not saturated");
    std::set<std::string> got;
    for (const auto& c : normality_constraints(incidence_analysis(can.generators, 6))) got.insert(constraint_str(c));
    const std::set<std::string> want = {"b1 <= x3", "b2 <= x1", "b4 >= -x7", "b1 - b2 >= -x4", "b2 - b3 >= -x5", "b2 - b4 >= -x2", "b3 - b4 >= -x6"};
    if (got != want) o.fail("4x7 example: difference system differs");
    o.detail = std::to_string(models) + " dimension-0 models, " + std::to_string(trials) + " witnesses verified, 4x7 example exact";
    return o;
}

Outcome solver()
{
    Outcome o;
    std::mt19937_64 rng(77);
    int feasible = 0;
    for (int k = 0; k < 500; ++k) {
        const auto sys = random_system(rng, true);
        const auto sol = solve_difference_constraints(sys);
        const auto brute = box_search(sys, -4, 4);
        if (sol.feasible != brute.has_value()) o.fail("system " + std::to_string(k) + ": verdict differs from box search");
        if (sol.feasible && !sys.satisfied_by(sol.x)) o.fail("system " + std::to_string(k) + ": returned point violates a constraint");
        if (bellman_ford_feasible(sys) && !sol.feasible) o.fail("system " + std::to_string(k) + ": real-feasible but no integer solution");
        feasible += sol.feasible;
    }
    int open = 0;
    for (int k = 0; k < 500; ++k) {
        const auto sys = random_system(rng, false);
        const auto sol = solve_difference_constraints(sys);
        if (bellman_ford_feasible(sys) != sol.feasible) o.fail("one-sided system " + std::to_string(k) + ": verdict differs from shortest paths");
        open += sol.feasible;
    }
    o.detail = "500 boxed systems (" + std::to_string(feasible) + " feasible) against exhaustive search, 500 one-sided (" +
               std::to_string(open) + " feasible) against shortest paths";
    return o;
}

Outcome charts()
{
    Outcome o;
    const ChartPair c = mr_morphism_example();
    const auto cf = mr_morphism_closed_form_check(200, 5);
    for (const auto& f : cf.failures) o.fail("closed form: " + f);
    if (cf.checked < 100) o.fail("only " + std::to_string(cf.checked) + " closed-form samples");
    // exact points, including the s = 0 extension
    const std::vector<std::pair<Rational, Rational>> pts = {{Rational(1, 2), Rational(1, 3)}, {Rational(2), Rational(0)}, {Rational(-3, 4), Rational(0)}, {Rational(5), Rational(-2, 7)}};
    for (const auto& [r, s] : pts) {
        const ChartPoint q = transition_map(c.t1, c.s1, c.t2, c.s2, mr_morphism_point(r, s));
        const auto want = mr_morphism_expected(r, s);
        if (q.b.at(singleton(2) | singleton(3) | singleton(4)) != want.first || q.b.at(singleton(3) | singleton(4)) != want.second)
            o.fail("closed form at r=" + to_string(r) + " s=" + to_string(s));
    }
    const auto tc = transition_check(c.t1, c.s1, c.t2, c.s2, 200, 9);
    for (const auto& f : tc.failures) o.fail("round trip: " + f);

    int trees = 0, checked = 0, outside = 0;
    for (int r = 2; r <= 5; ++r)
        for (const auto& t : enumerate_stable_trees(r)) {
            if (tree_dimension(t) != 0) continue;
            ++trees;
            const Slice sl = default_slice(t);
            std::mt19937_64 rng(1000 + trees);
            int here = 0;
            for (int k = 0; k < 50; ++k) {
                const ChartPoint p = random_chart_point(t, sl, rng, 0.25);
                StableCurve curve;
                try {
                    curve = evaluate_chart(t, sl, p);
                } catch (const std::domain_error&) {
                    ++outside;
                    continue;
                }
                ++here;
                if (!(invert_chart(t, sl, curve) == p)) o.fail(t.str() + ": inversion does not return the point");
            }
            checked += here;
            if (here == 0) o.fail(t.str() + ": no sample inside the chart");
        }
    o.detail = std::to_string(cf.checked) + " closed-form samples, " + std::to_string(tc.checked) + " pair round trips, " +
               std::to_string(checked) + " inversions over " + std::to_string(trees) + " trees (" + std::to_string(outside) +
               " samples outside the domain)";
    return o;
}

Outcome poset_laws()
{
    Outcome o;
    int trees = 0, pairs = 0;
    for (int r = 2; r <= 5; ++r) {
        const auto all = enumerate_stable_trees(r);
        for (const auto& t : all) {
            ++trees;
            const auto gv = all_glue_vectors(t);
            std::set<Bracketing> image;
            for (const auto& a : gv) {
                const StableTree ga = glue_tree(t, a);
                image.insert(ga.bracketing());
                for (const auto& b : gv) {
                    bool le = true;
                    for (const auto& [s, v] : a)
                        if (v > b.at(s)) le = false;
                    if (le != poset_leq_tree(ga, glue_tree(t, b))) o.fail(t.str() + ": glue is not an order embedding");
                }
            }
            std::set<Bracketing> interval;
            for (const auto& u : all)
                if (poset_leq_tree(t, u)) interval.insert(u.bracketing());
            if (image.size() != gv.size()) o.fail(t.str() + ": glue is not injective");
            if (image != interval) o.fail(t.str() + ": image is not the interval above");
        }
    }
    for (const auto& n : vectors_up_to(6)) {
        const auto all = enumerate_tree_pairs(n);
        for (const auto& tp : all) {
            ++pairs;
            const auto el = local_poset_elements(tp);
            std::set<std::string> image;
            std::vector<TreePair> glued;
            for (const auto& q : el) glued.push_back(glue_tree_pair(tp, q));
            for (std::size_t i = 0; i < el.size(); ++i) {
                image.insert(tree_pair_key(glued[i]));
                for (std::size_t j = 0; j < el.size(); ++j) {
                    bool le = true;
                    for (std::size_t k = 0; k < el[i].size(); ++k)
                        if (el[i][k] > el[j][k]) le = false;
                    if (le != poset_leq_tree_pair(glued[i], glued[j])) o.fail(tree_pair_str(tp) + ": glue is not an order embedding");
                }
            }
            std::set<std::string> interval;
            for (const auto& u : all)
                if (poset_leq_tree_pair(tp, u)) interval.insert(tree_pair_key(u));
            if (image.size() != el.size()) o.fail(tree_pair_str(tp) + ": glue is not injective");
            if (image != interval) o.fail(tree_pair_str(tp) + ": image is not the interval above");
        }
    }
    o.detail = std::to_string(trees) + " trees, " + std::to_string(pairs) + " tree-pairs";
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
        {"Table 1 reproduction", table_one},
        {"low-dimensional identifications", appendix_identifications},
        {"codimension-1 strata counts", codim_one_counts},
        {"stratum-sum oracle equals recursion", oracle_equivalence},
        {"seam polynomial consistency", seam_consistency},
        {"7-dimensional instance within 60 s", performance},
        {"local models of dimension-0 tree-pairs", local_models},
        {"difference-constraint solver", solver},
        {"chart transitions and inversion", charts},
        {"glue maps are order embeddings onto intervals", poset_laws},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << "criterion " << (k + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[k].first << " -- " << o.detail << "\n";
        for (const auto& n : o.notes) std::cout << "    " << n << "\n";
        std::cout.flush();
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria pass\n";
    return failed == 0 ? 0 : 1;
}
