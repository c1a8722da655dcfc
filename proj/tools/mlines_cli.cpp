#include "mlines/mlines.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

using namespace mlines;
using nlohmann::json;

namespace {

struct Options {
    std::string format = "pretty";
    int max_size = -1;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

std::vector<int> parse_vector(const std::string& s)
{
    std::vector<int> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed vector '" + s + "': expected comma-separated nonnegative integers");
        if (item.size() > 3) throw std::invalid_argument("vector entry too large: " + item);
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw std::invalid_argument("malformed vector '" + s + "'");
    return out;
}

std::string vector_str(const std::vector<int>& n)
{
    std::string out = "(";
    for (std::size_t i = 0; i < n.size(); ++i) out += (i ? "," : "") + std::to_string(n[i]);
    return out + ")";
}

void guard_enumeration(const std::vector<int>& n, const Options& o)
{
    const int bound = o.max_size < 0 ? 12 : o.max_size;
    const int size = total_points(n) + static_cast<int>(n.size());
    if (size > bound)
        throw std::length_error("|n|+r = " + std::to_string(size) + " exceeds the enumeration bound " + std::to_string(bound) +
                                "; raise it with --max-size");
}

void guard_vpp(int dim, const Options& o)
{
    const int bound = o.max_size < 0 ? 8 : o.max_size;
    if (dim > bound)
        throw std::length_error("dimension " + std::to_string(dim) + " exceeds the vpp bound " + std::to_string(bound) + "; raise it with --max-size");
}

json read_json_input(const std::string& file, const std::string& inline_json)
{
    if (!inline_json.empty()) return json::parse(inline_json);
    if (file.empty()) throw std::invalid_argument("give the input with --input FILE or --json TEXT");
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open " + file);
    return json::parse(in);
}

json poly_json(const UniPoly& p)
{
    json j = to_json(p);
    j["pretty"] = p.str();
    return j;
}

void print(const Options& o, const json& j, const std::string& pretty)
{
    if (o.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        std::cout << pretty;
}

int cmd_enumerate(const std::string& arg, const Options& o)
{
    const auto n = parse_vector(arg);
    check_vector(n);
    guard_enumeration(n, o);
    const auto tps = enumerate_tree_pairs(n);
    std::map<int, int> by_dim;
    json list = json::array();
    std::ostringstream out;
    for (const auto& tp : tps) {
        const int d = stratum_dimension(tp);
        ++by_dim[d];
        list.push_back({{"dimension", d}, {"tree_pair", tree_pair_to_json(tp)}, {"two_bracketing", two_bracketing_to_json(tree_pair_to_two_bracketing(tp))}});
        out << "d=" << d << "  " << tree_pair_str(tp) << "\n";
    }
    out << tps.size() << " strata: dims [";
    json dims = json::object();
    bool first = true;
    for (const auto& [d, c] : by_dim) {
        out << (first ? "" : ", ") << d << ":" << c;
        dims[std::to_string(d)] = c;
        first = false;
    }
    out << "]\n";
    print(o, {{"n", n}, {"count", tps.size()}, {"by_dimension", dims}, {"tree_pairs", list}}, out.str());
    return 0;
}

int cmd_fvector(const std::string& arg, const Options& o)
{
    const auto n = parse_vector(arg);
    check_vector(n);
    guard_enumeration(n, o);
    const auto f = f_vector(n);
    std::ostringstream out;
    out << "f-vector of " << vector_str(n) << " by dimension: [";
    for (std::size_t d = 0; d < f.size(); ++d) out << (d ? ", " : "") << f[d];
    out << "]\n";
    print(o, {{"n", n}, {"f_vector", f}}, out.str());
    return 0;
}

int cmd_vpp(const std::string& arg, const Options& o)
{
    const auto n = parse_vector(arg);
    check_vector(n);
    guard_vpp(vpp_dimension(n), o);
    const UniPoly p = vpp(n);
    print(o, {{"n", n}, {"vpp", poly_json(p)}}, p.str() + "\n");
    return 0;
}

int cmd_vpp_table(int d, const Options& o)
{
    guard_vpp(d, o);
    const auto rows = vpp_table(d, o.jobs);
    json arr = json::array();
    std::ostringstream out;
    for (const auto& row : rows) {
        arr.push_back({{"n", row.n}, {"vpp", poly_json(row.p)}});
        out << vector_str(row.n) << "  " << row.p.str() << "\n";
    }
    print(o, {{"dimension", d}, {"rows", arr}}, out.str());
    return 0;
}

int cmd_check_local_model(const std::string& arg, int samples, const Options& o)
{
    const auto n = parse_vector(arg);
    check_vector(n);
    guard_enumeration(n, o);
    std::vector<TreePair> d0;
    for (auto& tp : enumerate_tree_pairs(n))
        if (stratum_dimension(tp) == 0 && tp.is_component(0)) d0.push_back(std::move(tp));
    std::vector<LocalModelCheck> results(d0.size());
    auto work = [&](std::size_t k) {
        std::mt19937_64 rng(o.seed + k);
        results[k] = check_local_model(d0[k], samples, rng);
    };
    if (o.jobs <= 1) {
        for (std::size_t k = 0; k < d0.size(); ++k) work(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < o.jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t k; (k = next++) < d0.size();) work(k);
            });
        for (auto& t : pool) t.join();
    }
    json arr = json::array();
    std::ostringstream out;
    int failed = 0;
    for (std::size_t k = 0; k < d0.size(); ++k) {
        const auto& r = results[k];
        const auto m = canonical_generators(d0[k]);
        if (!r.ok()) ++failed;
        arr.push_back({{"tree_pair", tree_pair_to_json(d0[k])},
                       {"model", lattice_model_to_json(m)},
                       {"relations", model_defining_relations(m)},
                       {"span_equal", r.span_equal},
                       {"saturated", r.saturated},
                       {"incidence_ok", r.incidence_ok},
                       {"witness_trials", r.witness.trials},
                       {"witness_found", r.witness.found},
                       {"witness_failures", r.witness.failures}});
        out << (r.ok() ? "ok    " : "FAIL  ") << "N=" << m.rank_n() << " rank=" << r.rank << "  " << tree_pair_str(d0[k]) << "\n";
        for (const auto& rel : model_defining_relations(m)) out << "        " << rel << "\n";
        if (!r.span_equal) out << "        canonical generators do not span the coherence lattice\n";
        if (!r.saturated) out << "        lattice is not saturated\n";
        if (!r.incidence_ok) out << "        incidence pattern fails\n";
        for (const auto& f : r.witness.failures) out << "        " << f << "\n";
    }
    out << d0.size() << " dimension-0 tree-pairs, " << failed << " failing\n";
    print(o, {{"n", n}, {"count", d0.size()}, {"failing", failed}, {"models", arr}}, out.str());
    return failed == 0 ? 0 : 1;
}

int cmd_chart_eval(const std::string& file, const std::string& inline_json, const Options& o)
{
    const json in = read_json_input(file, inline_json);
    if (in.contains("tree_pair")) {
        const TreePair tp = tree_pair_from_json(in.at("tree_pair"));
        std::vector<Rational> coords;
        for (const auto& v : in.at("coords")) coords.push_back(rational_from_json(v));
        const auto g = evaluate_chart_2d(tp, coords);
        std::ostringstream out;
        out << "stratum " << tree_pair_str(g.glued) << "\n";
        const auto bt = two_brackets_by_vertex(tp);
        for (const auto& [alpha, kids] : g.screens) {
            out << "screen " << two_bracket_str(bt.at(alpha)) << "\n";
            for (const auto& [beta, z] : kids) out << "  " << two_bracket_str(bt.at(beta)) << " at (" << to_string(z.x) << ", " << to_string(z.y) << ")\n";
        }
        print(o, glued_plane_tree_to_json(tp, g), out.str());
        return 0;
    }
    const StableTree t = tree_from_json(in.at("tree"));
    const Slice sl = in.contains("slice") ? slice_from_json(in["slice"]) : default_slice(t);
    const ChartPoint p = chart_point_from_json(in.value("point", json::object()));
    const StableCurve c = evaluate_chart(t, sl, p);
    std::ostringstream out;
    out << "tree " << c.tree.str() << "\n";
    for (int v : c.tree.interior()) {
        out << "screen " << set_str(c.tree.leaves(v)) << ":";
        for (std::size_t k = 0; k < c.tree.children(v).size(); ++k)
            out << " " << set_str(c.tree.leaves(c.tree.children(v)[k])) << "@" << to_string(c.x.at(c.tree.leaves(v))[k]);
        out << "\n";
    }
    print(o, curve_to_json(c), out.str());
    return 0;
}

int cmd_transition_check(const std::string& example, const std::string& file, const std::string& inline_json, const std::string& plane,
                         int samples, const Options& o)
{
    if (!plane.empty()) {
        const auto n = parse_vector(plane);
        check_vector(n);
        guard_enumeration(n, o);
        json arr = json::array();
        std::ostringstream out;
        int failed = 0, count = 0;
        for (const auto& tp : enumerate_tree_pairs(n)) {
            if (stratum_dimension(tp) != 0 || !tp.is_component(0)) continue;
            ++count;
            const auto rep = plane_round_trip_check(tp, samples, o.seed);
            if (!rep.failures.empty()) ++failed;
            arr.push_back({{"tree_pair", tree_pair_str(tp)}, {"checked", rep.checked}, {"outside", rep.outside}, {"failures", rep.failures}});
            out << (rep.failures.empty() ? "ok    " : "FAIL  ") << rep.checked << "/" << rep.samples << "  " << tree_pair_str(tp) << "\n";
        }
        out << count << " charts, " << failed << " failing\n";
        print(o, {{"n", n}, {"charts", arr}, {"failing", failed}}, out.str());
        return failed == 0 ? 0 : 1;
    }
    ChartPair c;
    if (!example.empty()) {
        if (example != "mr-morphism") throw std::invalid_argument("unknown example '" + example + "' (known: mr-morphism)");
        c = mr_morphism_example();
    } else {
        const json in = read_json_input(file, inline_json);
        c.t1 = tree_from_json(in.at("t1"));
        c.t2 = tree_from_json(in.at("t2"));
        c.s1 = in.contains("s1") ? slice_from_json(in["s1"]) : default_slice(c.t1);
        c.s2 = in.contains("s2") ? slice_from_json(in["s2"]) : default_slice(c.t2);
    }
    const auto rep = transition_check(c.t1, c.s1, c.t2, c.s2, samples, o.seed);
    json j{{"samples", rep.samples}, {"checked", rep.checked}, {"outside_first", rep.outside_first},
           {"outside_second", rep.outside_second}, {"failures", rep.failures}};
    std::ostringstream out;
    out << "round trips: " << rep.checked << " checked, " << rep.outside_first << " outside the first chart, " << rep.outside_second
        << " outside the second, " << rep.failures.size() << " failing\n";
    bool ok = rep.failures.empty();
    if (example == "mr-morphism") {
        const auto cf = mr_morphism_closed_form_check(samples, o.seed);
        j["closed_form"] = {{"checked", cf.checked}, {"failures", cf.failures}};
        out << "closed form ((1-r)/r, rs/(1-r)): " << cf.checked << " checked, " << cf.failures.size() << " failing\n";
        ok = ok && cf.failures.empty();
    }
    for (const auto& f : rep.failures) out << "  " << f << "\n";
    print(o, j, out.str());
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Strata, local models, charts and virtual Poincare polynomials of moduli of marked vertical lines"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "pretty"}));
    app.add_option("--max-size", o.max_size, "Size guard: |n|+r for enumeration (default 12), dimension for vpp (default 8)");
    app.add_option("--seed", o.seed, "Seed for randomized checks");
    app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1u, 256u));

    std::string vec, input, inline_json, example, plane;
    int dim = 0, samples = 0;

    auto* en = app.add_subcommand("enumerate", "List the tree-pairs of n with their dimensions");
    en->add_option("n", vec, "Comma-separated vector, e.g. 2,0")->required();
    auto* fv = app.add_subcommand("fvector", "Number of strata by dimension");
    fv->add_option("n", vec)->required();
    auto* vp = app.add_subcommand("vpp", "Virtual Poincare polynomial");
    vp->add_option("n", vec)->required();
    auto* vt = app.add_subcommand("vpp-table", "VPP of every n of one dimension, up to permuting entries");
    vt->add_option("d", dim)->required()->check(CLI::Range(0, 12));
    auto* lm = app.add_subcommand("check-local-model", "Check the local models of all dimension-0 tree-pairs of n");
    lm->add_option("n", vec)->required();
    lm->add_option("--samples", samples, "Randomized witness calls per model")->default_val(200);
    auto* ce = app.add_subcommand("chart-eval", "Evaluate a chart at a point");
    ce->add_option("--input", input, "JSON file");
    ce->add_option("--json", inline_json, "JSON text");
    auto* tc = app.add_subcommand("transition-check", "Randomized round trips between two charts");
    tc->add_option("--example", example, "Built-in chart pair (mr-morphism)");
    tc->add_option("--input", input, "JSON file with t1, t2 and optional slices s1, s2");
    tc->add_option("--json", inline_json, "JSON text");
    tc->add_option("--plane", plane, "Round trips of every dimension-0 plane chart of this n");
    tc->add_option("--samples", samples, "Samples")->default_val(100);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*en) return cmd_enumerate(vec, o);
        if (*fv) return cmd_fvector(vec, o);
        if (*vp) return cmd_vpp(vec, o);
        if (*vt) return cmd_vpp_table(dim, o);
        if (*lm) return cmd_check_local_model(vec, samples, o);
        if (*ce) return cmd_chart_eval(input, inline_json, o);
        if (*tc) return cmd_transition_check(example, input, inline_json, plane, samples, o);
    } catch (const json::exception& e) {
        std::cerr << "error: bad JSON input: " << e.what() << "\n";
        return 1;
    } catch (const std::logic_error& e) {
        // invalid_argument, domain_error and length_error all derive from logic_error
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
