#pragma once

#include "mlines/combinatorics.hpp"
#include "mlines/exact_poly.hpp"
#include "mlines/numbers.hpp"
#include "mlines/tree_pairs.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mlines {

using CountVector = std::vector<int>;

// r lines and factor vectors n^1..n^a: the fiber product over M_r-bar of the 2M_{n^i}-bar.
struct FiberSpec {
    int r = 1;
    std::vector<CountVector> factors;
};

inline void validate_fiber_spec(const FiberSpec& s)
{
    if (s.r < 1 || s.r > 20) throw std::invalid_argument("fiber spec: r out of range");
    for (const auto& f : s.factors) {
        if (static_cast<int>(f.size()) != s.r) throw std::invalid_argument("fiber spec: factor of the wrong length");
        for (int v : f)
            if (v < 0) throw std::invalid_argument("fiber spec: negative entry");
        if (std::accumulate(f.begin(), f.end(), 0) == 0) throw std::invalid_argument("fiber spec: zero factor");
    }
}

// p_r = sum over partitions with >= 2 parts of quotient_config_poly(#P) * prod_p p_{#p}.
inline UniPoly vpp_seam(int r)
{
    if (r < 1 || r > 20) throw std::invalid_argument("vpp_seam: r out of range");
    static std::mutex mu;
    static std::map<int, UniPoly> memo;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(r);
        if (it != memo.end()) return it->second;
    }
    UniPoly out = UniPoly::constant(1);
    if (r > 2) {
        out = UniPoly();
        std::vector<int> items(static_cast<std::size_t>(r));
        std::iota(items.begin(), items.end(), 0);
        for_each_set_partition(items, [&](const std::vector<std::vector<int>>& parts) {
            if (parts.size() < 2) return;
            UniPoly term = quotient_config_poly(static_cast<unsigned>(parts.size()));
            for (const auto& p : parts) term *= vpp_seam(static_cast<int>(p.size()));
            out += term;
        });
    }
    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(r, out);
    return out;
}

// ---------------------------------------------------------------------------
// Root data

// A block of marked points of one factor, as (line, point) pairs.
using PointBlock = std::vector<std::pair<int, int>>;

struct RootDatum {
    std::vector<LeafSet> parts;                              // partition P of the lines
    std::vector<std::vector<std::vector<PointBlock>>> blocks;  // [part][factor] -> partition of its points
};

// Count vector of a block over a part: entry j counts the block's points on the j-th line of the part.
inline CountVector block_counts(LeafSet part, const PointBlock& b)
{
    const auto lines = labels_of(part);
    CountVector v(lines.size(), 0);
    for (const auto& [j, k] : b) {
        (void)k;
        v[static_cast<std::size_t>(std::find(lines.begin(), lines.end(), j) - lines.begin())] += 1;
    }
    return v;
}

inline std::vector<RootDatum> enumerate_stable_root_data(const FiberSpec& spec)
{
    validate_fiber_spec(spec);
    std::vector<int> lines(static_cast<std::size_t>(spec.r));
    std::iota(lines.begin(), lines.end(), 1);
    std::vector<RootDatum> out;
    for_each_set_partition(lines, [&](const std::vector<std::vector<int>>& lp) {
        std::vector<LeafSet> parts;
        for (const auto& p : lp) {
            LeafSet s = 0;
            for (int j : p) s |= singleton(j);
            parts.push_back(s);
        }
        // options[part * a + i] = partitions of factor i's points over the part
        const std::size_t a = spec.factors.size();
        std::vector<std::vector<std::vector<PointBlock>>> options;
        for (LeafSet part : parts)
            for (std::size_t i = 0; i < a; ++i) {
                PointBlock pts;
                for (int j : labels_of(part))
                    for (int k = 1; k <= spec.factors[i][static_cast<std::size_t>(j - 1)]; ++k) pts.push_back({j, k});
                std::vector<std::vector<PointBlock>> opts;
                if (pts.empty()) opts.push_back({});
                else for_each_set_partition(pts, [&](const std::vector<PointBlock>& bl) { opts.push_back(bl); });
                options.push_back(std::move(opts));
            }
        std::vector<std::size_t> sizes;
        for (const auto& o : options) sizes.push_back(o.size());
        for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
            RootDatum d{parts, std::vector<std::vector<std::vector<PointBlock>>>(parts.size(), std::vector<std::vector<PointBlock>>(a))};
            for (std::size_t p = 0; p < parts.size(); ++p)
                for (std::size_t i = 0; i < a; ++i) d.blocks[p][i] = options[p * a + i][idx[p * a + i]];
            if (parts.size() == 1)
                for (std::size_t i = 0; i < a; ++i)
                    if (d.blocks[0][i].size() < 2) return;
            out.push_back(std::move(d));
        });
    });
    return out;
}

// ---------------------------------------------------------------------------
// The fiber-product recursion.
//
// State H(r, free, forced): fiber product over M_r-bar of 2M-bar factors, where
// the factors in `forced` are required to have a multi-line root component and
// the `free` ones are unrestricted. Factors with a single point are dropped
// (2M_{e_i}-bar is the base itself). A free factor either has a multi-line
// root (it becomes forced) or a single-line root whose points split into >= 2
// blocks, each a new free factor over the same base. With every factor forced,
// the root screen is multi-line for all of them and the state splits over the
// line partition P with #P >= 2.

namespace detail {

using FactorList = std::vector<CountVector>;
using VppKey = std::tuple<int, FactorList, FactorList>;

inline int weight(const CountVector& v) { return std::accumulate(v.begin(), v.end(), 0); }

inline FactorList normalized(FactorList fs)
{
    fs.erase(std::remove_if(fs.begin(), fs.end(), [](const CountVector& v) { return weight(v) <= 1; }), fs.end());
    std::sort(fs.begin(), fs.end());
    return fs;
}

// Lexicographic measure (r, sum of (|f|-1), #free); every recursive call decreases it.
inline std::tuple<int, int, int> measure(int r, const FactorList& free, const FactorList& forced)
{
    int s = 0;
    for (const auto& f : free) s += weight(f) - 1;
    for (const auto& f : forced) s += weight(f) - 1;
    return {r, s, static_cast<int>(free.size())};
}

struct VectorPartition {
    FactorList blocks;
    Int multiplicity;  // number of set partitions of the labeled points with these block counts
};

inline Int factorial(int n)
{
    Int f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Multiset partitions of n into nonzero vectors, blocks in non-increasing lex order.
inline const std::vector<VectorPartition>& vector_partitions(const CountVector& n)
{
    static std::mutex mu;
    static std::map<CountVector, std::vector<VectorPartition>> memo;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(n);
        if (it != memo.end()) return it->second;
    }
    std::vector<FactorList> raw;
    FactorList acc;
    std::function<void(const CountVector&, const CountVector&)> rec = [&](const CountVector& rem, const CountVector& bound) {
        if (weight(rem) == 0) {
            raw.push_back(acc);
            return;
        }
        CountVector v(rem.size(), 0);
        // all nonzero v <= rem componentwise with v <= bound lexicographically
        std::function<void(std::size_t)> gen = [&](std::size_t k) {
            if (k == v.size()) {
                if (weight(v) > 0 && v <= bound) {
                    CountVector next(rem);
                    for (std::size_t t = 0; t < v.size(); ++t) next[t] -= v[t];
                    acc.push_back(v);
                    rec(next, v);
                    acc.pop_back();
                }
                return;
            }
            for (int x = 0; x <= rem[k]; ++x) {
                v[k] = x;
                gen(k + 1);
            }
            v[k] = 0;
        };
        gen(0);
    };
    rec(n, n);
    Int num = 1;
    for (int x : n) num *= factorial(x);
    std::vector<VectorPartition> out;
    for (auto& blocks : raw) {
        Int den = 1;
        for (const auto& b : blocks)
            for (int x : b) den *= factorial(x);
        std::map<CountVector, int> mult;
        for (const auto& b : blocks) ++mult[b];
        for (const auto& [b, m] : mult) den *= factorial(m);
        out.push_back({std::move(blocks), num / den});
    }
    std::lock_guard<std::mutex> lock(mu);
    return memo.emplace(n, std::move(out)).first->second;
}

}  // namespace detail

// Memo table shared across calls and threads; duplicate inserts are harmless.
class VppMemo {
public:
    std::optional<UniPoly> find(const detail::VppKey& k) const
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = table_.find(k);
        if (it == table_.end()) return std::nullopt;
        return it->second;
    }
    void insert(const detail::VppKey& k, const UniPoly& v)
    {
        std::lock_guard<std::mutex> lock(mu_);
        table_.emplace(k, v);
    }
    std::size_t size() const
    {
        std::lock_guard<std::mutex> lock(mu_);
        return table_.size();
    }

private:
    mutable std::mutex mu_;
    std::map<detail::VppKey, UniPoly> table_;
};

namespace detail {

inline UniPoly vpp_state(int r, const FactorList& free, const FactorList& forced, VppMemo* memo);

inline UniPoly vpp_child(const std::tuple<int, int, int>& parent, int r, FactorList free, FactorList forced, VppMemo* memo)
{
    free = normalized(std::move(free));
    forced = normalized(std::move(forced));
    if (!(measure(r, free, forced) < parent)) throw std::logic_error("vpp recursion does not decrease its measure");
    return vpp_state(r, free, forced, memo);
}

inline UniPoly vpp_state_uncached(int r, const FactorList& free, const FactorList& forced, VppMemo* memo)
{
    const auto here = measure(r, free, forced);
    if (free.empty() && forced.empty()) return vpp_seam(r);
    if (!free.empty()) {
        const CountVector& b = free.front();
        const FactorList rest(free.begin() + 1, free.end());
        FactorList fz = forced;
        fz.push_back(b);
        UniPoly total = vpp_child(here, r, rest, fz, memo);
        for (const auto& vp : vector_partitions(b)) {
            if (vp.blocks.size() < 2) continue;
            FactorList fr = rest;
            fr.insert(fr.end(), vp.blocks.begin(), vp.blocks.end());
            total += quotient_config_poly(static_cast<unsigned>(vp.blocks.size())) * vpp_child(here, r, fr, forced, memo) * vp.multiplicity;
        }
        return total;
    }
    if (r == 1) return UniPoly();  // a multi-line root needs two lines
    UniPoly total;
    std::vector<int> lines(static_cast<std::size_t>(r));
    std::iota(lines.begin(), lines.end(), 0);
    for_each_set_partition(lines, [&](const std::vector<std::vector<int>>& parts) {
        if (parts.size() < 2) return;
        // per forced factor: choose a vector partition over every part
        struct Option {
            UniPoly heights;
            std::vector<FactorList> per_part;
        };
        std::vector<std::vector<Option>> per_factor;
        for (const auto& f : forced) {
            std::vector<std::vector<const VectorPartition*>> choices;
            static const VectorPartition empty_partition{{}, 1};
            std::vector<CountVector> restricted;
            for (const auto& p : parts) {
                CountVector v;
                for (int j : p) v.push_back(f[static_cast<std::size_t>(j)]);
                std::vector<const VectorPartition*> c;
                if (weight(v) == 0) c.push_back(&empty_partition);
                else
                    for (const auto& vp : vector_partitions(v)) c.push_back(&vp);
                choices.push_back(std::move(c));
            }
            std::vector<std::size_t> sizes;
            for (const auto& c : choices) sizes.push_back(c.size());
            std::vector<Option> opts;
            for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
                UniPoly h = UniPoly::constant(1);
                Int mult = 1;
                Option o;
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    const VectorPartition* vp = choices[k][idx[k]];
                    h *= config_poly(static_cast<unsigned>(vp->blocks.size()), 0);
                    mult *= vp->multiplicity;
                    o.per_part.push_back(vp->blocks);
                }
                if (h.coeffs().empty() || h.coeffs()[0] != 0 || (h.coeffs().size() > 1 && h.coeffs()[1] != 0))
                    throw std::logic_error("heights factor is not divisible by x^2");
                o.heights = h.divide_by_x_power(2) * mult;
                opts.push_back(std::move(o));
            });
            per_factor.push_back(std::move(opts));
        }
        std::vector<std::size_t> sizes;
        for (const auto& o : per_factor) sizes.push_back(o.size());
        for_each_product(sizes, [&](const std::vector<std::size_t>& idx) {
            UniPoly term = quotient_config_poly(static_cast<unsigned>(parts.size()));
            std::vector<FactorList> subs(parts.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const Option& o = per_factor[i][idx[i]];
                term *= o.heights;
                for (std::size_t k = 0; k < parts.size(); ++k) subs[k].insert(subs[k].end(), o.per_part[k].begin(), o.per_part[k].end());
            }
            for (std::size_t k = 0; k < parts.size(); ++k) term *= vpp_child(here, static_cast<int>(parts[k].size()), subs[k], {}, memo);
            total += term;
        });
    });
    return total;
}

inline UniPoly vpp_state(int r, const FactorList& free, const FactorList& forced, VppMemo* memo)
{
    if (!memo) return vpp_state_uncached(r, free, forced, nullptr);
    const VppKey key{r, free, forced};
    if (auto hit = memo->find(key)) return *hit;
    UniPoly v = vpp_state_uncached(r, free, forced, memo);
    memo->insert(key, v);
    return v;
}

}  // namespace detail

inline VppMemo& default_vpp_memo()
{
    static VppMemo memo;
    return memo;
}

// Pass memo = nullptr to evaluate without memoization.
inline UniPoly vpp_fiber_product(const FiberSpec& spec, VppMemo* memo)
{
    validate_fiber_spec(spec);
    return detail::vpp_state(spec.r, detail::normalized(spec.factors), {}, memo);
}

inline UniPoly vpp_fiber_product(const FiberSpec& spec) { return vpp_fiber_product(spec, &default_vpp_memo()); }

inline UniPoly vpp(const CountVector& n, VppMemo* memo)
{
    if (n.empty()) throw std::invalid_argument("vpp: empty vector");
    if (detail::weight(n) == 0) throw std::invalid_argument("vpp: n is the zero vector");
    return vpp_fiber_product(FiberSpec{static_cast<int>(n.size()), {n}}, memo);
}

inline UniPoly vpp(const CountVector& n) { return vpp(n, &default_vpp_memo()); }

// The identity as printed: one sum over stable root data of
// lines_factor(#P) * prod_i heights_i * prod_p (fiber product over part p, one factor per block).
// Kept for comparison; it misses strata whose factors have different root types.
inline UniPoly vpp_fiber_product_printed(FiberSpec spec)
{
    validate_fiber_spec(spec);
    spec.factors = detail::normalized(spec.factors);
    if (spec.factors.empty()) return vpp_seam(spec.r);
    UniPoly total;
    for (const auto& d : enumerate_stable_root_data(spec)) {
        UniPoly term = quotient_config_poly(static_cast<unsigned>(d.parts.size()));
        for (std::size_t i = 0; i < spec.factors.size(); ++i) {
            if (d.parts.size() == 1) {
                term *= quotient_config_poly(static_cast<unsigned>(d.blocks[0][i].size()));
                continue;
            }
            UniPoly h = UniPoly::constant(1);
            for (std::size_t p = 0; p < d.parts.size(); ++p) h *= config_poly(static_cast<unsigned>(d.blocks[p][i].size()), 0);
            term *= h.divide_by_x_power(2);
        }
        for (std::size_t p = 0; p < d.parts.size(); ++p) {
            FiberSpec sub{set_size(d.parts[p]), {}};
            for (const auto& per_factor : d.blocks[p])
                for (const auto& b : per_factor) sub.factors.push_back(block_counts(d.parts[p], b));
            term *= vpp_fiber_product_printed(sub);
        }
        total += term;
    }
    return total;
}

// Independent oracle: sum over all tree-pairs of the open-stratum polynomials.
inline UniPoly stratum_vpp(const TreePair& tp)
{
    UniPoly term = UniPoly::constant(1);
    for (int v : tp.seam.interior()) term *= quotient_config_poly(static_cast<unsigned>(tp.seam.num_children(v)));
    for (int a = 0; a < tp.size(); ++a) {
        if (!tp.is_component(a)) continue;
        if (tp.is_single_line(a)) {
            term *= quotient_config_poly(static_cast<unsigned>(tp.node(tp.node(a).children.front()).children.size()));
        } else {
            UniPoly h = UniPoly::constant(1);
            for (int s : tp.node(a).children) h *= config_poly(static_cast<unsigned>(tp.node(s).children.size()), 0);
            if (h.coeffs().empty() || h.coeffs()[0] != 0) throw std::logic_error("stratum_vpp: multi-line component without points");
            term *= h.divide_by_x_power(2);
        }
    }
    return term;
}

inline UniPoly vpp_by_strata(const CountVector& n)
{
    UniPoly total;
    for (const auto& tp : enumerate_tree_pairs(n)) total += stratum_vpp(tp);
    return total;
}

// Shape invariants: degree 2d, leading and constant coefficient 1, coefficients >= 0.
inline std::vector<std::string> vpp_shape_violations(const UniPoly& p, int dim)
{
    std::vector<std::string> out;
    const auto& c = p.coeffs();
    if (p.degree() != 2 * dim) out.push_back("degree " + std::to_string(p.degree()) + " instead of " + std::to_string(2 * dim));
    if (c.empty() || c.front() != 1) out.push_back("constant coefficient is not 1");
    if (c.empty() || c.back() != 1) out.push_back("leading coefficient is not 1");
    for (const auto& v : c)
        if (v < 0) {
            out.push_back("negative coefficient");
            break;
        }
    return out;
}

inline int vpp_dimension(const CountVector& n) { return detail::weight(n) + static_cast<int>(n.size()) - 3; }

struct VppRow {
    CountVector n;
    UniPoly p;
};

// One representative per permutation class (entries non-decreasing) of the
// vectors with |n| + r - 3 = d, ordered by r.
inline std::vector<CountVector> vectors_of_dimension(int d)
{
    if (d < 0 || d > 12) throw std::invalid_argument("vectors_of_dimension: d out of range");
    std::vector<CountVector> out;
    for (int r = 1; r <= d + 2; ++r) {
        const int total = d + 3 - r;
        if (total < 1) continue;
        CountVector v;
        std::function<void(int, int)> rec = [&](int left, int lo) {
            if (static_cast<int>(v.size()) == r) {
                if (left == 0) out.push_back(v);
                return;
            }
            for (int x = lo; x <= left; ++x) {
                v.push_back(x);
                rec(left - x, x);
                v.pop_back();
            }
        };
        rec(total, 0);
    }
    return out;
}

inline std::vector<VppRow> vpp_table(int d, unsigned jobs = 1)
{
    const auto ns = vectors_of_dimension(d);
    std::vector<VppRow> rows(ns.size());
    if (jobs <= 1) {
        for (std::size_t k = 0; k < ns.size(); ++k) rows[k] = {ns[k], vpp(ns[k])};
        return rows;
    }
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    std::mutex mu;
    for (unsigned w = 0; w < jobs; ++w)
        pending.push_back(std::async(std::launch::async, [&] {
            while (true) {
                std::size_t k;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= ns.size()) return;
                    k = next++;
                }
                rows[k] = {ns[k], vpp(ns[k])};
            }
        }));
    for (auto& f : pending) f.get();
    return rows;
}

}  // namespace mlines
