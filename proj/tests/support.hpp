#pragma once

#include "mlines/mlines.hpp"

#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace mlines::test {

// 1 + c1 x^2 + c2 x^4 + ... from the even coefficients.
inline UniPoly even_poly(std::initializer_list<int> cs)
{
    std::vector<Int> c;
    for (int v : cs) {
        if (!c.empty()) c.push_back(0);
        c.push_back(v);
    }
    return UniPoly(c);
}

// Every nonzero n with |n| + r <= max_size.
inline std::vector<std::vector<int>> vectors_up_to(int max_size)
{
    std::vector<std::vector<int>> out;
    for (int r = 1; r < max_size; ++r) {
        std::vector<int> n(static_cast<std::size_t>(r), 0);
        std::function<void(int, int)> rec = [&](int i, int left) {
            if (i == r) {
                if (total_points(n) > 0) out.push_back(n);
                return;
            }
            for (int v = 0; v <= left; ++v) {
                n[static_cast<std::size_t>(i)] = v;
                rec(i + 1, left - v);
            }
        };
        rec(0, max_size - r);
    }
    return out;
}

struct Table1Row {
    std::vector<int> n;
    UniPoly p;
};

inline std::vector<Table1Row> table1()
{
    return {
        {{1, 2}, even_poly({1, 4, 1})},
        {{0, 1, 1}, even_poly({1, 3, 1})},
        {{0, 0, 2}, even_poly({1, 4, 1})},
        {{0, 0, 0, 1}, even_poly({1, 5, 1})},
        {{4}, even_poly({1, 5, 1})},
        {{0, 3}, even_poly({1, 5, 1})},
        {{0, 0, 0, 2}, even_poly({1, 12, 12, 1})},
        {{1, 3}, even_poly({1, 12, 15, 1})},
        {{0, 1, 2}, even_poly({1, 10, 10, 1})},
        {{2, 2}, even_poly({1, 11, 14, 1})},
        {{5}, even_poly({1, 16, 16, 1})},
        {{0, 0, 1, 1}, even_poly({1, 9, 9, 1})},
        {{0, 4}, even_poly({1, 16, 19, 1})},
        {{0, 0, 0, 0, 1}, even_poly({1, 16, 16, 1})},
        {{1, 1, 1}, even_poly({1, 8, 8, 1})},
        {{0, 0, 3}, even_poly({1, 14, 14, 1})},
    };
}

// Independent feasibility oracle: shortest paths with negative-cycle detection.
// Real feasibility of a difference system; no integrality involved.
inline bool bellman_ford_feasible(const DiffConstraintSystem& sys)
{
    struct Edge {
        int u, v;
        Int w;
    };
    const int zero = sys.n;  // reference node fixed at value 0
    std::vector<Edge> edges;
    // x_v <= x_u + w
    for (const auto& [ij, a] : sys.diff) edges.push_back({ij.first, ij.second, -a});
    for (int i = 0; i < sys.n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (sys.lower[k]) edges.push_back({i, zero, -*sys.lower[k]});
        if (sys.upper[k]) edges.push_back({zero, i, *sys.upper[k]});
    }
    std::vector<Int> dist(static_cast<std::size_t>(sys.n + 1), 0);
    for (int pass = 0; pass <= sys.n + 1; ++pass) {
        bool changed = false;
        for (const auto& e : edges) {
            const Int cand = dist[static_cast<std::size_t>(e.u)] + e.w;
            if (cand < dist[static_cast<std::size_t>(e.v)]) {
                dist[static_cast<std::size_t>(e.v)] = cand;
                changed = true;
            }
        }
        if (!changed) return true;
    }
    return false;
}

// Exhaustive integer search over [lo, hi]^n.
inline std::optional<IntVec> box_search(const DiffConstraintSystem& sys, int lo, int hi)
{
    IntVec x(static_cast<std::size_t>(sys.n), lo);
    while (true) {
        if (sys.satisfied_by(x)) return x;
        std::size_t k = 0;
        while (k < x.size() && x[k] == hi) x[k++] = lo;
        if (k == x.size()) return std::nullopt;
        x[k] += 1;
    }
}

// Random system with n <= 5 and all constants in [-4, 4]; box bounds always present
// when `full_box`, otherwise each present with probability 0.7.
inline DiffConstraintSystem random_system(std::mt19937_64& rng, bool full_box)
{
    std::uniform_int_distribution<int> nd(1, 5), cd(-4, 4);
    std::bernoulli_distribution pair(0.5), bound(0.7);
    DiffConstraintSystem sys(nd(rng));
    for (int i = 0; i < sys.n; ++i) {
        int b = cd(rng), c = cd(rng);
        if (full_box && b > c && pair(rng)) std::swap(b, c);
        if (full_box || bound(rng)) sys.add_lower(i, b);
        if (full_box || bound(rng)) sys.add_upper(i, c);
        for (int j = i + 1; j < sys.n; ++j)
            if (pair(rng)) sys.add_difference(i, j, cd(rng));
    }
    return sys;
}

}  // namespace mlines::test
