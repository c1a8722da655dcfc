#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

namespace mlines {

using LeafSet = std::uint64_t;

inline LeafSet singleton(int label) { return LeafSet{1} << (label - 1); }
inline LeafSet full_set(int r) { return r >= 64 ? ~LeafSet{0} : (LeafSet{1} << r) - 1; }
inline int min_label(LeafSet s) { return std::countr_zero(s) + 1; }
inline int set_size(LeafSet s) { return std::popcount(s); }
inline bool is_subset(LeafSet a, LeafSet b) { return (a & ~b) == 0; }

inline std::vector<int> labels_of(LeafSet s)
{
    std::vector<int> out;
    while (s) {
        out.push_back(std::countr_zero(s) + 1);
        s &= s - 1;
    }
    return out;
}

// Calls f(blocks) for every set partition of items; blocks keep the items'
// relative order and appear ordered by their first item.
template <class T, class F>
void for_each_set_partition(const std::vector<T>& items, F&& f)
{
    std::vector<std::vector<T>> blocks;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == items.size()) {
            f(static_cast<const std::vector<std::vector<T>>&>(blocks));
            return;
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            blocks[b].push_back(items[i]);
            rec(i + 1);
            blocks[b].pop_back();
        }
        blocks.push_back({items[i]});
        rec(i + 1);
        blocks.pop_back();
    };
    rec(0);
}

template <class T>
std::vector<std::vector<std::vector<T>>> set_partitions(const std::vector<T>& items)
{
    std::vector<std::vector<std::vector<T>>> out;
    for_each_set_partition(items, [&](const auto& p) { out.push_back(p); });
    return out;
}

// Set partitions of the bits of a mask, as lists of submasks.
inline std::vector<std::vector<LeafSet>> mask_partitions(LeafSet s)
{
    std::vector<LeafSet> bits;
    for (int l : labels_of(s)) bits.push_back(singleton(l));
    std::vector<std::vector<LeafSet>> out;
    for_each_set_partition(bits, [&](const std::vector<std::vector<LeafSet>>& p) {
        std::vector<LeafSet> blocks;
        for (const auto& b : p) {
            LeafSet m = 0;
            for (auto x : b) m |= x;
            blocks.push_back(m);
        }
        out.push_back(std::move(blocks));
    });
    return out;
}

// Cartesian product of choice lists; calls f with one index per list.
template <class F>
void for_each_product(const std::vector<std::size_t>& sizes, F&& f)
{
    std::vector<std::size_t> idx(sizes.size(), 0);
    for (auto s : sizes)
        if (s == 0) return;
    while (true) {
        f(static_cast<const std::vector<std::size_t>&>(idx));
        std::size_t k = 0;
        while (k < idx.size()) {
            if (++idx[k] < sizes[k]) break;
            idx[k] = 0;
            ++k;
        }
        if (k == idx.size()) return;
    }
}

}  // namespace mlines
