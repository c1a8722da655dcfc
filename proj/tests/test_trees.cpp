#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace mlines;

namespace {

StableTree tree(const char* j) { return tree_from_json(nlohmann::json::parse(j)); }

LeafSet S(std::initializer_list<int> labels)
{
    LeafSet s = 0;
    for (int l : labels) s |= singleton(l);
    return s;
}

}  // namespace

// Schroeder's fourth problem: 1, 4, 26, 236, 2752 total partitions.
TEST(Trees, CountsMatchTotalPartitions)
{
    const std::vector<std::size_t> want = {1, 1, 4, 26, 236, 2752};
    for (int r = 1; r <= 6; ++r) EXPECT_EQ(enumerate_stable_trees(r).size(), want[static_cast<std::size_t>(r - 1)]) << "r=" << r;
}

TEST(Trees, EnumerationIsDuplicateFreeAndValid)
{
    for (int r = 2; r <= 5; ++r) {
        std::set<Bracketing> seen;
        for (const auto& t : enumerate_stable_trees(r)) {
            EXPECT_TRUE(bracketing_violations(t.bracketing()).empty());
            EXPECT_TRUE(seen.insert(t.bracketing()).second);
            for (int v : t.interior()) EXPECT_GE(t.num_children(v), 2);
        }
    }
}

TEST(Trees, BracketingRoundTrip)
{
    const StableTree c = corolla(3);
    EXPECT_EQ(c.bracketing().sets, (std::set<LeafSet>{S({1}), S({2}), S({3}), S({1, 2, 3})}));
    const StableTree t = tree("[[1,2],3]");
    EXPECT_EQ(t.bracketing().sets, (std::set<LeafSet>{S({1}), S({2}), S({3}), S({1, 2}), S({1, 2, 3})}));
    for (const auto& u : enumerate_stable_trees(5)) EXPECT_EQ(bracketing_to_tree(tree_to_bracketing(u)), u);
}

TEST(Trees, BracketingViolations)
{
    EXPECT_FALSE(bracketing_violations(Bracketing{3, {S({1}), S({2}), S({3}), S({1, 2}), S({2, 3}), S({1, 2, 3})}}).empty());
    EXPECT_FALSE(bracketing_violations(Bracketing{3, {S({1}), S({2}), S({1, 2, 3})}}).empty());
}

TEST(Trees, Dimension)
{
    EXPECT_EQ(tree_dimension(corolla(5)), 3);
    EXPECT_EQ(tree_dimension(tree("[[1,2],3]")), 0);
    EXPECT_EQ(tree_dimension(tree("[[1,2],3,4]")), 1);
    for (const auto& t : enumerate_stable_trees(5))
        if (static_cast<int>(t.interior().size()) == 4) EXPECT_EQ(tree_dimension(t), 0);
}

// Independent oracle for the seam polynomial: open strata are products of
// quotient configuration spaces, one per interior vertex.
TEST(Trees, StrataSumGivesSeamPolynomial)
{
    for (int r = 2; r <= 6; ++r) {
        UniPoly sum;
        for (const auto& t : enumerate_stable_trees(r)) {
            UniPoly p = UniPoly::constant(1);
            for (int v : t.interior()) p *= quotient_config_poly(static_cast<unsigned>(t.num_children(v)));
            sum += p;
        }
        EXPECT_EQ(sum, vpp_seam(r)) << "r=" << r;
    }
}

TEST(Trees, GlueExtremes)
{
    const StableTree t = tree("[[[1,2],3],4,5]");
    GlueVector zero, one;
    for (LeafSet s : t.nonroot_interior()) {
        zero[s] = 0;
        one[s] = 1;
    }
    EXPECT_EQ(glue_tree(t, zero), t);
    EXPECT_EQ(glue_tree(t, one), corolla(5));
    GlueVector mid = zero;
    mid[S({1, 2})] = 1;
    EXPECT_EQ(glue_tree(t, mid), tree("[[1,2,3],4,5]"));
    EXPECT_TRUE(poset_leq_tree(t, glue_tree(t, mid)));
    EXPECT_FALSE(poset_leq_tree(glue_tree(t, mid), t));
    mid[S({7})] = 1;
    EXPECT_THROW(glue_tree(t, mid), std::invalid_argument);
}

TEST(Trees, GlueImageIsTheUpperInterval)
{
    const auto all = enumerate_stable_trees(5);
    for (const auto& t : all) {
        std::set<Bracketing> image, interval;
        for (const auto& g : all_glue_vectors(t)) image.insert(glue_tree(t, g).bracketing());
        for (const auto& u : all)
            if (poset_leq_tree(t, u)) interval.insert(u.bracketing());
        EXPECT_EQ(image, interval) << t.str();
        EXPECT_EQ(image.size(), all_glue_vectors(t).size());
    }
}

TEST(Trees, PosetIsPartialOrder)
{
    const auto all = enumerate_stable_trees(4);
    for (const auto& a : all) {
        EXPECT_TRUE(poset_leq_tree(a, a));
        EXPECT_TRUE(poset_leq_tree(a, corolla(4)));
        for (const auto& b : all) {
            if (poset_leq_tree(a, b) && poset_leq_tree(b, a)) EXPECT_EQ(a, b);
            for (const auto& c : all)
                if (poset_leq_tree(a, b) && poset_leq_tree(b, c)) EXPECT_TRUE(poset_leq_tree(a, c));
        }
    }
}

TEST(Slices, DefaultAndPushforward)
{
    const Slice d = default_slice(corolla(3));
    EXPECT_EQ(d.s.at(S({1, 2, 3})), std::make_pair(S({1}), S({2})));
    const StableTree t = tree("[[1,2],[3,4]]");
    const Slice sl = default_slice(t);
    GlueVector zero{{S({1, 2}), 0}, {S({3, 4}), 0}};
    EXPECT_EQ(pushforward_slice(t, sl, zero), sl);
    GlueVector full{{S({1, 2}), 1}, {S({3, 4}), 1}};
    const Slice p = pushforward_slice(t, sl, full);
    // s0 of the root is {1,2}; following s0 into it reaches leaf 1, and {3,4} gives leaf 3
    EXPECT_EQ(p.s.at(S({1, 2, 3, 4})), std::make_pair(S({1}), S({3})));
    EXPECT_TRUE(slice_violations(corolla(4), p).empty());
}

TEST(Slices, Violations)
{
    const StableTree t = tree("[[1,2],3]");
    Slice sl = default_slice(t);
    EXPECT_TRUE(slice_violations(t, sl).empty());
    sl.s[S({1, 2, 3})] = {S({3}), S({3})};
    EXPECT_FALSE(slice_violations(t, sl).empty());
    sl.s[S({1, 2, 3})] = {S({1}), S({3})};
    EXPECT_FALSE(slice_violations(t, sl).empty());
}

TEST(Trees, JsonRoundTrip)
{
    for (const auto& t : enumerate_stable_trees(4)) {
        EXPECT_EQ(tree_from_json(tree_to_json(t)), t);
        EXPECT_EQ(slice_from_json(slice_to_json(default_slice(t))), default_slice(t));
    }
    EXPECT_ANY_THROW(tree_from_json(nlohmann::json::parse("[1,[2]]")));
    EXPECT_ANY_THROW(tree_from_json(nlohmann::json::parse("[1,1,2]")));
}
