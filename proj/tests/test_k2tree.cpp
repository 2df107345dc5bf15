#include <gtest/gtest.h>

#include "brel/datagen.hpp"
#include "brel/k2tree.hpp"
#include "support.hpp"

using namespace brel;
using namespace brel::test;

namespace {

std::string s(const RankBitVector& v) { return v.bits().to_string(); }

PlainRelation one_pair(NodeId n, NodeId x, NodeId y) { return PlainRelation::from_pairs(n, {{x, y}}); }

} // namespace

// M1 as a matrix, rows top to bottom:
//   1 1 0 0
//   0 0 1 0
//   0 0 0 0
//   0 0 0 1
// Level 1 quadrants TL, TR, BL, BR hold 3, 1, 0, 1 ones  -> T = 1 1 0 1.
// Level 2 cells of TL (0,0) (0,1) (1,0) (1,1)            -> 1 1 0 0
//           of TR (0,2) (0,3) (1,2) (1,3)                -> 0 0 1 0
//           of BR (2,2) (2,3) (3,2) (3,3)                -> 0 0 0 1
TEST(K2Tree, BuildM1) {
    auto t = K2Tree::build(m1());
    EXPECT_EQ(s(t.tree_bits()), "1101");
    EXPECT_EQ(s(t.leaf_bits()), "110000100001");
    EXPECT_EQ(t.height(), 2u);
    EXPECT_EQ(t.n_padded(), 4u);
}

TEST(K2Tree, BuildSmallFixtures) {
    auto empty = K2Tree::build(PlainRelation(4));
    EXPECT_EQ(s(empty.tree_bits()), "0000");
    EXPECT_EQ(empty.leaf_bits().size(), 0u);

    auto corner = K2Tree::build(one_pair(4, 3, 3));
    EXPECT_EQ(s(corner.tree_bits()), "0001");
    EXPECT_EQ(s(corner.leaf_bits()), "0001");

    auto none = K2Tree::build(PlainRelation(0));
    EXPECT_EQ(s(none.tree_bits()), "0000");
}

TEST(K2TreeOnes, BuildFixtures) {
    auto full = K2TreeOnes::build(PlainRelation::full(4));
    EXPECT_EQ(s(full.tree_bits()), "0000");
    EXPECT_EQ(s(full.uniform_bits()), "1111");
    EXPECT_EQ(full.leaf_bits().size(), 0u);

    auto empty = K2TreeOnes::build(PlainRelation(4));
    EXPECT_EQ(s(empty.tree_bits()), "0000");
    EXPECT_EQ(s(empty.uniform_bits()), "0000");

    // M1 has no all-ones 2x2 block: same topology, every zero flagged 0.
    auto ones = K2TreeOnes::build(m1());
    auto plain = K2Tree::build(m1());
    EXPECT_EQ(ones.tree_bits(), plain.tree_bits());
    EXPECT_EQ(ones.leaf_bits(), plain.leaf_bits());
    EXPECT_EQ(s(ones.uniform_bits()), std::string(1 + 8, '0'));
}

TEST(K2Tree, QueryExamples) {
    auto t = K2Tree::build(m1());
    EXPECT_EQ(t.successors(0), (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(t.range_neighborhood({0, 0, 1, 2}), m1().range_neighborhood({0, 0, 1, 2}));
    EXPECT_EQ(K2TreeOnes::build(PlainRelation::full(4)).predecessors(2), (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_TRUE(t.is_related(3, 3));
    EXPECT_FALSE(t.is_related(2, 2));
}

TEST(K2Tree, PaddingCellsAreOutsideTheDomain) {
    auto r = PlainRelation::from_pairs(3, {{2, 2}});
    auto t = K2Tree::build(r);
    EXPECT_EQ(t.n_padded(), 4u);
    EXPECT_THROW(t.is_related(3, 0), ArgumentError);
    EXPECT_THROW(t.successors(3), ArgumentError);
    EXPECT_THROW(t.predecessors(3), ArgumentError);
    EXPECT_THROW(t.range_neighborhood({0, 0, 3, 2}), ArgumentError);
    EXPECT_THROW(K2TreeOnes::build(r).is_related(0, 3), ArgumentError);
}

TEST(K2Tree, SetOperationExamples) {
    auto a = K2Tree::build(m1()), b = K2Tree::build(m2());
    EXPECT_EQ(set_operation(SetOp::intersection, a, b), K2Tree::build(PlainRelation::from_pairs(4, {{0, 1}, {3, 3}})));
    EXPECT_EQ(set_operation(SetOp::union_, a, K2Tree::build(PlainRelation(4))), a);
    EXPECT_EQ(set_operation(SetOp::symmetric_difference, a, a), K2Tree::build(PlainRelation(4)));
    EXPECT_THROW(set_operation(SetOp::union_, a, K2Tree::build(PlainRelation(5))), DimensionMismatch);
}

TEST(K2Tree, SizeAndSerialization) {
    // magic 4 + n 4 + n_padded 4 + height 1, then 4 bits of T in one byte
    EXPECT_EQ(K2Tree::build(PlainRelation(4)).size_in_bytes(), 13u + 1);
    auto t = K2Tree::build(m1());
    EXPECT_EQ(t.size_in_bytes(), 13u + 1 + 2);
    EXPECT_EQ(K2Tree::deserialize(t.serialize()), t);
    auto o = K2TreeOnes::build(m1());
    EXPECT_EQ(o.size_in_bytes(), 13u + 1 + 2 + 2);
    EXPECT_EQ(K2TreeOnes::deserialize(o.serialize()), o);

    auto bytes = t.serialize();
    EXPECT_EQ(bytes.substr(0, 4), "K2T1");
    EXPECT_EQ(o.serialize().substr(0, 4), "K2O1");
    EXPECT_THROW(K2Tree::deserialize(bytes.substr(0, bytes.size() - 3)), FormatError);
    EXPECT_THROW(K2Tree::deserialize(bytes + "z"), FormatError);
    EXPECT_THROW(K2TreeOnes::deserialize(bytes), FormatError);
    auto wrong_height = bytes;
    wrong_height[12] = 3;
    EXPECT_THROW(K2Tree::deserialize(wrong_height), FormatError);
    // L truncated by one cell: level sizes no longer match T
    auto shorter = K2Tree::build(m1()).serialize();
    shorter[13 + 16] = 16;
    EXPECT_THROW(K2Tree::deserialize(shorter), FormatError);
}

TEST(K2Tree, MatchesNaiveLevelOrderBuild) {
    Rng rng(31);
    const double densities[] = {0.001, 0.01, 0.1, 0.5, 0.95};
    for (int iter = 0; iter < 300; ++iter) {
        NodeId n = static_cast<NodeId>(rng.below(70));
        auto r = random_relation(rng, n, densities[iter % 5]);
        auto plain = K2Tree::build(r);
        auto ones = K2TreeOnes::build(r);
        auto ref = naive_k2(r, false);
        auto ref1 = naive_k2(r, true);
        ASSERT_EQ(s(plain.tree_bits()), ref.t) << "n " << n;
        ASSERT_EQ(s(plain.leaf_bits()), ref.l);
        ASSERT_EQ(s(ones.tree_bits()), ref1.t);
        ASSERT_EQ(s(ones.leaf_bits()), ref1.l);
        ASSERT_EQ(s(ones.uniform_bits()), ref1.u);
        // level arity
        for (unsigned l = 1; l < plain.height(); ++l)
            ASSERT_EQ(plain.level_bits(l + 1).size(), 4 * plain.level_bits(l).count_ones());
        ASSERT_EQ(ones.uniform_bits().size(), (ones.tree_bits().size() - ones.tree_bits().count_ones()) +
                                                  (ones.leaf_bits().size() - ones.leaf_bits().count_ones()));
        ASSERT_EQ(plain.decode(), r);
        ASSERT_EQ(ones.decode(), r);
        ASSERT_EQ(K2Tree::deserialize(plain.serialize()), plain);
        ASSERT_EQ(K2TreeOnes::deserialize(ones.serialize()), ones);
    }
}

template <typename Tree>
void check_queries_against_oracle(std::uint64_t seed) {
    Rng rng(seed);
    const double densities[] = {0.001, 0.01, 0.1, 0.5, 0.9};
    for (int iter = 0; iter < 200; ++iter) {
        NodeId n = 1 + static_cast<NodeId>(rng.below(64));
        auto r = random_relation(rng, n, densities[iter % 5]);
        auto t = Tree::build(r);
        for (int probe = 0; probe < 50; ++probe) {
            NodeId x = static_cast<NodeId>(rng.below(n)), y = static_cast<NodeId>(rng.below(n));
            ASSERT_EQ(t.is_related(x, y), r.is_related(x, y));
            ASSERT_EQ(t.successors(x), r.successors(x));
            ASSERT_EQ(t.predecessors(y), r.predecessors(y));
            NodeId x2 = x + static_cast<NodeId>(rng.below(n - x)), y2 = y + static_cast<NodeId>(rng.below(n - y));
            RangeQuery q{x, y, x2, y2};
            ASSERT_EQ(t.range_neighborhood(q), r.range_neighborhood(q));
        }
    }
}

TEST(K2Tree, QueriesMatchOracle) { check_queries_against_oracle<K2Tree>(41); }
TEST(K2TreeOnes, QueriesMatchOracle) { check_queries_against_oracle<K2TreeOnes>(42); }

template <typename Tree>
void check_set_operations_canonical(std::uint64_t seed) {
    Rng rng(seed);
    const double densities[] = {0.001, 0.01, 0.1, 0.5, 0.9};
    for (int iter = 0; iter < 200; ++iter) {
        NodeId n = static_cast<NodeId>(rng.below(65));
        auto a = random_relation(rng, n, densities[iter % 5]);
        auto b = random_relation(rng, n, densities[(iter / 5) % 5]);
        auto ta = Tree::build(a), tb = Tree::build(b);
        for (auto op : all_set_ops) {
            auto expected = relation_of(n, brute_set_op(op, pairs_of(a), pairs_of(b)));
            auto got = set_operation(op, ta, tb);
            ASSERT_EQ(got, Tree::build(expected)) << to_string(op) << " iter " << iter;
            ASSERT_EQ(got.decode(), expected);
        }
        ASSERT_EQ(set_operation(SetOp::union_, ta, ta), ta);
        ASSERT_EQ(set_operation(SetOp::intersection, ta, ta), ta);
    }
}

TEST(K2Tree, SetOperationsAreCanonical) { check_set_operations_canonical<K2Tree>(51); }
TEST(K2TreeOnes, SetOperationsAreCanonical) { check_set_operations_canonical<K2TreeOnes>(52); }

TEST(K2TreeOnes, UnionCanFillTheMatrix) {
    // complementary halves union to a full matrix, which collapses to all-uniform
    std::vector<Pair> top, bottom;
    for (NodeId x = 0; x < 8; ++x)
        for (NodeId y = 0; y < 8; ++y)
            (x < 4 ? top : bottom).push_back({x, y});
    auto a = K2TreeOnes::build(PlainRelation::from_pairs(8, top));
    auto b = K2TreeOnes::build(PlainRelation::from_pairs(8, bottom));
    auto u = set_operation(SetOp::union_, a, b);
    EXPECT_EQ(u, K2TreeOnes::build(PlainRelation::full(8)));
    EXPECT_EQ(s(u.tree_bits()), "0000");
    EXPECT_EQ(s(u.uniform_bits()), "1111");
}

TEST(K2TreeOnes, SmallerOnDenseBlocks) {
    for (NodeId n : {4u, 16u, 64u}) {
        auto full = PlainRelation::full(n);
        EXPECT_LE(K2TreeOnes::build(full).size_in_bytes(), K2Tree::build(full).size_in_bytes());
    }
    std::vector<Pair> quadrant;
    for (NodeId x = 0; x < 32; ++x)
        for (NodeId y = 0; y < 32; ++y)
            quadrant.push_back({x, y});
    quadrant.push_back({40, 50});
    auto r = PlainRelation::from_pairs(64, quadrant);
    EXPECT_LT(K2TreeOnes::build(r).size_in_bytes(), K2Tree::build(r).size_in_bytes());
}

TEST(K2Tree, ClusteredDataCompressesBelowThePlainFile) {
    GenSpec s;
    s.model = Model::clustered;
    s.n = 4096;
    s.m = 3355;
    s.clusters = 16;
    auto r = generate(s);
    const auto plain = to_bytes(r).size();
    EXPECT_LT(K2Tree::build(r).size_in_bytes(), plain);
    EXPECT_LT(K2TreeOnes::build(r).size_in_bytes(), plain);
}
