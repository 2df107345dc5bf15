#include <gtest/gtest.h>

#include "brel/brwt.hpp"
#include "support.hpp"

using namespace brel;
using namespace brel::test;

namespace {

std::string s(const RankBitVector& v) { return v.bits().to_string(); }

std::vector<std::string> levels_of(const Brwt& t) {
    std::vector<std::string> out;
    for (unsigned l = 0; l < t.level_count(); ++l)
        out.push_back(s(t.level(l)));
    return out;
}

// Children widths must equal the popcounts of their parent halves.
void expect_width_propagation(const Brwt& t) {
    auto nodes = t.nodes();
    ASSERT_EQ(nodes[0].size(), 1u);
    EXPECT_EQ(nodes[0][0].width, t.n());
    for (unsigned l = 0; l + 1 < t.level_count(); ++l) {
        std::uint64_t expected_children = 0;
        for (const auto& node : nodes[l]) {
            for (int half = 0; half < 2; ++half) {
                std::uint64_t ones = 0;
                for (std::uint64_t c = 0; c < node.width; ++c)
                    ones += t.level(l)[node.start + half * node.width + c];
                if (!ones)
                    continue;
                ++expected_children;
                bool found = false;
                for (const auto& child : nodes[l + 1])
                    if (child.heap == 2 * node.heap + 1 + half) {
                        EXPECT_EQ(child.width, ones);
                        found = true;
                    }
                EXPECT_TRUE(found);
            }
        }
        EXPECT_EQ(nodes[l + 1].size(), expected_children);
    }
}

} // namespace

// M1 rows 0..3 with two leaves of two rows each:
//   root, rows {0,1} vs {2,3}, columns 0..3:
//     b_l: col 0 (row 0) 1, col 1 (row 0) 1, col 2 (row 1) 1, col 3 0  -> 1110
//     b_r: only (3,3) lies below                                   -> 0001
//   left leaf, columns {0,1,2}: row 0 has 0,1; row 1 has 2  -> b_l 110, b_r 001
//   right leaf, column {3}: row 2 empty, row 3 has 3          -> b_l 0,   b_r 1
TEST(Brwt, BuildM1) {
    auto t = Brwt::build(m1());
    ASSERT_EQ(t.level_count(), 2u);
    EXPECT_EQ(s(t.level(0)), "1110" "0001");
    EXPECT_EQ(s(t.level(1)), "110" "001" "0" "1");
    auto nodes = t.nodes();
    ASSERT_EQ(nodes[1].size(), 2u);
    EXPECT_EQ(nodes[1][0].width, 3u);
    EXPECT_EQ(nodes[1][1].width, 1u);
}

TEST(Brwt, BuildSmallFixtures) {
    auto empty = Brwt::build(PlainRelation(4));
    EXPECT_EQ(s(empty.level(0)), "00000000");
    EXPECT_EQ(empty.level(1).size(), 0u);
    EXPECT_EQ(empty.nodes()[1].size(), 0u);

    auto full = Brwt::build(PlainRelation::full(2));
    ASSERT_EQ(full.level_count(), 1u);
    EXPECT_EQ(s(full.level(0)), "1111");

    auto none = Brwt::build(PlainRelation(0));
    EXPECT_EQ(none.level_count(), 1u);
    EXPECT_EQ(none.decode(), PlainRelation(0));
}

TEST(Brwt, QueryExamples) {
    auto t = Brwt::build(m1());
    EXPECT_EQ(t.predecessors(1), (std::vector<NodeId>{0}));
    EXPECT_TRUE(t.is_related(3, 3));
    EXPECT_TRUE(Brwt::build(PlainRelation(4)).successors(2).empty());
    EXPECT_THROW(t.is_related(4, 0), ArgumentError);
    EXPECT_THROW(t.predecessors(4), ArgumentError);
    EXPECT_THROW(t.range_neighborhood({1, 0, 0, 0}), ArgumentError);
}

TEST(Brwt, MatchesNaiveBuildAndOracle) {
    Rng rng(61);
    const double densities[] = {0.001, 0.01, 0.1, 0.5, 0.95};
    for (int iter = 0; iter < 250; ++iter) {
        NodeId n = static_cast<NodeId>(rng.below(70));
        auto r = random_relation(rng, n, densities[iter % 5]);
        auto t = Brwt::build(r);
        ASSERT_EQ(levels_of(t), naive_brwt(r)) << "n " << n;
        expect_width_propagation(t);
        ASSERT_EQ(t.decode(), r);
        ASSERT_EQ(Brwt::deserialize(t.serialize()), t);
        for (int probe = 0; n > 0 && probe < 50; ++probe) {
            NodeId x = static_cast<NodeId>(rng.below(n)), y = static_cast<NodeId>(rng.below(n));
            ASSERT_EQ(t.is_related(x, y), r.is_related(x, y));
            ASSERT_EQ(t.successors(x), r.successors(x));
            ASSERT_EQ(t.predecessors(y), r.predecessors(y));
            NodeId x2 = x + static_cast<NodeId>(rng.below(n - x)), y2 = y + static_cast<NodeId>(rng.below(n - y));
            ASSERT_EQ(t.range_neighborhood({x, y, x2, y2}), r.range_neighborhood({x, y, x2, y2}));
        }
    }
}

TEST(Brwt, SetOperationExamples) {
    auto a = Brwt::build(m1()), b = Brwt::build(m2()), e = Brwt::build(PlainRelation(4));
    auto rebuilt = [](std::initializer_list<std::pair<NodeId, NodeId>> l) {
        PairSet ps(l.begin(), l.end());
        return Brwt::build(relation_of(4, ps));
    };
    EXPECT_EQ(union_brwt(a, b), Brwt::build(set_operation(SetOp::union_, m1(), m2())));
    EXPECT_EQ(union_brwt(a, e), a);
    EXPECT_EQ(union_brwt(a, a), a);
    for (auto nav : {Navigation::cursor, Navigation::rank}) {
        EXPECT_EQ(intersect_brwt(a, b, nav), rebuilt({{0, 1}, {3, 3}}));
        EXPECT_EQ(intersect_brwt(a, a, nav), a);
        EXPECT_EQ(intersect_brwt(a, e, nav), e);
        EXPECT_EQ(difference_brwt(a, b, nav), rebuilt({{0, 0}, {1, 2}}));
        EXPECT_EQ(difference_brwt(a, a, nav), e);
        EXPECT_EQ(difference_brwt(a, e, nav), a);
        EXPECT_EQ(symdiff_brwt(a, b, nav), rebuilt({{0, 0}, {1, 2}, {2, 2}, {3, 0}}));
        EXPECT_EQ(symdiff_brwt(a, a, nav), e);
        EXPECT_EQ(symdiff_brwt(a, e, nav), a);
    }
    auto other = Brwt::build(PlainRelation(5));
    EXPECT_THROW(union_brwt(a, other), DimensionMismatch);
    EXPECT_THROW(intersect_brwt(a, other), DimensionMismatch);
    EXPECT_THROW(difference_brwt(a, other, Navigation::rank), DimensionMismatch);
    // same padded height, different n
    EXPECT_THROW(symdiff_brwt(a, Brwt::build(PlainRelation(3))), DimensionMismatch);
}

TEST(Brwt, SetOperationsCanonicalAndNavigationAgnostic) {
    Rng rng(71);
    const double densities[] = {0.001, 0.01, 0.1, 0.5, 0.9};
    for (int iter = 0; iter < 250; ++iter) {
        NodeId n = static_cast<NodeId>(rng.below(65));
        auto a = random_relation(rng, n, densities[iter % 5]);
        auto b = random_relation(rng, n, densities[(iter / 5) % 5]);
        auto ta = Brwt::build(a), tb = Brwt::build(b);
        for (auto op : all_set_ops) {
            auto expected = relation_of(n, brute_set_op(op, pairs_of(a), pairs_of(b)));
            auto cursor = set_operation(op, ta, tb, Navigation::cursor);
            auto rank = set_operation(op, ta, tb, Navigation::rank);
            ASSERT_EQ(cursor, Brwt::build(expected)) << to_string(op) << " iter " << iter;
            ASSERT_EQ(rank, cursor);
            ASSERT_EQ(cursor.decode(), expected);
            expect_width_propagation(cursor);
            if (op != SetOp::union_) {
                CursorTable ca, cb;
                traced_set_operation(op, ta, tb, ca, cb);
                ASSERT_TRUE(ca.conserved(ta)) << to_string(op) << " iter " << iter;
                ASSERT_TRUE(cb.conserved(tb)) << to_string(op) << " iter " << iter;
            }
        }
        // symdiff(a, b) = union(diff(a, b), diff(b, a))
        ASSERT_EQ(symdiff_brwt(ta, tb), union_brwt(difference_brwt(ta, tb), difference_brwt(tb, ta)));
        ASSERT_EQ(union_brwt(ta, tb), union_brwt(tb, ta));
    }
}

TEST(CursorTable, SlotsAndInitialPositions) {
    auto t = Brwt::build(m1());
    CursorTable c(t);
    // heap nodes 0, 1, 2 -> slot pairs at ids 0, 2, 4
    ASSERT_EQ(c.slot_count(), 6u);
    EXPECT_EQ(c.memory_bytes(), 6 * sizeof(CursorTable::Cursor));
    EXPECT_EQ(c[0], 0u);
    EXPECT_EQ(c[1], 4u);
    EXPECT_EQ(c[2], 0u);
    EXPECT_EQ(c[3], 3u);
    EXPECT_EQ(c[4], 6u);
    EXPECT_EQ(c[5], 7u);
    EXPECT_FALSE(c.conserved(t));
}

TEST(CursorTable, SkipOnLeafAdvancesBothCursorsOnly) {
    auto t = Brwt::build(m1());
    CursorTable c(t);
    skip(t, c, 4); // right leaf, its only column
    EXPECT_EQ(c[4], 7u);
    EXPECT_EQ(c[5], 8u);
    EXPECT_EQ(c[0], 0u);
    EXPECT_EQ(c[2], 0u);
    EXPECT_THROW(skip(t, c, 4), std::logic_error);
}

TEST(CursorTable, SkipOnRootFollowsOnlyTheSetHalf) {
    auto t = Brwt::build(m1());
    CursorTable c(t);
    // root column 0 has b_l = 1, b_r = 0
    skip(t, c, 0);
    EXPECT_EQ(c[0], 1u);
    EXPECT_EQ(c[1], 5u);
    EXPECT_EQ(c[2], 1u); // left child advanced
    EXPECT_EQ(c[3], 4u);
    EXPECT_EQ(c[4], 6u); // right child untouched
    EXPECT_EQ(c[5], 7u);
}

TEST(CursorTable, SkippingEveryRootColumnConservesCursors) {
    Rng rng(81);
    for (int iter = 0; iter < 100; ++iter) {
        auto r = random_relation(rng, static_cast<NodeId>(1 + rng.below(60)), 0.1);
        auto t = Brwt::build(r);
        CursorTable c(t);
        for (NodeId col = 0; col < r.n(); ++col)
            skip(t, c, 0);
        ASSERT_TRUE(c.conserved(t));
    }
    auto t = Brwt::build(m1());
    CursorTable c(t);
    EXPECT_THROW(skip(t, c, 1), ArgumentError);
    EXPECT_THROW(skip(t, c, 6), ArgumentError);
}

TEST(CursorTable, CopyOnSingleLeafEmitsItsTwoBits) {
    auto t = Brwt::build(PlainRelation::from_pairs(2, {{1, 0}, {0, 1}}));
    CursorTable c(t);
    BrwtAssembler out(2, 2, {2});
    copy(t, c, out, 0);
    EXPECT_EQ(out.node_bits(0), "0" "1");
    copy(t, c, out, 0);
    EXPECT_EQ(out.node_bits(0), "01" "10");
    EXPECT_EQ(out.assemble(), t);
}

TEST(CursorTable, CopyingEveryColumnReproducesTheTree) {
    Rng rng(91);
    std::vector<PlainRelation> cases{m1()};
    for (int i = 0; i < 100; ++i)
        cases.push_back(random_relation(rng, static_cast<NodeId>(1 + rng.below(60)), i % 2 ? 0.05 : 0.4));
    for (const auto& r : cases) {
        auto t = Brwt::build(r);
        CursorTable c(t);
        auto widths = t.heap_widths();
        widths[0] = r.n();
        BrwtAssembler out(r.n(), t.n_rows(), widths);
        for (NodeId col = 0; col < r.n(); ++col)
            copy(t, c, out, 0);
        auto copied = out.assemble();
        ASSERT_EQ(copied, t);
        ASSERT_EQ(copied.decode(), r);
        ASSERT_TRUE(c.conserved(t));
    }
}

TEST(Brwt, SizeAndSerialization) {
    auto t = Brwt::build(m1());
    // header 14; level 0: count 4 + one width 4 + 1 byte; level 1: 4 + 8 + 1
    EXPECT_EQ(t.size_in_bytes(), 14u + 9 + 13);
    auto bytes = t.serialize();
    EXPECT_EQ(bytes.substr(0, 4), "BRWT");
    EXPECT_EQ(Brwt::deserialize(bytes), t);
    EXPECT_THROW(Brwt::deserialize(bytes.substr(0, bytes.size() - 1)), FormatError);
    EXPECT_THROW(Brwt::deserialize(bytes + std::string(1, '\0')), FormatError);
    auto bad_width = bytes;
    bad_width[18] = 3; // root width
    EXPECT_THROW(Brwt::deserialize(bad_width), FormatError);
    auto bad_rows = bytes;
    bad_rows[8] = 8;
    EXPECT_THROW(Brwt::deserialize(bad_rows), FormatError);
    EXPECT_THROW(Brwt::deserialize("K2T1"), FormatError);

    auto empty = Brwt::build(PlainRelation(4));
    EXPECT_EQ(Brwt::deserialize(empty.serialize()), empty);
}

TEST(Brwt, NavigationMemoryReport) {
    Rng rng(3);
    auto a = Brwt::build(random_relation(rng, 64, 0.05));
    auto b = Brwt::build(random_relation(rng, 64, 0.05));
    auto m = intersection_navigation_memory(a, b);
    EXPECT_EQ(m.cursor_tables, CursorTable(a).memory_bytes() + CursorTable(b).memory_bytes());
    EXPECT_GT(m.rank_working_set, a.memory_bytes() + b.memory_bytes());
    EXPECT_GT(m.overhead(), 0.0);
}
