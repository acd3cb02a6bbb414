#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "wfreg/history.hpp"

using namespace wfreg;
using namespace wfreg::testing;

TEST(Precedes, DisjointIntervals) {
  const auto a = write_op(1, 0, 1, 0, 1);
  const auto b = read_op(2, 1, 1, 2, 3);
  EXPECT_TRUE(precedes(a, b));
  EXPECT_FALSE(precedes(b, a));
  EXPECT_FALSE(overlaps(a, b));
}

TEST(Precedes, NestedIntervalsOverlap) {
  const auto a = write_op(1, 0, 1, 0, 3);
  const auto b = read_op(2, 1, 1, 1, 2);
  EXPECT_FALSE(precedes(a, b));
  EXPECT_FALSE(precedes(b, a));
  EXPECT_TRUE(overlaps(a, b));
}

TEST(Precedes, SharedStepRejectedByHistory) {
  EXPECT_THROW(single_writer(2, 0, {write_op(1, 0, 1, 0, 1), read_op(2, 1, 1, 1, 2)}),
               HistoryError);
  const auto h = single_writer(2, 0, {write_op(1, 0, 1, 0, 1), read_op(2, 1, 1, 2, 3)});
  EXPECT_TRUE(precedes(h.op(1), h.op(2)));
}

TEST(Precedes, PendingOperationThrows) {
  const auto a = write_op(1, 0, 1, 0, kPending);
  const auto b = read_op(2, 1, 0, 1, 2);
  EXPECT_THROW(precedes(a, b), HistoryError);
  EXPECT_THROW(precedes(b, a), HistoryError);
}

TEST(FeasibleValues, NoOverlapIsLatestWrite) {
  const auto h = single_writer(10, 0, {write_op(1, 0, 5, 0, 1), read_op(2, 1, 5, 2, 3)});
  for (auto level : {SemanticsLevel::Safe, SemanticsLevel::Regular, SemanticsLevel::Atomic}) {
    EXPECT_EQ(feasible_values(h, h.op(2), level), (std::set<Value>{5}));
  }
}

TEST(FeasibleValues, OverlapSafeIsWholeDomain) {
  const auto h = single_writer(10, 0, {write_op(1, 0, 1, 0, 3), read_op(2, 1, 0, 1, 2)});
  std::set<Value> all;
  for (Value v = 0; v < 10; ++v) all.insert(v);
  EXPECT_EQ(feasible_values(h, h.op(2), SemanticsLevel::Safe), all);
}

TEST(FeasibleValues, OverlapRegularIsBeforeAndOverlapping) {
  const auto h = single_writer(10, 0, {write_op(1, 0, 1, 0, 3), read_op(2, 1, 0, 1, 2)});
  EXPECT_EQ(feasible_values(h, h.op(2), SemanticsLevel::Regular), (std::set<Value>{0, 1}));
  EXPECT_EQ(feasible_values(h, h.op(2), SemanticsLevel::Atomic), (std::set<Value>{0, 1}));
}

TEST(FeasibleValues, PendingWriteOverlapsLaterReads) {
  const auto h = single_writer(4, 0, {write_op(1, 0, 3, 0, kPending), read_op(2, 1, 0, 5, 6)});
  EXPECT_EQ(feasible_values(h, h.op(2), SemanticsLevel::Regular), (std::set<Value>{0, 3}));
}

TEST(FeasibleValues, RejectsPendingOrForeignRead) {
  const auto h = single_writer(2, 0, {read_op(1, 1, 0, 0, kPending)});
  EXPECT_THROW(feasible_values(h, h.op(1), SemanticsLevel::Safe), HistoryError);
  const auto other = read_op(9, 1, 0, 0, 1);
  EXPECT_THROW(feasible_values(h, other, SemanticsLevel::Safe), HistoryError);
}

TEST(HistoryValidation, RejectsMalformedInput) {
  // duplicate step
  EXPECT_THROW(single_writer(2, 0, {write_op(1, 0, 1, 0, 2), read_op(2, 1, 0, 2, 3)}),
               HistoryError);
  // undeclared writer
  EXPECT_THROW(History({{"X", VarDecl{2, 0, {0}, {1}, false}}}, {write_op(1, 1, 1, 0, 1)}),
               HistoryError);
  // overlapping ops of one process
  EXPECT_THROW(single_writer(2, 0, {write_op(1, 0, 1, 0, 3), write_op(2, 0, 0, 1, 2)}),
               HistoryError);
  // value outside domain
  EXPECT_THROW(single_writer(2, 0, {write_op(1, 0, 2, 0, 1)}), HistoryError);
  EXPECT_THROW(single_writer(2, 0, {read_op(1, 1, 5, 0, 1)}), HistoryError);
  // end before start
  EXPECT_THROW(single_writer(2, 0, {write_op(1, 0, 1, 4, 3)}), HistoryError);
  // duplicate id
  EXPECT_THROW(single_writer(2, 0, {write_op(1, 0, 1, 0, 1), read_op(1, 1, 1, 2, 3)}),
               HistoryError);
  // undeclared variable
  EXPECT_THROW(History({}, {write_op(1, 0, 1, 0, 1)}), HistoryError);
}

TEST(HistoryValidation, KeepsOpsInStartOrder) {
  const auto h = single_writer(2, 0, {read_op(7, 1, 1, 4, 5), write_op(3, 0, 1, 0, 1)});
  ASSERT_EQ(h.ops().size(), 2u);
  EXPECT_EQ(h.ops()[0].id, 3u);
  EXPECT_EQ(h.ops()[1].id, 7u);
}

TEST(HistoryProperty, PrecedenceIsStrictPartialOrder) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto h = random_history(rng, GenOptions{});
    std::vector<const OpRecord*> done;
    for (const auto& o : h.ops()) {
      if (o.completed()) done.push_back(&o);
    }
    for (const auto* a : done) {
      EXPECT_FALSE(precedes(*a, *a));
      for (const auto* b : done) {
        if (precedes(*a, *b)) EXPECT_FALSE(precedes(*b, *a));
        for (const auto* c : done) {
          if (precedes(*a, *b) && precedes(*b, *c)) EXPECT_TRUE(precedes(*a, *c));
        }
      }
    }
  }
}

TEST(HistoryProperty, FeasibleSetsNest) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto h = random_history(rng, GenOptions{});
    for (const auto& r : h.ops()) {
      if (r.kind != OpKind::Read || !r.completed()) continue;
      const auto safe = feasible_values(h, r, SemanticsLevel::Safe);
      const auto regular = feasible_values(h, r, SemanticsLevel::Regular);
      const auto atomic = feasible_values(h, r, SemanticsLevel::Atomic);
      EXPECT_TRUE(std::includes(safe.begin(), safe.end(), regular.begin(), regular.end()));
      EXPECT_EQ(atomic, regular);
      const auto ctx = read_context(h, r);
      if (ctx.overlapping.empty()) {
        EXPECT_EQ(safe.size(), 1u);
        EXPECT_EQ(regular.size(), 1u);
      }
    }
  }
}
