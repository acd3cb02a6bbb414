#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "wfreg/checkers.hpp"
#include "wfreg/constructions.hpp"
#include "wfreg/sim.hpp"

using namespace wfreg;

namespace {

std::size_t base_events(const Execution& e) {
  return static_cast<std::size_t>(std::count_if(
      e.events.begin(), e.events.end(), [](const Event& ev) { return ev.scope == Scope::Base; }));
}

ProtocolSpec mw(std::size_t n) {
  TaggedOptions opts;
  opts.domain = 3;
  opts.max_seq = 8;
  return build_multiwriter(n, opts);
}

OpRequest W(Value v) { return {OpKind::Write, v}; }
OpRequest R() { return {OpKind::Read, 0}; }

/// Counts executions of two single-access operations by listing the
/// interleavings of their four events and charging two commit orders to
/// each interleaving where a write overlaps a read of the same register.
std::size_t two_op_oracle(bool write_and_read) {
  std::size_t total = 0;
  // events: 0 = a.inv, 1 = a.resp, 2 = b.inv, 3 = b.resp
  std::vector<int> order{0, 1, 2, 3};
  do {
    auto pos = [&](int ev) { return std::find(order.begin(), order.end(), ev) - order.begin(); };
    if (pos(0) > pos(1) || pos(2) > pos(3)) continue;
    const bool overlap = !(pos(1) < pos(2)) && !(pos(3) < pos(0));
    total += write_and_read && overlap ? 2 : 1;
  } while (std::next_permutation(order.begin(), order.end()));
  return total;
}

}  // namespace

TEST(RunSchedule, SingleWriteOnAtomicBit) {
  const auto spec = build_passthrough(1);
  const auto e = run_schedule(spec, {{W(1)}, {}}, {});
  EXPECT_EQ(base_events(e), 2u);
  ASSERT_EQ(e.final_registers.size(), 1u);
  EXPECT_EQ(e.final_registers[0], 1u);
  EXPECT_FALSE(e.truncated);
  EXPECT_EQ(extract_history(e, Scope::High).ops().size(), 1u);
}

TEST(RunSchedule, SafeAdversaryBreaksRegularity) {
  // W(0) over initial 0 overlapped by a read; the adversary returns 1
  const auto spec = build_passthrough(1, 2, SemanticsLevel::Safe);
  const Workload w{{W(0)}, {R()}};
  bool found = false;
  enumerate_executions(spec, w, {}, [&](const Execution& e) {
    const auto h = extract_history(e, Scope::Base);
    for (const auto& op : h.ops()) {
      if (op.kind == OpKind::Read && op.ret == Value{1}) {
        found = true;
        EXPECT_TRUE(check_level(h, SemanticsLevel::Safe).pass);
        EXPECT_FALSE(check_level(h, SemanticsLevel::Regular).pass);
        const auto again = run_schedule(spec, w, e.choices());
        EXPECT_EQ(again.events, e.events);
      }
    }
    return true;
  });
  EXPECT_TRUE(found);
}

TEST(RunSchedule, IsDeterministic) {
  const auto spec = mw(2);
  const Workload w{{W(1)}, {W(2), R()}};
  const auto first = random_execution(spec, w, 9);
  const auto a = run_schedule(spec, w, first.choices());
  const auto b = run_schedule(spec, w, first.choices());
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.events, first.events);
  EXPECT_EQ(a.decisions, b.decisions);
  EXPECT_EQ(serialize_execution(a), serialize_execution(b));
}

TEST(RunSchedule, RejectsInvalidDecisions) {
  const auto spec = build_passthrough(1);
  const Workload w{{W(1)}, {R()}};
  EXPECT_THROW(run_schedule(spec, w, {}), SimulationError);
  EXPECT_THROW(run_schedule(spec, w, {7, 0, 0, 0, 0}), SimulationError);
  const auto e = random_execution(spec, w, 1);
  auto extra = e.choices();
  extra.push_back(0);
  EXPECT_THROW(run_schedule(spec, w, extra), SimulationError);
}

TEST(RunSchedule, RejectsBadWorkload) {
  const auto spec = build_passthrough(1);
  EXPECT_THROW(run_schedule(spec, {{R()}, {}}, {}), std::exception);
  EXPECT_THROW(run_schedule(spec, {{}, {W(1)}}, {}), std::exception);
  EXPECT_THROW(run_schedule(spec, {{W(5)}, {}}, {}), std::exception);
  EXPECT_THROW(run_schedule(spec, {{}, {}, {R()}}, {}), std::exception);
}

TEST(Enumerate, SingleOpHasOneExecution) {
  EXPECT_EQ(enumerate_executions(build_passthrough(1), {{W(1)}, {}}, {}).size(), 1u);
  EXPECT_EQ(enumerate_executions(build_passthrough(1), {{}, {R()}}, {}).size(), 1u);
}

TEST(Enumerate, TwoSingleAccessOps) {
  EXPECT_EQ(two_op_oracle(false), 6u);
  EXPECT_EQ(two_op_oracle(true), 10u);
  const auto readers = enumerate_executions(build_passthrough(2), {{}, {R()}, {R()}}, {});
  EXPECT_EQ(readers.size(), two_op_oracle(false));
  const auto mixed = enumerate_executions(build_passthrough(1), {{W(1)}, {R()}}, {});
  EXPECT_EQ(mixed.size(), two_op_oracle(true));
}

TEST(Enumerate, ExecutionsAreDistinct) {
  const auto all = enumerate_executions(mw(2), {{W(1)}, {W(2), R()}}, {});
  std::set<DecisionSequence> seen;
  for (const auto& e : all) EXPECT_TRUE(seen.insert(e.choices()).second);
}

TEST(Enumerate, MultiwriterScenarioWithinBound) {
  EnumerationStats stats;
  enumerate_executions(mw(2), {{W(1)}, {W(2), R()}}, {}, &stats);
  EXPECT_FALSE(stats.truncated);
  EXPECT_LE(stats.executions, 1'000'000u);
}

TEST(Enumerate, LimitsTruncate) {
  EnumerationStats stats;
  const auto some =
      enumerate_executions(build_passthrough(1), {{W(1)}, {R()}}, {3, 100'000}, &stats);
  EXPECT_TRUE(stats.truncated);
  EXPECT_EQ(some.size(), 3u);

  EnumerationStats exact;
  enumerate_executions(build_passthrough(1), {{W(1)}, {}}, {1, 100'000}, &exact);
  EXPECT_FALSE(exact.truncated);

  EnumerationStats steps;
  const auto cut = enumerate_executions(mw(2), {{W(1)}, {W(2), R()}}, {10, 3},
                                        &steps);
  EXPECT_TRUE(steps.truncated);
  for (const auto& e : cut) EXPECT_TRUE(e.truncated);
}

TEST(RandomExecution, SameSeedSameLog) {
  const auto spec = mw(2);
  const Workload w{{W(1)}, {W(2), R()}};
  EXPECT_EQ(random_execution(spec, w, 0).events, random_execution(spec, w, 0).events);
}

TEST(RandomExecution, MultiwriterSamplesAreAtomic) {
  const auto spec = mw(3);
  const Workload w{{W(1), R()}, {W(2), R()}, {R(), W(1)}};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto e = random_execution(spec, w, seed);
    ASSERT_TRUE(check_level(extract_history(e, Scope::High), SemanticsLevel::Atomic).pass)
        << "seed " << seed;
  }
}

TEST(RandomExecution, CoversBothSafeBranches) {
  const auto spec = build_passthrough(1, 2, SemanticsLevel::Safe);
  const Workload w{{W(0)}, {R()}};
  std::set<Value> overlapped;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto h = extract_history(random_execution(spec, w, seed), Scope::Base);
    const auto& wr = h.ops()[0].kind == OpKind::Write ? h.ops()[0] : h.ops()[1];
    const auto& rd = h.ops()[0].kind == OpKind::Write ? h.ops()[1] : h.ops()[0];
    if (overlaps(wr, rd)) overlapped.insert(*rd.ret);
  }
  EXPECT_EQ(overlapped, (std::set<Value>{0, 1}));
}

TEST(ExtractHistory, MultiwriterWriteHasFourBaseAccesses) {
  const auto e = run_schedule(mw(3), {{W(1)}, {}, {}}, {});
  EXPECT_EQ(extract_history(e, Scope::Base).ops().size(), 4u);
  EXPECT_EQ(extract_history(e, Scope::High).ops().size(), 1u);
  ASSERT_EQ(e.ops.size(), 1u);
  EXPECT_EQ(e.ops[0].base_accesses, 4u);
}

TEST(SimProperty, BaseHistoriesMatchDeclaredSemantics) {
  struct Case {
    ProtocolSpec spec;
    Workload w;
  };
  std::vector<Case> cases;
  cases.push_back({build_passthrough(2, 3, SemanticsLevel::Safe), {{W(1), W(2)}, {R()}, {R()}}});
  cases.push_back(
      {build_passthrough(2, 3, SemanticsLevel::Regular), {{W(1), W(2)}, {R()}, {R()}}});
  cases.push_back({build_regular_bit(2), {{W(1), W(0)}, {R()}, {R()}}});
  cases.push_back({mw(2), {{W(1)}, {W(2), R()}}});
  for (const auto& c : cases) {
    std::uint64_t n = 0;
    enumerate_executions(c.spec, c.w, {}, [&](const Execution& e) {
      ++n;
      const auto base = extract_history(e, Scope::Base);
      extract_history(e, Scope::High);
      for (const auto& reg : c.spec.registers()) {
        EXPECT_TRUE(check_variable(base, reg.name, reg.semantics).pass) << c.spec.name;
      }
      return true;
    });
    EXPECT_GT(n, 0u);
  }
}

TEST(SimProperty, WeakReadsReachEveryFeasibleValue) {
  for (auto level : {SemanticsLevel::Safe, SemanticsLevel::Regular}) {
    const auto spec = build_passthrough(1, 4, level);
    // key: positions of the write and read intervals
    std::map<std::tuple<StepIndex, StepIndex, StepIndex, StepIndex>, std::set<Value>> seen;
    std::map<std::tuple<StepIndex, StepIndex, StepIndex, StepIndex>, std::set<Value>> feasible;
    enumerate_executions(spec, {{W(1), W(2)}, {R()}}, {}, [&](const Execution& e) {
      const auto h = extract_history(e, Scope::Base);
      std::vector<StepIndex> writes;
      const OpRecord* read = nullptr;
      for (const auto& op : h.ops()) {
        if (op.kind == OpKind::Read) {
          read = &op;
        } else {
          writes.push_back(op.start);
        }
      }
      const auto key = std::make_tuple(writes[0], writes[1], read->start, read->end);
      seen[key].insert(*read->ret);
      feasible[key] = feasible_values(h, *read, level);
      return true;
    });
    EXPECT_EQ(seen, feasible);
  }
}
