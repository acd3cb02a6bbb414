#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wfreg/history.hpp"

namespace wfreg::testing {

inline OpRecord write_op(OpId id, ProcessId p, Value arg, StepIndex s, StepIndex e,
                         const std::string& var = "X") {
  OpRecord o;
  o.id = id;
  o.proc = p;
  o.var = var;
  o.kind = OpKind::Write;
  o.arg = arg;
  o.start = s;
  o.end = e;
  return o;
}

inline OpRecord read_op(OpId id, ProcessId p, Value ret, StepIndex s, StepIndex e,
                        const std::string& var = "X") {
  OpRecord o;
  o.id = id;
  o.proc = p;
  o.var = var;
  o.kind = OpKind::Read;
  if (e != kPending) o.ret = ret;
  o.start = s;
  o.end = e;
  return o;
}

/// Single variable "X" where process 0 writes and every other process
/// mentioned by an op reads.
inline History single_writer(Value domain, Value init, std::vector<OpRecord> ops) {
  VarDecl d{domain, init, {0}, {}, false};
  for (const auto& o : ops) {
    if (o.proc != 0) d.readers.insert(o.proc);
  }
  return History({{"X", d}}, std::move(ops));
}

struct GenOptions {
  std::size_t max_ops = 6;
  Value domain = 3;
  std::size_t readers = 2;
  std::size_t writers = 1;
  bool pending = true;
};

/// Random history on one variable. Processes 0..writers-1 write (and, with
/// several writers, also read); the rest only read. Each process is
/// sequential and the events of all processes are interleaved at random.
/// Read results are biased towards values that were actually written.
inline History random_history(std::mt19937_64& rng, const GenOptions& g) {
  const std::size_t procs = g.writers + g.readers;
  std::uniform_int_distribution<std::size_t> n_ops(0, g.max_ops);
  std::uniform_int_distribution<std::size_t> pick_proc(0, procs - 1);
  std::uniform_int_distribution<Value> pick_val(0, g.domain - 1);
  std::bernoulli_distribution coin(0.5);

  std::vector<std::vector<OpRecord>> queue(procs);
  const std::size_t k = n_ops(rng);
  for (std::size_t i = 0; i < k; ++i) {
    OpRecord o;
    o.id = i + 1;
    o.proc = static_cast<ProcessId>(pick_proc(rng));
    o.var = "X";
    const bool writer = o.proc < g.writers;
    o.kind = writer && (g.writers == 1 || coin(rng)) ? OpKind::Write : OpKind::Read;
    if (o.kind == OpKind::Write) o.arg = pick_val(rng);
    queue[o.proc].push_back(o);
  }

  VarDecl d{g.domain, pick_val(rng), {}, {}, false};
  for (ProcessId p = 0; p < procs; ++p) {
    if (p < g.writers) d.writers.insert(p);
    if (p >= g.writers || g.writers > 1) d.readers.insert(p);
  }

  std::vector<OpRecord> done;
  std::vector<std::size_t> next(procs, 0);
  std::vector<bool> active(procs, false), stopped(procs, false);
  std::vector<Value> started_writes{d.init};
  StepIndex step = 0;
  for (;;) {
    std::vector<std::size_t> live;
    for (std::size_t p = 0; p < procs; ++p) {
      if (!stopped[p] && next[p] < queue[p].size()) live.push_back(p);
    }
    if (live.empty()) break;
    const std::size_t p = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
    OpRecord& o = queue[p][next[p]];
    if (!active[p]) {
      o.start = step++;
      active[p] = true;
      if (o.arg) started_writes.push_back(*o.arg);
      continue;
    }
    const bool last = next[p] + 1 == queue[p].size();
    if (g.pending && last && std::bernoulli_distribution(0.15)(rng)) {
      stopped[p] = true;
      done.push_back(o);
      continue;
    }
    o.end = step++;
    if (o.kind == OpKind::Read) {
      o.ret = std::bernoulli_distribution(0.85)(rng)
                  ? started_writes[std::uniform_int_distribution<std::size_t>(
                        0, started_writes.size() - 1)(rng)]
                  : pick_val(rng);
    }
    done.push_back(o);
    active[p] = false;
    ++next[p];
  }
  return History({{"X", d}}, std::move(done));
}

}  // namespace wfreg::testing
