#include "wfreg/sim.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <json.hpp>

#include "wfreg/trace.hpp"

namespace wfreg {

DecisionSequence Execution::choices() const {
  DecisionSequence out;
  out.reserve(decisions.size());
  for (const auto& d : decisions) out.push_back(d.choice);
  return out;
}

void validate_workload(const ProtocolSpec& spec, const Workload& workload) {
  if (!spec.layout) throw SimulationError("protocol has no layout");
  if (workload.size() > spec.processes) {
    throw SimulationError("workload names " + std::to_string(workload.size()) +
                          " processes, protocol has " + std::to_string(spec.processes));
  }
  const VarDecl& var = spec.layout->variable;
  for (ProcessId p = 0; p < workload.size(); ++p) {
    for (const auto& req : workload[p]) {
      const bool ts_kind = req.kind == OpKind::Label || req.kind == OpKind::Scan;
      if (ts_kind != var.timestamp) {
        throw SimulationError(std::string(to_string(req.kind)) + " is not supported by " +
                              spec.name);
      }
      if (is_update(req.kind)) {
        if (!var.writers.contains(p)) {
          throw SimulationError("process " + std::to_string(p) + " may not " +
                                std::string(to_string(req.kind)));
        }
        if (req.arg >= var.domain) {
          throw SimulationError("argument " + std::to_string(req.arg) + " outside domain");
        }
      } else if (!var.readers.contains(p)) {
        throw SimulationError("process " + std::to_string(p) + " may not " +
                              std::string(to_string(req.kind)));
      }
    }
  }
}

namespace {

struct WriteInterval {
  StepIndex start;
  StepIndex end;
  Value arg;
};

struct RegisterState {
  const BaseRegisterSpec* spec;
  std::vector<Value> versions;          // atomic: committed values, versions[0] = init
  std::vector<WriteInterval> writes;    // safe/regular: base writes so far, in order
};

struct InFlight {
  OpId base_op;
  std::size_t reg;
  bool write;
  Value arg;
  StepIndex start;
  std::size_t version_at_invoke;
  bool committed;
};

struct CurrentOp {
  OpId id;
  OpKind kind;
  std::size_t account;
};

struct ProcState {
  std::unique_ptr<ProcessProgram> program;
  std::size_t next = 0;
  std::optional<CurrentOp> current;
  std::optional<InFlight> inflight;
};

class Simulator {
 public:
  Simulator(const ProtocolSpec& spec, const Workload& workload, DecisionSource& source)
      : spec_(spec), workload_(workload), source_(source) {
    validate_workload(spec, workload);
    exec_.layout = spec.layout;
    for (const auto& r : spec.registers()) {
      if (r.init >= r.domain) throw SimulationError("register " + r.name + ": init outside domain");
      regs_.push_back(RegisterState{&r, {r.init}, {}});
    }
    procs_.resize(spec.processes);
    for (ProcessId p = 0; p < spec.processes; ++p) procs_[p].program = spec.make_program(p);
  }

  Execution run(std::size_t max_events) {
    std::vector<ProcessId> enabled;
    for (;;) {
      enabled.clear();
      for (ProcessId p = 0; p < procs_.size(); ++p) {
        if (procs_[p].inflight || (p < workload_.size() && procs_[p].next < workload_[p].size())) {
          enabled.push_back(p);
        }
      }
      if (enabled.empty()) break;
      if (exec_.events.size() >= max_events) {
        exec_.truncated = true;
        break;
      }
      std::uint32_t pick = 0;
      if (enabled.size() > 1) pick = decide(DecisionKind::Schedule, enabled.size());
      step(enabled[pick]);
    }
    for (const auto& r : regs_) {
      if (r.spec->semantics == SemanticsLevel::Atomic) {
        exec_.final_registers.push_back(r.versions.back());
      } else {
        Value v = r.spec->init;
        for (const auto& w : r.writes) {
          if (w.end != kPending) v = w.arg;
        }
        exec_.final_registers.push_back(v);
      }
    }
    return std::move(exec_);
  }

 private:
  std::uint32_t decide(DecisionKind kind, std::uint64_t options) {
    if (options > std::numeric_limits<std::uint32_t>::max()) {
      throw SimulationError("decision point has too many options");
    }
    const auto n = static_cast<std::uint32_t>(options);
    const std::uint32_t c = source_.choose(kind, n);
    if (c >= n) throw SimulationError("invalid decision: choice out of range");
    exec_.decisions.push_back(Decision{kind, c, n});
    return c;
  }

  Event& emit(Scope scope, EventType type, ProcessId p, OpId op, OpKind kind) {
    Event ev;
    ev.step = next_step_++;
    ev.scope = scope;
    ev.type = type;
    ev.proc = p;
    ev.op = op;
    ev.kind = kind;
    exec_.events.push_back(std::move(ev));
    return exec_.events.back();
  }

  void step(ProcessId p) {
    ProcState& ps = procs_[p];
    if (ps.inflight) {
      const Value result = complete_base(p);
      exec_.ops[ps.current->account].base_accesses++;
      issue(p, ps.program->resume(result));
      return;
    }
    const OpRequest& req = workload_[p][ps.next++];
    const OpId id = next_op_++;
    ps.current = CurrentOp{id, req.kind, exec_.ops.size()};
    exec_.ops.push_back(OpAccount{id, p, req.kind, 0, false});
    Event& ev = emit(Scope::High, EventType::Invoke, p, id, req.kind);
    if (is_update(req.kind)) ev.value = req.arg;
    issue(p, ps.program->invoke(req));
  }

  void issue(ProcessId p, Action action) {
    ProcState& ps = procs_[p];
    const CurrentOp cur = *ps.current;
    if (action.type == Action::Type::Return) {
      OpResult& r = action.result;
      if (cur.kind == OpKind::Read && !r.value) {
        throw SimulationError("read program finished without a value");
      }
      if (cur.kind == OpKind::Scan && r.scan.empty()) {
        throw SimulationError("scan program finished without a result");
      }
      Event& ev = emit(Scope::High, EventType::Respond, p, cur.id, cur.kind);
      if (cur.kind == OpKind::Read) ev.value = r.value;
      ev.label = r.label;
      ev.scan = std::move(r.scan);
      exec_.ops[cur.account].completed = true;
      ps.current.reset();
      return;
    }

    if (action.reg >= regs_.size()) throw SimulationError("program accessed an unknown register");
    RegisterState& reg = regs_[action.reg];
    const bool write = action.type == Action::Type::Write;
    if (write) {
      if (reg.spec->owner != p) {
        throw SimulationError("process " + std::to_string(p) + " wrote " + reg.spec->name +
                              " which it does not own");
      }
      if (action.value >= reg.spec->domain) {
        throw SimulationError("value written to " + reg.spec->name + " outside its domain");
      }
    } else if (!reg.spec->readers.contains(p)) {
      throw SimulationError("process " + std::to_string(p) + " read " + reg.spec->name +
                            " which it may not read");
    }

    const OpId base_id = next_base_op_++;
    Event& ev = emit(Scope::Base, EventType::Invoke, p, base_id, write ? OpKind::Write : OpKind::Read);
    ev.reg = action.reg;
    if (write) ev.value = action.value;
    ps.inflight = InFlight{base_id, action.reg, write, action.value, ev.step,
                           reg.versions.size() - 1, false};
    if (write && reg.spec->semantics != SemanticsLevel::Atomic) {
      reg.writes.push_back(WriteInterval{ev.step, kPending, action.value});
    }
  }

  Value complete_base(ProcessId p) {
    ProcState& ps = procs_[p];
    InFlight fl = *ps.inflight;
    ps.inflight.reset();
    RegisterState& reg = regs_[fl.reg];
    const bool atomic = reg.spec->semantics == SemanticsLevel::Atomic;

    Value result = fl.arg;
    if (fl.write) {
      if (atomic) {
        if (!fl.committed) reg.versions.push_back(fl.arg);
      } else {
        reg.writes.back().end = next_step_;
      }
    } else if (atomic) {
      result = atomic_read(reg, fl);
    } else {
      result = weak_read(reg, fl);
    }

    Event& ev = emit(Scope::Base, EventType::Respond, p, fl.base_op,
                     fl.write ? OpKind::Write : OpKind::Read);
    ev.reg = fl.reg;
    if (!fl.write) ev.value = result;
    return result;
  }

  // Any version current at some instant of the read's interval is a
  // possible result. The owner's in-flight write can additionally be
  // committed now and read; otherwise it commits at its own respond.
  Value atomic_read(RegisterState& reg, const InFlight& fl) {
    const std::size_t visible = reg.versions.size() - fl.version_at_invoke;
    InFlight* pending = nullptr;
    auto& owner = procs_[reg.spec->owner].inflight;
    if (owner && owner->write && owner->reg == fl.reg && !owner->committed) pending = &*owner;

    const std::size_t options = visible + (pending != nullptr ? 1 : 0);
    const std::uint32_t c = options > 1 ? decide(DecisionKind::Commit, options) : 0;
    if (c < visible) return reg.versions[fl.version_at_invoke + c];
    pending->committed = true;
    reg.versions.push_back(pending->arg);
    return pending->arg;
  }

  // Safe and regular reads: the adversary picks from the feasible set of
  // the base history as it stands at respond time.
  Value weak_read(const RegisterState& reg, const InFlight& fl) {
    Value before = reg.spec->init;
    std::vector<Value> overlapping;
    for (const auto& w : reg.writes) {
      if (w.end < fl.start) {
        before = w.arg;
      } else {
        overlapping.push_back(w.arg);
      }
    }
    if (overlapping.empty()) return before;
    if (reg.spec->semantics == SemanticsLevel::Safe) {
      return decide(DecisionKind::Value, reg.spec->domain);
    }
    overlapping.push_back(before);
    std::sort(overlapping.begin(), overlapping.end());
    overlapping.erase(std::unique(overlapping.begin(), overlapping.end()), overlapping.end());
    const std::uint32_t c =
        overlapping.size() > 1 ? decide(DecisionKind::Value, overlapping.size()) : 0;
    return overlapping[c];
  }

  const ProtocolSpec& spec_;
  const Workload& workload_;
  DecisionSource& source_;
  std::vector<RegisterState> regs_;
  std::vector<ProcState> procs_;
  Execution exec_;
  StepIndex next_step_ = 0;
  OpId next_op_ = 0;
  OpId next_base_op_ = 0;
};

class ReplaySource final : public DecisionSource {
 public:
  explicit ReplaySource(const DecisionSequence& d) : d_(d) {}
  std::uint32_t choose(DecisionKind, std::uint32_t options) override {
    if (pos_ >= d_.size()) throw SimulationError("decision sequence exhausted");
    const std::uint32_t c = d_[pos_++];
    if (c >= options) throw SimulationError("invalid decision: choice out of range");
    return c;
  }
  bool consumed() const { return pos_ == d_.size(); }

 private:
  const DecisionSequence& d_;
  std::size_t pos_ = 0;
};

class PrefixSource final : public DecisionSource {
 public:
  explicit PrefixSource(const DecisionSequence& prefix) : prefix_(prefix) {}
  std::uint32_t choose(DecisionKind, std::uint32_t) override {
    return pos_ < prefix_.size() ? prefix_[pos_++] : 0;
  }

 private:
  const DecisionSequence& prefix_;
  std::size_t pos_ = 0;
};

class RandomSource final : public DecisionSource {
 public:
  explicit RandomSource(std::uint64_t seed) : rng_(seed) {}
  std::uint32_t choose(DecisionKind, std::uint32_t options) override {
    return static_cast<std::uint32_t>(rng_() % options);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

Execution simulate(const ProtocolSpec& spec, const Workload& workload, DecisionSource& source,
                   std::size_t max_events) {
  return Simulator(spec, workload, source).run(max_events);
}

Execution run_schedule(const ProtocolSpec& spec, const Workload& workload,
                       const DecisionSequence& decisions) {
  ReplaySource source(decisions);
  Execution e = simulate(spec, workload, source);
  if (!source.consumed()) throw SimulationError("decision sequence has unused choices");
  return e;
}

Execution random_execution(const ProtocolSpec& spec, const Workload& workload, std::uint64_t seed) {
  RandomSource source(seed);
  return simulate(spec, workload, source);
}

EnumerationStats enumerate_executions(const ProtocolSpec& spec, const Workload& workload,
                                      const EnumerationLimits& limits,
                                      const ExecutionVisitor& visit) {
  EnumerationStats stats;
  DecisionSequence prefix;
  for (;;) {
    if (stats.executions >= limits.max_executions) {
      stats.truncated = true;
      break;
    }
    PrefixSource source(prefix);
    Execution e = simulate(spec, workload, source, limits.max_steps);
    ++stats.executions;
    if (e.truncated) stats.truncated = true;
    if (!visit(e)) break;

    // Backtrack to the deepest decision with an untried alternative.
    const auto& ds = e.decisions;
    std::size_t i = ds.size();
    while (i > 0 && ds[i - 1].choice + 1 >= ds[i - 1].options) --i;
    if (i == 0) break;
    prefix.resize(i);
    for (std::size_t k = 0; k + 1 < i; ++k) prefix[k] = ds[k].choice;
    prefix[i - 1] = ds[i - 1].choice + 1;
  }
  return stats;
}

std::vector<Execution> enumerate_executions(const ProtocolSpec& spec, const Workload& workload,
                                            const EnumerationLimits& limits,
                                            EnumerationStats* stats) {
  std::vector<Execution> out;
  EnumerationStats s = enumerate_executions(spec, workload, limits, [&](const Execution& e) {
    out.push_back(e);
    return true;
  });
  if (stats != nullptr) *stats = s;
  return out;
}

History extract_history(const Execution& e, Scope scope) {
  const ProtocolLayout& layout = *e.layout;
  std::map<std::string, VarDecl> vars;
  if (scope == Scope::High) {
    vars.emplace(layout.var_name, layout.variable);
  } else {
    for (const auto& r : layout.registers) {
      vars.emplace(r.name, VarDecl{r.domain, r.init, {r.owner}, r.readers, false});
    }
  }

  std::vector<OpRecord> ops;
  std::map<OpId, std::size_t> index;
  for (const auto& ev : e.events) {
    if (ev.scope != scope) continue;
    if (ev.type == EventType::Invoke) {
      OpRecord op;
      op.id = ev.op;
      op.proc = ev.proc;
      op.var = scope == Scope::High ? layout.var_name : layout.registers[ev.reg].name;
      op.kind = ev.kind;
      op.start = ev.step;
      if (is_update(ev.kind)) op.arg = ev.value;
      index[ev.op] = ops.size();
      ops.push_back(std::move(op));
    } else {
      OpRecord& op = ops[index.at(ev.op)];
      op.end = ev.step;
      if (ev.kind == OpKind::Read) op.ret = ev.value;
      op.label = ev.label;
      op.scan = ev.scan;
    }
  }
  return History(std::move(vars), std::move(ops));
}

std::string serialize_execution(const Execution& e) {
  nlohmann::ordered_json ext;
  ext["ext"] = "decisions";
  ext["choices"] = e.choices();
  return serialize_trace(extract_history(e, Scope::High)) + ext.dump() + "\n";
}

}  // namespace wfreg
