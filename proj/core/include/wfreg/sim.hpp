#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfreg/history.hpp"

namespace wfreg {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum number of base-register accesses per high-level operation kind.
using StepBudget = std::map<OpKind, std::size_t>;

/// A single-writer base register. Values stored in it are opaque naturals
/// below `domain`; constructions encode composite records into them.
struct BaseRegisterSpec {
  std::string name;
  ProcessId owner = 0;
  std::set<ProcessId> readers;
  Value domain = 2;
  Value init = 0;
  SemanticsLevel semantics = SemanticsLevel::Atomic;
};

struct OpRequest {
  OpKind kind = OpKind::Read;
  Value arg = 0;

  friend bool operator==(const OpRequest&, const OpRequest&) = default;
};

/// Per-process lists of high-level operations, indexed by process id.
using Workload = std::vector<std::vector<OpRequest>>;

struct OpResult {
  std::optional<Value> value;
  std::optional<Tag> label;
  std::vector<ScanEntry> scan;

  friend bool operator==(const OpResult&, const OpResult&) = default;
};

/// Next step of a process program: access a base register or finish the
/// current high-level operation.
struct Action {
  enum class Type : std::uint8_t { Read, Write, Return };

  Type type = Type::Return;
  std::size_t reg = 0;
  Value value = 0;
  OpResult result;

  static Action read(std::size_t reg) { return {Type::Read, reg, 0, {}}; }
  static Action write(std::size_t reg, Value v) { return {Type::Write, reg, v, {}}; }
  static Action finish(OpResult r = {}) { return {Type::Return, 0, 0, std::move(r)}; }
};

/// Resumable step program of one process. The instance owns the process's
/// local state, which persists across its high-level operations.
class ProcessProgram {
 public:
  virtual ~ProcessProgram() = default;

  virtual Action invoke(const OpRequest& request) = 0;
  /// Continues after a base access; `result` is the value read, or the
  /// value written for a base write.
  virtual Action resume(Value result) = 0;
};

using ProgramFactory = std::function<std::unique_ptr<ProcessProgram>(ProcessId)>;

/// Shared-memory layout of a construction: the high-level variable it
/// implements and the base registers it is built from.
struct ProtocolLayout {
  std::string var_name;
  VarDecl variable;
  std::vector<BaseRegisterSpec> registers;
};

struct ProtocolSpec {
  std::string name;
  std::size_t processes = 0;
  std::shared_ptr<const ProtocolLayout> layout;
  StepBudget budget;
  /// Strongest level the construction claims for its register variable.
  SemanticsLevel guarantee = SemanticsLevel::Atomic;
  ProgramFactory make_program;

  const std::vector<BaseRegisterSpec>& registers() const { return layout->registers; }
};

enum class DecisionKind : std::uint8_t {
  Schedule,  // which enabled process takes the next step
  Value,     // value returned by a safe/regular base read
  Commit,    // commit placement of an atomic base read
};

/// A resolved decision point. Points with a single option are forced and
/// never recorded.
struct Decision {
  DecisionKind kind = DecisionKind::Schedule;
  std::uint32_t choice = 0;
  std::uint32_t options = 0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

using DecisionSequence = std::vector<std::uint32_t>;

enum class Scope : std::uint8_t { High, Base };
enum class EventType : std::uint8_t { Invoke, Respond };

struct Event {
  StepIndex step = 0;
  Scope scope = Scope::High;
  EventType type = EventType::Invoke;
  ProcessId proc = 0;
  OpId op = 0;
  OpKind kind = OpKind::Read;
  std::size_t reg = 0;         // base events only
  std::optional<Value> value;  // arg on update invoke, result on read respond
  std::optional<Tag> label;
  std::vector<ScanEntry> scan;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Base-access accounting for one high-level operation.
struct OpAccount {
  OpId op = 0;
  ProcessId proc = 0;
  OpKind kind = OpKind::Read;
  std::size_t base_accesses = 0;
  bool completed = false;

  friend bool operator==(const OpAccount&, const OpAccount&) = default;
};

struct Execution {
  std::shared_ptr<const ProtocolLayout> layout;
  std::vector<Event> events;
  std::vector<OpAccount> ops;
  std::vector<Decision> decisions;
  std::vector<Value> final_registers;
  /// Stopped by a step limit before every workload operation finished.
  bool truncated = false;

  DecisionSequence choices() const;
};

/// Supplies choices at decision points with more than one option.
class DecisionSource {
 public:
  virtual ~DecisionSource() = default;
  virtual std::uint32_t choose(DecisionKind kind, std::uint32_t options) = 0;
};

/// Core simulation loop. `max_events` bounds the event log; exceeding it
/// stops the run and marks the execution truncated.
Execution simulate(const ProtocolSpec& spec, const Workload& workload, DecisionSource& source,
                   std::size_t max_events = std::numeric_limits<std::size_t>::max());

/// Replays exactly the given decisions. Throws SimulationError if a choice
/// is out of range, the sequence runs out, or choices are left over.
Execution run_schedule(const ProtocolSpec& spec, const Workload& workload,
                       const DecisionSequence& decisions);

/// Draws every decision as `rng() % options` from std::mt19937_64 seeded
/// with `seed`.
Execution random_execution(const ProtocolSpec& spec, const Workload& workload, std::uint64_t seed);

struct EnumerationLimits {
  std::uint64_t max_executions = 1'000'000;
  std::size_t max_steps = 100'000;
};

struct EnumerationStats {
  std::uint64_t executions = 0;
  bool truncated = false;
};

/// Return false to stop the enumeration early.
using ExecutionVisitor = std::function<bool(const Execution&)>;

/// Depth-first walk of the whole decision tree. Each leaf is replayed from
/// the root, so visited executions are independent values.
EnumerationStats enumerate_executions(const ProtocolSpec& spec, const Workload& workload,
                                      const EnumerationLimits& limits,
                                      const ExecutionVisitor& visit);

/// Convenience form that collects every execution.
std::vector<Execution> enumerate_executions(const ProtocolSpec& spec, const Workload& workload,
                                            const EnumerationLimits& limits,
                                            EnumerationStats* stats = nullptr);

History extract_history(const Execution& e, Scope scope);

/// High-level trace followed by an extension record holding the decisions.
std::string serialize_execution(const Execution& e);

void validate_workload(const ProtocolSpec& spec, const Workload& workload);

}  // namespace wfreg
