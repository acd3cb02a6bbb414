#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wfreg/tag.hpp"

namespace wfreg {

using StepIndex = std::uint64_t;
using OpId = std::uint64_t;

/// End step of an operation that was invoked but never responded.
inline constexpr StepIndex kPending = std::numeric_limits<StepIndex>::max();

/// High-level operation kinds. Label and Scan only appear on timestamp
/// variables, where they play the roles of Write and Read.
enum class OpKind : std::uint8_t { Read, Write, Label, Scan };

enum class SemanticsLevel : std::uint8_t { Safe, Regular, Atomic };

std::string_view to_string(OpKind kind);
std::string_view to_string(SemanticsLevel level);
std::optional<SemanticsLevel> parse_level(std::string_view text);

/// True for Write and Label: operations that install a value.
constexpr bool is_update(OpKind kind) { return kind == OpKind::Write || kind == OpKind::Label; }

class HistoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One entry of a Scan result: the object owned by `owner`, its label and
/// its payload.
struct ScanEntry {
  ProcessId owner = 0;
  Tag tag;
  Value payload = 0;

  friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

/// One operation execution on one variable.
struct OpRecord {
  OpId id = 0;
  ProcessId proc = 0;
  std::string var;
  OpKind kind = OpKind::Read;
  std::optional<Value> arg;   // Write / Label
  std::optional<Value> ret;   // completed Read
  std::optional<Tag> label;   // completed Label, optionally a completed Write
  std::vector<ScanEntry> scan;  // completed Scan
  StepIndex start = 0;
  StepIndex end = kPending;

  bool completed() const { return end != kPending; }

  friend bool operator==(const OpRecord&, const OpRecord&) = default;
};

struct VarDecl {
  Value domain = 2;
  Value init = 0;
  std::set<ProcessId> writers;
  std::set<ProcessId> readers;
  bool timestamp = false;

  bool single_writer() const { return writers.size() <= 1; }

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

/// A validated set of operation executions over declared variables.
///
/// Construction enforces the model invariants: distinct step indices,
/// well-formed records, declared writer/reader sets, in-domain values and
/// sequential processes. Ops are kept sorted by start step.
class History {
 public:
  History() = default;
  History(std::map<std::string, VarDecl> vars, std::vector<OpRecord> ops);

  const std::map<std::string, VarDecl>& vars() const { return vars_; }
  const std::vector<OpRecord>& ops() const { return ops_; }

  const VarDecl& var(std::string_view name) const;
  const OpRecord& op(OpId id) const;
  const OpRecord* find(OpId id) const;

  /// Ops on `var` in start order.
  std::vector<const OpRecord*> ops_on(std::string_view var) const;

  friend bool operator==(const History&, const History&) = default;

 private:
  void validate() const;

  std::map<std::string, VarDecl> vars_;
  std::vector<OpRecord> ops_;
};

/// a precedes b iff a finishes before b starts. Both must be completed.
bool precedes(const OpRecord& a, const OpRecord& b);
bool overlaps(const OpRecord& a, const OpRecord& b);

/// What a completed Read could have observed: the value of the latest
/// Write preceding it (or the initial value) and the arguments of the
/// Writes overlapping it.
struct ReadContext {
  Value before = 0;
  std::set<Value> overlapping;
};
ReadContext read_context(const History& h, const OpRecord& read);

/// Values a completed Read may return under `level`.
///
/// A Read that overlaps no Write gets the value of the latest preceding
/// Write (or the initial value) at every level. Otherwise Safe admits the
/// whole domain and Regular/Atomic admit the latest preceding value plus
/// the argument of every overlapping Write. A pending Write overlaps every
/// operation that ends after it starts.
std::set<Value> feasible_values(const History& h, const OpRecord& read, SemanticsLevel level);

}  // namespace wfreg
