#include "wfreg/history.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace wfreg {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Read:
      return "read";
    case OpKind::Write:
      return "write";
    case OpKind::Label:
      return "label";
    case OpKind::Scan:
      return "scan";
  }
  return "?";
}

std::string_view to_string(SemanticsLevel level) {
  switch (level) {
    case SemanticsLevel::Safe:
      return "safe";
    case SemanticsLevel::Regular:
      return "regular";
    case SemanticsLevel::Atomic:
      return "atomic";
  }
  return "?";
}

std::optional<SemanticsLevel> parse_level(std::string_view text) {
  if (text == "safe") return SemanticsLevel::Safe;
  if (text == "regular") return SemanticsLevel::Regular;
  if (text == "atomic") return SemanticsLevel::Atomic;
  return std::nullopt;
}

namespace {

std::string describe(const OpRecord& op) {
  std::ostringstream os;
  os << "op " << op.id << " (" << to_string(op.kind) << " by p" << op.proc << " on " << op.var
     << ")";
  return os.str();
}

[[noreturn]] void fail(const OpRecord& op, std::string_view what) {
  throw HistoryError(describe(op) + ": " + std::string(what));
}

}  // namespace

History::History(std::map<std::string, VarDecl> vars, std::vector<OpRecord> ops)
    : vars_(std::move(vars)), ops_(std::move(ops)) {
  std::sort(ops_.begin(), ops_.end(), [](const OpRecord& a, const OpRecord& b) {
    return a.start != b.start ? a.start < b.start : a.id < b.id;
  });
  validate();
}

void History::validate() const {
  for (const auto& [name, decl] : vars_) {
    if (decl.domain < 2) throw HistoryError("variable " + name + ": domain must be at least 2");
    if (decl.init >= decl.domain) {
      throw HistoryError("variable " + name + ": initial value outside domain");
    }
  }

  std::unordered_set<OpId> ids;
  std::unordered_set<StepIndex> steps;
  auto claim_step = [&](const OpRecord& op, StepIndex s) {
    if (!steps.insert(s).second) fail(op, "duplicate step index " + std::to_string(s));
  };

  for (const auto& op : ops_) {
    if (!ids.insert(op.id).second) fail(op, "duplicate op id");
    auto it = vars_.find(op.var);
    if (it == vars_.end()) fail(op, "undeclared variable");
    const VarDecl& decl = it->second;

    const bool ts_kind = op.kind == OpKind::Label || op.kind == OpKind::Scan;
    if (ts_kind != decl.timestamp) fail(op, "operation kind does not match variable type");

    if (op.start == kPending) fail(op, "missing invoke step");
    claim_step(op, op.start);
    if (op.completed()) {
      if (op.end <= op.start) fail(op, "respond does not follow invoke");
      claim_step(op, op.end);
    }

    if (is_update(op.kind)) {
      if (!decl.writers.contains(op.proc)) fail(op, "writer not in declared writer set");
      if (!op.arg) fail(op, "update without argument");
      if (*op.arg >= decl.domain) fail(op, "argument outside domain");
      if (op.ret) fail(op, "update carries a return value");
      if (!op.scan.empty()) fail(op, "update carries a scan result");
      if (op.label && !op.completed()) fail(op, "pending update carries a label");
    } else {
      if (!decl.readers.contains(op.proc)) fail(op, "reader not in declared reader set");
      if (op.arg) fail(op, "read carries an argument");
      if (op.label) fail(op, "read carries a label");
      if (op.kind == OpKind::Read) {
        if (op.ret.has_value() != op.completed()) {
          fail(op, op.completed() ? "completed read without return value"
                                  : "pending read carries a return value");
        }
        if (op.ret && *op.ret >= decl.domain) fail(op, "return value outside domain");
        if (!op.scan.empty()) fail(op, "read carries a scan result");
      } else {
        if (op.ret) fail(op, "scan carries a scalar return value");
        if (!op.completed() && !op.scan.empty()) fail(op, "pending scan carries a result");
        for (const auto& e : op.scan) {
          if (e.payload >= decl.domain) fail(op, "scan payload outside domain");
        }
      }
    }
  }

  // Writes on a 1-writer variable are totally ordered by precedence.
  for (const auto& [name, decl] : vars_) {
    if (!decl.single_writer()) continue;
    const OpRecord* last = nullptr;
    for (const auto& op : ops_) {
      if (op.var != name || !is_update(op.kind)) continue;
      if (last != nullptr && !(last->end < op.start)) {
        fail(op, "overlaps an earlier write on a 1-writer variable");
      }
      last = &op;
    }
  }

  // Processes are sequential.
  std::map<ProcessId, const OpRecord*> last_by_proc;
  for (const auto& op : ops_) {
    auto [it, fresh] = last_by_proc.try_emplace(op.proc, &op);
    if (fresh) continue;
    if (!(it->second->end < op.start)) fail(op, "overlaps an earlier operation of the same process");
    it->second = &op;
  }
}

const VarDecl& History::var(std::string_view name) const {
  auto it = vars_.find(std::string(name));
  if (it == vars_.end()) throw HistoryError("unknown variable " + std::string(name));
  return it->second;
}

const OpRecord* History::find(OpId id) const {
  auto it = std::find_if(ops_.begin(), ops_.end(), [id](const OpRecord& op) { return op.id == id; });
  return it == ops_.end() ? nullptr : &*it;
}

const OpRecord& History::op(OpId id) const {
  const OpRecord* found = find(id);
  if (found == nullptr) throw HistoryError("unknown op id " + std::to_string(id));
  return *found;
}

std::vector<const OpRecord*> History::ops_on(std::string_view var) const {
  std::vector<const OpRecord*> out;
  for (const auto& op : ops_) {
    if (op.var == var) out.push_back(&op);
  }
  return out;
}

bool precedes(const OpRecord& a, const OpRecord& b) {
  if (!a.completed() || !b.completed()) throw HistoryError("incomplete operation has no end");
  return a.end < b.start;
}

bool overlaps(const OpRecord& a, const OpRecord& b) { return !precedes(a, b) && !precedes(b, a); }

ReadContext read_context(const History& h, const OpRecord& read) {
  const OpRecord* own = h.find(read.id);
  if (own == nullptr || !(*own == read)) throw HistoryError("read is not part of the history");
  if (read.kind != OpKind::Read) throw HistoryError("feasible values are defined for reads only");
  if (!read.completed()) throw HistoryError("incomplete operation has no end");

  ReadContext ctx;
  ctx.before = h.var(read.var).init;
  const OpRecord* latest = nullptr;
  for (const OpRecord* w : h.ops_on(read.var)) {
    if (w->kind != OpKind::Write) continue;
    if (w->end < read.start) {
      if (latest == nullptr || latest->end < w->end) latest = w;
    } else if (w->start < read.end) {
      ctx.overlapping.insert(*w->arg);
    }
  }
  if (latest != nullptr) ctx.before = *latest->arg;
  return ctx;
}

std::set<Value> feasible_values(const History& h, const OpRecord& read, SemanticsLevel level) {
  ReadContext ctx = read_context(h, read);
  if (ctx.overlapping.empty()) return {ctx.before};
  if (level == SemanticsLevel::Safe) {
    std::set<Value> all;
    for (Value v = 0; v < h.var(read.var).domain; ++v) all.insert(all.end(), v);
    return all;
  }
  ctx.overlapping.insert(ctx.before);
  return ctx.overlapping;
}

}  // namespace wfreg
