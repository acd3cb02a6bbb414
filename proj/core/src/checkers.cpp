#include "wfreg/checkers.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace wfreg {

namespace {

std::string read_failure(const OpRecord& r, std::string_view detail) {
  std::ostringstream os;
  os << "read op " << r.id << " by p" << r.proc << " on " << r.var << " returned " << *r.ret
     << ": " << detail;
  return os.str();
}

Verdict check_weak(const History& h, const std::string& var, SemanticsLevel level) {
  const VarDecl& decl = h.var(var);
  if (!decl.single_writer()) {
    throw ClassificationError("variable " + var + " has several writers: classification undefined, use Atomic");
  }
  for (const OpRecord* r : h.ops_on(var)) {
    if (r->kind != OpKind::Read || !r->completed()) continue;
    const ReadContext ctx = read_context(h, *r);
    if (ctx.overlapping.empty()) {
      if (*r->ret != ctx.before) {
        return Verdict::failure(r->id, read_failure(*r, "overlaps no write, expected " +
                                                            std::to_string(ctx.before)));
      }
      continue;
    }
    if (level == SemanticsLevel::Safe) continue;
    if (*r->ret != ctx.before && !ctx.overlapping.contains(*r->ret)) {
      return Verdict::failure(
          r->id, read_failure(*r, "neither the latest preceding nor an overlapping write's value"));
    }
  }
  return Verdict::ok();
}

/// Backtracking search for a linearization of one variable.
///
/// Candidates are ordered by (end, start, id); an op may be placed next
/// only if no unplaced op finished before it started. Failed states are
/// memoized by (placed set, current value).
class AtomicSearch {
 public:
  AtomicSearch(const History& h, const std::string& var) : init_(h.var(var).init) {
    for (const OpRecord* op : h.ops_on(var)) {
      if (op->kind == OpKind::Read && !op->completed()) continue;
      nodes_.push_back(op);
      if (op->completed()) ++required_;
    }
    std::sort(nodes_.begin(), nodes_.end(), [](const OpRecord* a, const OpRecord* b) {
      if (a->end != b->end) return a->end < b->end;
      if (a->start != b->start) return a->start < b->start;
      return a->id < b->id;
    });
    words_ = (nodes_.size() + 63) / 64;
  }

  Verdict run(const std::string& var) {
    // A read of a value nobody wrote can never be linearized.
    std::set<Value> written{init_};
    for (const OpRecord* op : nodes_) {
      if (op->kind == OpKind::Write) written.insert(*op->arg);
    }
    for (const OpRecord* op : nodes_) {
      if (op->kind == OpKind::Read && !written.contains(*op->ret)) {
        return Verdict::failure(op->id, read_failure(*op, "value was never written"));
      }
    }

    std::vector<std::uint64_t> placed(words_, 0);
    best_ = placed;
    if (dfs(placed, 0, init_)) {
      Verdict v;
      v.linearizations[var] = order_;
      return v;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!test(best_, i) && nodes_[i]->kind == OpKind::Read) {
        return Verdict::failure(nodes_[i]->id,
                                read_failure(*nodes_[i], "no linearization places this read"));
      }
    }
    return Verdict::failure(std::nullopt, "no linearization exists for " + var);
  }

 private:
  struct Key {
    std::vector<std::uint64_t> placed;
    Value value;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<Value>{}(k.value);
      for (auto w : k.placed) h = h * 1000003u ^ std::hash<std::uint64_t>{}(w);
      return h;
    }
  };

  static bool test(const std::vector<std::uint64_t>& m, std::size_t i) {
    return (m[i / 64] >> (i % 64)) & 1u;
  }
  static void flip(std::vector<std::uint64_t>& m, std::size_t i) { m[i / 64] ^= 1ull << (i % 64); }

  bool dfs(std::vector<std::uint64_t>& placed, std::size_t done, Value value) {
    if (done == required_) return true;
    if (order_.size() > best_depth_) {
      best_depth_ = order_.size();
      best_ = placed;
    }

    std::size_t first = 0;
    while (first < nodes_.size() && test(placed, first)) ++first;

    for (std::size_t i = first; i < nodes_.size(); ++i) {
      if (test(placed, i)) continue;
      const OpRecord& c = *nodes_[i];
      if (i != first && !(c.start < nodes_[first]->end)) continue;
      if (c.kind == OpKind::Read && *c.ret != value) continue;

      const Value next = c.kind == OpKind::Write ? *c.arg : value;
      flip(placed, i);
      if (failed_.insert(Key{placed, next}).second) {
        order_.push_back(c.id);
        if (dfs(placed, done + (c.completed() ? 1 : 0), next)) return true;
        order_.pop_back();
      }
      flip(placed, i);
    }
    return false;
  }

  Value init_;
  std::vector<const OpRecord*> nodes_;
  std::size_t required_ = 0;
  std::size_t words_ = 0;
  std::unordered_set<Key, KeyHash> failed_;
  Linearization order_;
  std::vector<std::uint64_t> best_;
  std::size_t best_depth_ = 0;
};

}  // namespace

Verdict check_variable(const History& h, const std::string& var, SemanticsLevel level) {
  if (h.var(var).timestamp) {
    throw HistoryError("variable " + var + " is a timestamp system; use the CTS checker");
  }
  if (level != SemanticsLevel::Atomic) return check_weak(h, var, level);
  return AtomicSearch(h, var).run(var);
}

Verdict check_level(const History& h, SemanticsLevel level) {
  Verdict all;
  for (const auto& [name, decl] : h.vars()) {
    Verdict v = check_variable(h, name, level);
    if (!v.pass) return v;
    all.linearizations.merge(v.linearizations);
  }
  return all;
}

std::optional<SemanticsLevel> classify(const History& h) {
  if (!check_level(h, SemanticsLevel::Safe).pass) return std::nullopt;
  if (!check_level(h, SemanticsLevel::Regular).pass) return SemanticsLevel::Safe;
  if (!check_level(h, SemanticsLevel::Atomic).pass) return SemanticsLevel::Regular;
  return SemanticsLevel::Atomic;
}

bool brute_force_atomic(const History& h) {
  for (const auto& [name, decl] : h.vars()) {
    if (decl.timestamp) throw HistoryError("brute force oracle does not handle timestamp variables");

    std::vector<const OpRecord*> fixed;
    std::vector<const OpRecord*> optional_writes;
    for (const auto& op : h.ops()) {
      if (op.var != name) continue;
      if (op.end != kPending) {
        fixed.push_back(&op);
      } else if (op.kind == OpKind::Write) {
        optional_writes.push_back(&op);
      }
    }
    if (fixed.size() + optional_writes.size() > kBruteForceLimit) {
      throw std::length_error("brute force oracle: too many operations on " + name);
    }

    bool found = false;
    for (std::uint32_t subset = 0; subset < (1u << optional_writes.size()) && !found; ++subset) {
      std::vector<const OpRecord*> items = fixed;
      for (std::size_t k = 0; k < optional_writes.size(); ++k) {
        if (subset & (1u << k)) items.push_back(optional_writes[k]);
      }
      std::vector<std::size_t> perm(items.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        bool ok = true;
        for (std::size_t i = 0; i < perm.size() && ok; ++i) {
          for (std::size_t j = i + 1; j < perm.size() && ok; ++j) {
            // Placing j after i is wrong if j ended before i started.
            if (items[perm[j]]->end < items[perm[i]]->start) ok = false;
          }
        }
        Value cur = decl.init;
        for (std::size_t i = 0; i < perm.size() && ok; ++i) {
          const OpRecord* op = items[perm[i]];
          if (op->kind == OpKind::Write) {
            cur = *op->arg;
          } else if (*op->ret != cur) {
            ok = false;
          }
        }
        if (ok) found = true;
      } while (!found && std::next_permutation(perm.begin(), perm.end()));
    }
    if (!found) return false;
  }
  return true;
}

bool replays(const History& h, const std::string& var, const Linearization& order) {
  const VarDecl& decl = h.var(var);
  std::vector<const OpRecord*> seq;
  std::unordered_set<OpId> seen;
  for (OpId id : order) {
    const OpRecord* op = h.find(id);
    if (op == nullptr || op->var != var || !seen.insert(id).second) return false;
    if (op->kind == OpKind::Read && !op->completed()) return false;
    seq.push_back(op);
  }
  for (const OpRecord* op : h.ops_on(var)) {
    if (op->completed() && !seen.contains(op->id)) return false;
  }
  Value cur = decl.init;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[j]->end < seq[i]->start) return false;
    }
    if (seq[i]->kind == OpKind::Write) {
      cur = *seq[i]->arg;
    } else if (*seq[i]->ret != cur) {
      return false;
    }
  }
  return true;
}

Verdict check_wait_free(const Execution& e, const StepBudget& budget) {
  for (const auto& op : e.ops) {
    if (!op.completed) continue;
    auto it = budget.find(op.kind);
    if (it == budget.end()) {
      throw std::invalid_argument("no step budget for " + std::string(to_string(op.kind)));
    }
    if (op.base_accesses > it->second) {
      std::ostringstream os;
      os << to_string(op.kind) << " op " << op.op << " by p" << op.proc << " took "
         << op.base_accesses << " base accesses, budget " << it->second;
      return Verdict::failure(op.op, os.str());
    }
  }
  return Verdict::ok();
}

Verdict check_label_precedence(const History& h, const std::string& var) {
  std::vector<const OpRecord*> labeled;
  for (const OpRecord* op : h.ops_on(var)) {
    if (is_update(op->kind) && op->completed() && op->label) labeled.push_back(op);
  }
  for (const OpRecord* a : labeled) {
    for (const OpRecord* b : labeled) {
      if (a->end < b->start && !(*a->label < *b->label)) {
        std::ostringstream os;
        os << "op " << a->id << " precedes op " << b->id << " but its label (" << a->label->seq
           << ",p" << a->label->pid << ") is not smaller than (" << b->label->seq << ",p"
           << b->label->pid << ")";
        return Verdict::failure(b->id, os.str());
      }
    }
  }
  return Verdict::ok();
}

}  // namespace wfreg
