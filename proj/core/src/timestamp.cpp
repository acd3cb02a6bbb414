#include "wfreg/timestamp.hpp"

#include <algorithm>
#include <sstream>

namespace wfreg {

ScanResult scan_order(std::vector<ScanEntry> entries) {
  std::set<ProcessId> owners;
  for (const auto& e : entries) {
    if (!owners.insert(e.owner).second) {
      throw std::invalid_argument("duplicate owner p" + std::to_string(e.owner) + " in scan");
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ScanEntry& a, const ScanEntry& b) { return tag_less(a.tag, b.tag); });
  return entries;
}

namespace {

class CtsProcess final : public ProcessProgram {
 public:
  CtsProcess(ProcessId self, std::size_t n, TagCodec codec) : self_(self), n_(n), codec_(codec) {}

  Action invoke(const OpRequest& req) override {
    request_ = req;
    collected_.clear();
    writing_ = false;
    return Action::read(0);
  }

  Action resume(Value result) override {
    if (writing_) return Action::finish(OpResult{std::nullopt, label_, {}});
    collected_.push_back(codec_.decode(result));
    if (collected_.size() < n_) return Action::read(collected_.size());

    if (request_.kind == OpKind::Scan) {
      std::vector<ScanEntry> entries;
      for (std::size_t p = 0; p < n_; ++p) {
        entries.push_back(
            ScanEntry{static_cast<ProcessId>(p), collected_[p].tag, collected_[p].val});
      }
      return Action::finish(OpResult{std::nullopt, std::nullopt, scan_order(std::move(entries))});
    }
    std::vector<Tag> tags;
    for (const auto& tv : collected_) tags.push_back(tv.tag);
    label_ = next_tag(tags, self_);
    writing_ = true;
    return Action::write(self_, codec_.encode(TaggedValue{label_, request_.arg}));
  }

 private:
  ProcessId self_;
  std::size_t n_;
  TagCodec codec_;
  OpRequest request_;
  std::vector<TaggedValue> collected_;
  Tag label_;
  bool writing_ = false;
};

std::string tag_text(const Tag& t) {
  return "(" + std::to_string(t.seq) + ",p" + std::to_string(t.pid) + ")";
}

}  // namespace

ProtocolSpec build_cts(std::size_t n, const TaggedOptions& opts) {
  if (n < 1) throw std::invalid_argument("cts needs at least one process");
  if (opts.domain < 2 || opts.init >= opts.domain) throw std::invalid_argument("bad payload domain");
  const TagCodec codec(opts.max_seq, n, opts.domain);
  std::set<ProcessId> all;
  for (ProcessId p = 0; p < n; ++p) all.insert(p);

  auto layout = std::make_shared<ProtocolLayout>();
  layout->var_name = "cts";
  layout->variable = VarDecl{opts.domain, opts.init, all, all, true};
  for (ProcessId p = 0; p < n; ++p) {
    layout->registers.push_back(BaseRegisterSpec{"T" + std::to_string(p), p, all, codec.domain(),
                                                 codec.encode({Tag{0, p}, opts.init}), opts.base});
  }

  ProtocolSpec spec;
  spec.name = "cts";
  spec.processes = n;
  spec.layout = std::move(layout);
  spec.budget = {{OpKind::Label, n + 1}, {OpKind::Scan, n}};
  spec.make_program = [=](ProcessId p) -> std::unique_ptr<ProcessProgram> {
    return std::make_unique<CtsProcess>(p, n, codec);
  };
  return spec;
}

Verdict check_cts(const History& h) {
  const std::string* var = nullptr;
  for (const auto& [name, decl] : h.vars()) {
    if (!decl.timestamp) continue;
    if (var != nullptr) throw HistoryError("malformed CTS history: several timestamp variables");
    var = &name;
  }
  if (var == nullptr) throw HistoryError("malformed CTS history: no timestamp variable");
  const VarDecl& decl = h.var(*var);
  const auto ops = h.ops_on(*var);

  std::map<ProcessId, std::vector<const OpRecord*>> labelings;
  for (ProcessId p : decl.writers) labelings[p];
  for (const OpRecord* op : ops) {
    if (op->kind != OpKind::Label) continue;
    if (op->completed() && !op->label) {
      throw HistoryError("malformed CTS history: labeling op " + std::to_string(op->id) +
                         " has no label");
    }
    labelings[op->proc].push_back(op);
  }

  // (a) per-process label monotonicity
  for (const auto& [p, mine] : labelings) {
    Tag prev{0, p};
    for (const OpRecord* op : mine) {
      if (!op->completed()) continue;
      if (!(prev < *op->label)) {
        return Verdict::failure(op->id, "labeling op " + std::to_string(op->id) + " by p" +
                                            std::to_string(p) + " got label " +
                                            tag_text(*op->label) + ", not above " + tag_text(prev));
      }
      prev = *op->label;
    }
  }

  for (const OpRecord* scan : ops) {
    if (scan->kind != OpKind::Scan || !scan->completed()) continue;
    const std::string who = "scan op " + std::to_string(scan->id);

    // (c) complete and internally sorted
    std::map<ProcessId, std::size_t> rank;
    for (std::size_t i = 0; i < scan->scan.size(); ++i) {
      const ScanEntry& e = scan->scan[i];
      if (!decl.writers.contains(e.owner) || !rank.emplace(e.owner, i).second) {
        return Verdict::failure(scan->id, who + " lists p" + std::to_string(e.owner) +
                                              " more than once or without an object");
      }
      if (i > 0 && !(scan->scan[i - 1].tag < e.tag)) {
        return Verdict::failure(scan->id, who + " is not in ascending label order");
      }
    }
    if (rank.size() != decl.writers.size()) {
      return Verdict::failure(scan->id, who + " does not list every process");
    }

    // (b) precedence between the latest labelings is respected
    struct Latest {
      const OpRecord* op = nullptr;  // nullptr: initial label
      bool contested = false;        // some labeling overlaps the scan
    };
    std::map<ProcessId, Latest> latest;
    for (const auto& [p, mine] : labelings) {
      Latest& l = latest[p];
      for (const OpRecord* op : mine) {
        if (op->end < scan->start) {
          l.op = op;
        } else if (op->start < scan->end) {
          l.contested = true;
        }
      }
    }
    for (const auto& [p, lp] : latest) {
      for (const auto& [q, lq] : latest) {
        if (p == q || lp.contested || lq.contested || lq.op == nullptr) continue;
        const bool ordered = lp.op == nullptr || lp.op->end < lq.op->start;
        if (ordered && rank.at(p) > rank.at(q)) {
          return Verdict::failure(scan->id, who + " ranks p" + std::to_string(q) + " before p" +
                                                std::to_string(p) +
                                                " although p" + std::to_string(p) +
                                                "'s labeling precedes p" + std::to_string(q) + "'s");
        }
      }
    }
  }
  return Verdict::ok();
}

}  // namespace wfreg
