#include "wfreg/constructions.hpp"

#include <algorithm>
#include <limits>

namespace wfreg {

namespace {

Value checked_mul(Value a, Value b) {
  if (a != 0 && b > std::numeric_limits<Value>::max() / a) {
    throw std::overflow_error("tagged register domain does not fit in 64 bits");
  }
  return a * b;
}

}  // namespace

TagCodec::TagCodec(std::uint64_t max_seq, std::uint64_t pids, Value values)
    : max_seq_(max_seq), pids_(pids), values_(values) {
  if (pids == 0 || values == 0) throw std::invalid_argument("empty tag codec");
  if (max_seq == std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("tagged register domain does not fit in 64 bits");
  }
  domain_ = checked_mul(checked_mul(max_seq + 1, pids), values);
}

Value TagCodec::encode(const TaggedValue& tv) const {
  if (tv.tag.seq > max_seq_) throw std::overflow_error("sequence number exceeds the sized domain");
  if (tv.tag.pid >= pids_ || tv.val >= values_) throw std::out_of_range("tagged value out of range");
  return (tv.tag.seq * pids_ + tv.tag.pid) * values_ + tv.val;
}

TaggedValue TagCodec::decode(Value code) const {
  if (code >= domain_) throw std::out_of_range("code outside tagged domain");
  TaggedValue tv;
  tv.val = code % values_;
  code /= values_;
  tv.tag.pid = static_cast<ProcessId>(code % pids_);
  tv.tag.seq = code / pids_;
  return tv;
}

Tag next_tag(std::span<const Tag> seen, ProcessId pid) {
  std::uint64_t top = 0;
  for (const Tag& t : seen) top = std::max(top, t.seq);
  if (top == std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("tag overflow");
  return Tag{top + 1, pid};
}

namespace {

std::set<ProcessId> range(ProcessId from, ProcessId to) {
  std::set<ProcessId> out;
  for (ProcessId p = from; p < to; ++p) out.insert(p);
  return out;
}

// --- regular bit -----------------------------------------------------------

class BitWriter final : public ProcessProgram {
 public:
  explicit BitWriter(Value init) : last_(init) {}

  Action invoke(const OpRequest& req) override {
    if (req.arg == last_) return Action::finish();
    pending_ = req.arg;
    return Action::write(0, req.arg);
  }
  Action resume(Value) override {
    last_ = pending_;
    return Action::finish();
  }

 private:
  Value last_;
  Value pending_ = 0;
};

class DirectWriter final : public ProcessProgram {
 public:
  Action invoke(const OpRequest& req) override { return Action::write(0, req.arg); }
  Action resume(Value) override { return Action::finish(); }
};

class BitReader final : public ProcessProgram {
 public:
  Action invoke(const OpRequest&) override { return Action::read(0); }
  Action resume(Value v) override { return Action::finish(OpResult{v, {}, {}}); }
};

// --- multireader -----------------------------------------------------------

struct MultireaderLayout {
  std::size_t n;
  // W<j> for reader j is register j-1; c<i>_<j> follows, row-major over i
  // with the diagonal skipped.
  std::size_t to_reader(std::size_t j) const { return j - 1; }
  std::size_t between(std::size_t i, std::size_t j) const {
    return n + (i - 1) * (n - 1) + (j < i ? j - 1 : j - 2);
  }
};

class MultireaderWriter final : public ProcessProgram {
 public:
  MultireaderWriter(MultireaderLayout layout, TagCodec codec)
      : layout_(layout), codec_(codec) {}

  Action invoke(const OpRequest& req) override {
    ++seq_;
    current_ = codec_.encode(TaggedValue{Tag{seq_, 0}, req.arg});
    next_reader_ = 1;
    return Action::write(layout_.to_reader(next_reader_), current_);
  }
  Action resume(Value) override {
    if (++next_reader_ > layout_.n) return Action::finish();
    return Action::write(layout_.to_reader(next_reader_), current_);
  }

 private:
  MultireaderLayout layout_;
  TagCodec codec_;
  std::uint64_t seq_ = 0;
  Value current_ = 0;
  std::size_t next_reader_ = 0;
};

class MultireaderReader final : public ProcessProgram {
 public:
  MultireaderReader(std::size_t self, MultireaderLayout layout, TagCodec codec, TaggedValue init,
                    bool writeback)
      : self_(self), layout_(layout), codec_(codec), memory_(init), writeback_(writeback) {
    for (std::size_t i = 1; i <= layout.n; ++i) {
      if (i != self) peers_.push_back(i);
    }
  }

  Action invoke(const OpRequest&) override {
    best_ = memory_;
    phase_ = Phase::ReadWriter;
    return Action::read(layout_.to_reader(self_));
  }

  Action resume(Value result) override {
    switch (phase_) {
      case Phase::ReadWriter:
      case Phase::ReadPeers: {
        consider(codec_.decode(result));
        if (phase_ == Phase::ReadWriter) {
          phase_ = Phase::ReadPeers;
          cursor_ = 0;
        } else {
          ++cursor_;
        }
        if (cursor_ < peers_.size()) return Action::read(layout_.between(peers_[cursor_], self_));
        memory_ = best_;
        if (!writeback_ || peers_.empty()) return done();
        phase_ = Phase::WriteBack;
        cursor_ = 0;
        return Action::write(layout_.between(self_, peers_[0]), codec_.encode(best_));
      }
      case Phase::WriteBack:
        if (++cursor_ < peers_.size()) {
          return Action::write(layout_.between(self_, peers_[cursor_]), codec_.encode(best_));
        }
        return done();
    }
    return done();
  }

 private:
  enum class Phase { ReadWriter, ReadPeers, WriteBack };

  void consider(const TaggedValue& tv) {
    if (best_.tag < tv.tag) best_ = tv;
  }
  Action done() { return Action::finish(OpResult{best_.val, {}, {}}); }

  std::size_t self_;
  MultireaderLayout layout_;
  TagCodec codec_;
  TaggedValue memory_;
  bool writeback_;
  std::vector<std::size_t> peers_;
  TaggedValue best_;
  Phase phase_ = Phase::ReadWriter;
  std::size_t cursor_ = 0;
};

// --- multiwriter -----------------------------------------------------------

class MultiwriterProcess final : public ProcessProgram {
 public:
  MultiwriterProcess(ProcessId self, std::size_t n, TagCodec codec)
      : self_(self), n_(n), codec_(codec) {}

  Action invoke(const OpRequest& req) override {
    request_ = req;
    collected_.clear();
    writing_ = false;
    return Action::read(0);
  }

  Action resume(Value result) override {
    if (writing_) return Action::finish(OpResult{std::nullopt, written_, {}});
    collected_.push_back(codec_.decode(result));
    if (collected_.size() < n_) return Action::read(collected_.size());

    if (request_.kind == OpKind::Read) {
      auto top = std::max_element(collected_.begin(), collected_.end(),
                                  [](const TaggedValue& a, const TaggedValue& b) {
                                    return tag_less(a.tag, b.tag);
                                  });
      return Action::finish(OpResult{top->val, {}, {}});
    }
    std::vector<Tag> tags;
    for (const auto& tv : collected_) tags.push_back(tv.tag);
    written_ = next_tag(tags, self_);
    writing_ = true;
    return Action::write(self_, codec_.encode(TaggedValue{written_, request_.arg}));
  }

 private:
  ProcessId self_;
  std::size_t n_;
  TagCodec codec_;
  OpRequest request_;
  std::vector<TaggedValue> collected_;
  Tag written_;
  bool writing_ = false;
};

void check_tagged(const TaggedOptions& opts) {
  if (opts.domain < 2) throw std::invalid_argument("domain must be at least 2");
  if (opts.init >= opts.domain) throw std::invalid_argument("initial value outside domain");
}

}  // namespace

ProtocolSpec build_passthrough(std::size_t n_readers, Value domain, SemanticsLevel base) {
  if (n_readers < 1) throw std::invalid_argument("passthrough needs at least one reader");
  if (domain < 2) throw std::invalid_argument("domain must be at least 2");
  const auto readers = range(1, static_cast<ProcessId>(n_readers + 1));

  auto layout = std::make_shared<ProtocolLayout>();
  layout->var_name = "X";
  layout->variable = VarDecl{domain, 0, {0}, readers, false};
  layout->registers.push_back(BaseRegisterSpec{"reg", 0, readers, domain, 0, base});

  ProtocolSpec spec;
  spec.name = "passthrough";
  spec.processes = n_readers + 1;
  spec.layout = std::move(layout);
  spec.budget = {{OpKind::Write, 1}, {OpKind::Read, 1}};
  spec.guarantee = base;
  spec.make_program = [](ProcessId p) -> std::unique_ptr<ProcessProgram> {
    if (p == 0) return std::make_unique<DirectWriter>();
    return std::make_unique<BitReader>();
  };
  return spec;
}

ProtocolSpec build_regular_bit(std::size_t n_readers, Value domain, SemanticsLevel base) {
  if (domain != 2) throw std::invalid_argument("regular_bit needs a boolean domain");
  if (n_readers < 1) throw std::invalid_argument("regular_bit needs at least one reader");
  const auto readers = range(1, static_cast<ProcessId>(n_readers + 1));

  auto layout = std::make_shared<ProtocolLayout>();
  layout->var_name = "X";
  layout->variable = VarDecl{2, 0, {0}, readers, false};
  layout->registers.push_back(BaseRegisterSpec{"bit", 0, readers, 2, 0, base});

  ProtocolSpec spec;
  spec.name = "regular_bit";
  spec.processes = n_readers + 1;
  spec.layout = std::move(layout);
  spec.budget = {{OpKind::Write, 1}, {OpKind::Read, 1}};
  spec.guarantee = SemanticsLevel::Regular;
  spec.make_program = [](ProcessId p) -> std::unique_ptr<ProcessProgram> {
    if (p == 0) return std::make_unique<BitWriter>(0);
    return std::make_unique<BitReader>();
  };
  return spec;
}

ProtocolSpec build_multireader(std::size_t n, const TaggedOptions& opts, bool writeback) {
  if (n < 1) throw std::invalid_argument("multireader needs at least one reader");
  check_tagged(opts);
  const TagCodec codec(opts.max_seq, 1, opts.domain);
  const TaggedValue init{Tag{0, 0}, opts.init};
  const Value init_code = codec.encode(init);
  const MultireaderLayout shape{n};

  auto layout = std::make_shared<ProtocolLayout>();
  layout->var_name = "X";
  layout->variable = VarDecl{opts.domain, opts.init, {0}, range(1, static_cast<ProcessId>(n + 1)), false};
  for (std::size_t j = 1; j <= n; ++j) {
    layout->registers.push_back(BaseRegisterSpec{"W" + std::to_string(j), 0,
                                                 {static_cast<ProcessId>(j)}, codec.domain(),
                                                 init_code, opts.base});
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (i == j) continue;
      layout->registers.push_back(BaseRegisterSpec{
          "c" + std::to_string(i) + "_" + std::to_string(j), static_cast<ProcessId>(i),
          {static_cast<ProcessId>(j)}, codec.domain(), init_code, opts.base});
    }
  }

  ProtocolSpec spec;
  spec.name = writeback ? "multireader" : "multireader_nowriteback";
  spec.processes = n + 1;
  spec.layout = std::move(layout);
  spec.budget = {{OpKind::Write, n}, {OpKind::Read, writeback ? 2 * n - 1 : n}};
  spec.guarantee = writeback ? SemanticsLevel::Atomic : SemanticsLevel::Regular;
  spec.make_program = [=](ProcessId p) -> std::unique_ptr<ProcessProgram> {
    if (p == 0) return std::make_unique<MultireaderWriter>(shape, codec);
    return std::make_unique<MultireaderReader>(p, shape, codec, init, writeback);
  };
  return spec;
}

ProtocolSpec build_multiwriter(std::size_t n, const TaggedOptions& opts) {
  if (n < 1) throw std::invalid_argument("multiwriter needs at least one process");
  check_tagged(opts);
  const TagCodec codec(opts.max_seq, n, opts.domain);
  const auto all = range(0, static_cast<ProcessId>(n));

  auto layout = std::make_shared<ProtocolLayout>();
  layout->var_name = "X";
  layout->variable = VarDecl{opts.domain, opts.init, all, all, false};
  for (ProcessId p = 0; p < n; ++p) {
    layout->registers.push_back(BaseRegisterSpec{"R" + std::to_string(p), p, all, codec.domain(),
                                                 codec.encode({Tag{0, p}, opts.init}), opts.base});
  }

  ProtocolSpec spec;
  spec.name = "multiwriter";
  spec.processes = n;
  spec.layout = std::move(layout);
  spec.budget = {{OpKind::Write, n + 1}, {OpKind::Read, n}};
  spec.make_program = [=](ProcessId p) -> std::unique_ptr<ProcessProgram> {
    return std::make_unique<MultiwriterProcess>(p, n, codec);
  };
  return spec;
}

}  // namespace wfreg
