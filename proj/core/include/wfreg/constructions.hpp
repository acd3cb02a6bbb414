#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "wfreg/sim.hpp"
#include "wfreg/tag.hpp"

namespace wfreg {

/// Injective packing of a TaggedValue into one base-register value:
///
///   code = (seq * pids + pid) * values + val
///
/// with seq <= max_seq, pid < pids and val < values. The register domain is
/// (max_seq + 1) * pids * values; construction throws if that product
/// does not fit in a Value.
class TagCodec {
 public:
  TagCodec(std::uint64_t max_seq, std::uint64_t pids, Value values);

  Value encode(const TaggedValue& tv) const;
  TaggedValue decode(Value code) const;
  Value domain() const { return domain_; }
  std::uint64_t max_seq() const { return max_seq_; }

 private:
  std::uint64_t max_seq_;
  std::uint64_t pids_;
  Value values_;
  Value domain_;
};

/// Options shared by the tagged constructions.
struct TaggedOptions {
  Value domain = 2;   // high-level value domain
  Value init = 0;     // high-level initial value
  /// Largest sequence number a run can produce; sizes the base domains.
  std::uint64_t max_seq = 64;
  SemanticsLevel base = SemanticsLevel::Atomic;
};

/// One base register exposed directly: every high-level operation is a
/// single base access. Processes: 0 writes, 1..n_readers read. The
/// high-level variable inherits the base semantics.
ProtocolSpec build_passthrough(std::size_t n_readers, Value domain = 2,
                               SemanticsLevel base = SemanticsLevel::Atomic);

/// Regular 1-writer n-reader bit from one safe base bit. The writer skips
/// base writes that would not change the bit.
///
/// Processes: 0 writes, 1..n_readers read.
ProtocolSpec build_regular_bit(std::size_t n_readers, Value domain = 2,
                               SemanticsLevel base = SemanticsLevel::Safe);

/// Atomic 1-writer n-reader register from n^2 1-writer 1-reader registers.
///
/// Processes: 0 writes, 1..n read. Base registers are W<j> (writer to
/// reader j) and c<i>_<j> (reader i to reader j). With `writeback` off,
/// readers never write c registers; that variant is not atomic.
ProtocolSpec build_multireader(std::size_t n, const TaggedOptions& opts = {},
                               bool writeback = true);

/// Atomic n-writer n-reader register from n 1-writer n-reader registers
/// R<p>. Processes 0..n-1 may all read and write.
ProtocolSpec build_multiwriter(std::size_t n, const TaggedOptions& opts = {});

/// Next tag for process `pid` after collecting `seen`: one past the
/// largest sequence number, tie-broken by pid.
Tag next_tag(std::span<const Tag> seen, ProcessId pid);

}  // namespace wfreg
