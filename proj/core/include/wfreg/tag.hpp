#pragma once

#include <compare>
#include <cstdint>

namespace wfreg {

using ProcessId = std::uint32_t;
using Value = std::uint64_t;

/// Ordering token attached to written values and timestamp labels.
///
/// Tags compare lexicographically: first by sequence number, then by the
/// id of the process that produced them. The member order below makes the
/// defaulted comparison exactly that order.
struct Tag {
  std::uint64_t seq = 0;
  ProcessId pid = 0;

  friend constexpr auto operator<=>(const Tag&, const Tag&) = default;
};

constexpr bool tag_less(const Tag& a, const Tag& b) { return a < b; }

struct TaggedValue {
  Tag tag;
  Value val = 0;

  friend constexpr bool operator==(const TaggedValue&, const TaggedValue&) = default;
};

}  // namespace wfreg
