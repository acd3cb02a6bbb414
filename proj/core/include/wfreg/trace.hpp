#pragma once

#include <string>
#include <string_view>

#include "wfreg/history.hpp"

namespace wfreg {

/// Thrown for any trace that is not valid JSON Lines in the trace schema or
/// that violates a History invariant.
class TraceError : public HistoryError {
 public:
  using HistoryError::HistoryError;
};

/// Parses a JSON Lines trace: one header object declaring the variables,
/// then one event per line with strictly increasing steps. Trailing lines
/// carrying an "ext" key are extension records and are skipped.
History parse_trace(std::string_view text);

/// Canonical trace text: the header line followed by every invoke/respond
/// event in step order, one per line, each line terminated by '\n'.
std::string serialize_trace(const History& h);

}  // namespace wfreg
