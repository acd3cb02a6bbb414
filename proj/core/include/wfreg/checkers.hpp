#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfreg/history.hpp"
#include "wfreg/sim.hpp"

namespace wfreg {

/// Raised when Safe or Regular is requested for a multiwriter variable.
class ClassificationError : public HistoryError {
 public:
  using HistoryError::HistoryError;
};

/// A linearization is an ordering of op ids on one variable.
using Linearization = std::vector<OpId>;

struct Verdict {
  bool pass = true;
  /// On failure: the offending operation.
  std::optional<OpId> violating_op;
  std::string explanation;
  /// On an Atomic pass: one witness order per checked variable.
  std::map<std::string, Linearization> linearizations;

  static Verdict ok() { return {}; }
  static Verdict failure(std::optional<OpId> op, std::string why) {
    Verdict v;
    v.pass = false;
    v.violating_op = op;
    v.explanation = std::move(why);
    return v;
  }
};

/// Checks every register variable of `h` at `level`. Timestamp variables
/// are rejected; use check_cts for those.
Verdict check_level(const History& h, SemanticsLevel level);

/// Checks a single variable of `h` at `level`.
Verdict check_variable(const History& h, const std::string& var, SemanticsLevel level);

/// Highest level whose check passes, or nullopt if even Safe fails.
std::optional<SemanticsLevel> classify(const History& h);

/// Independent atomicity oracle: tries every permutation of each
/// variable's operations. Refuses variables with more than
/// kBruteForceLimit operations.
inline constexpr std::size_t kBruteForceLimit = 8;
bool brute_force_atomic(const History& h);

/// True iff `order` contains every completed op on `var` (plus optionally
/// some pending writes), extends precedence and reproduces every read.
bool replays(const History& h, const std::string& var, const Linearization& order);

/// Passes iff every completed high-level operation in `e` stayed within
/// its kind's budget.
Verdict check_wait_free(const Execution& e, const StepBudget& budget);

/// True iff every pair of labeled updates on `var` related by precedence
/// carries increasing labels.
Verdict check_label_precedence(const History& h, const std::string& var);

}  // namespace wfreg
