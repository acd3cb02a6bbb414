#pragma once

#include <vector>

#include "wfreg/checkers.hpp"
#include "wfreg/constructions.hpp"
#include "wfreg/sim.hpp"

namespace wfreg {

/// Objects ordered by ascending label, one per process.
using ScanResult = std::vector<ScanEntry>;

/// Stable ascending sort by label. Throws std::invalid_argument on a
/// repeated owner.
ScanResult scan_order(std::vector<ScanEntry> entries);

/// Unbounded concurrent timestamp system over n 1-writer n-reader
/// registers T<p>, each holding (label, payload). Labeling collects all
/// labels and writes one past the largest; Scan collects and sorts.
/// Scans never write.
ProtocolSpec build_cts(std::size_t n, const TaggedOptions& opts = {});

/// Judges a history of Labelings and Scans on its timestamp variable:
///  (a) each process's Labelings carry strictly increasing labels,
///      starting above the initial label (0, p);
///  (b) if the latest Labelings by p and q preceding a Scan are related by
///      precedence, and no Labeling by p or q overlaps the Scan, the Scan
///      ranks them in that order;
///  (c) every Scan lists each process exactly once in strictly ascending
///      label order.
/// Throws HistoryError if the history has no well-formed timestamp
/// variable.
Verdict check_cts(const History& h);

}  // namespace wfreg
