#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wfreg/sim.hpp"

namespace wfreg::cli {

/// Stable exit-code contract of the command line tool.
enum ExitCode : int {
  kPass = 0,
  kSemanticFailure = 1,
  kInputError = 2,
  kTruncated = 3,
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string construction;
  std::size_t n = 1;
  std::optional<SemanticsLevel> base_semantics;
  std::optional<Value> domain;
  Value init = 0;
  Workload workload;
  std::string mode = "enumerate";
  std::uint64_t seed = 0;
  EnumerationLimits limits;
  nlohmann::json raw;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
ProtocolSpec build_protocol(const Scenario& s);

struct LevelCounts {
  std::uint64_t pass = 0;
  std::uint64_t fail = 0;
};

struct Report {
  nlohmann::json scenario;
  std::string construction;
  std::string check;
  std::uint64_t executions = 0;
  bool truncated = false;
  std::map<std::string, LevelCounts> verdicts;
  LevelCounts wait_free;
  std::map<std::string, std::size_t> max_base_accesses;
  struct Counterexample {
    std::uint64_t execution = 0;
    std::string explanation;
    std::string trace_file;
  };
  std::optional<Counterexample> counterexample;

  nlohmann::json to_json() const;
};

struct SimulateOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

struct EnumerateOptions {
  std::string config;
  std::optional<std::string> check;
  std::string out_dir = ".";
  std::optional<std::uint64_t> max_executions;
  std::optional<std::size_t> max_steps;
};

struct CheckOptions {
  std::string trace;
  std::string level = "atomic";
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_enumerate(const EnumerateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_check(const CheckOptions& opts, std::ostream& out, std::ostream& err);

/// Full command line entry point; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wfreg::cli
