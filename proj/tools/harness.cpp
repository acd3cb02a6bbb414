#include "harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wfreg/checkers.hpp"
#include "wfreg/constructions.hpp"
#include "wfreg/timestamp.hpp"
#include "wfreg/trace.hpp"

namespace wfreg::cli {

using nlohmann::json;

namespace {

std::uint64_t natural_field(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ScenarioError(std::string("\"") + key + "\" must be a natural");
  return v.get<std::uint64_t>();
}

OpRequest parse_op(const json& j) {
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
    throw ScenarioError("workload entries look like {\"op\": \"W\", \"arg\": 1}");
  }
  const std::string op = j["op"].get<std::string>();
  OpRequest req;
  if (op == "W") {
    req.kind = OpKind::Write;
  } else if (op == "R") {
    req.kind = OpKind::Read;
  } else if (op == "L") {
    req.kind = OpKind::Label;
  } else if (op == "S") {
    req.kind = OpKind::Scan;
  } else {
    throw ScenarioError("unknown workload op \"" + op + "\"");
  }
  if (is_update(req.kind)) {
    if (!j.contains("arg")) throw ScenarioError("workload op " + op + " needs an \"arg\"");
    req.arg = natural_field(j, "arg");
  } else if (j.contains("arg")) {
    throw ScenarioError("workload op " + op + " takes no argument");
  }
  return req;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + path);
  out << text;
  return path;
}

std::string level_name(SemanticsLevel l) { return std::string(to_string(l)); }

/// Levels that make sense for the high-level variable of `spec`.
std::vector<std::string> applicable_levels(const ProtocolSpec& spec) {
  const VarDecl& var = spec.layout->variable;
  if (var.timestamp) return {"cts"};
  if (!var.single_writer()) return {"atomic"};
  return {"safe", "regular", "atomic"};
}

Verdict judge(const History& h, const std::string& level) {
  if (level == "cts") return check_cts(h);
  return check_level(h, *parse_level(level));
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");

  Scenario s;
  s.raw = j;
  try {
    if (!j.contains("construction") || !j["construction"].is_string()) {
      throw ScenarioError("scenario needs a \"construction\" name");
    }
    s.construction = j["construction"].get<std::string>();
    s.n = natural_field(j, "n");
    if (s.n < 1) throw ScenarioError("\"n\" must be at least 1");
    if (j.contains("base_semantics")) {
      auto level = parse_level(j["base_semantics"].get<std::string>());
      if (!level) throw ScenarioError("base_semantics must be safe, regular or atomic");
      s.base_semantics = level;
    }
    if (j.contains("domain")) s.domain = natural_field(j, "domain");
    if (j.contains("init")) s.init = natural_field(j, "init");
    if (j.contains("mode")) {
      s.mode = j["mode"].get<std::string>();
      if (s.mode != "enumerate" && s.mode != "random") {
        throw ScenarioError("mode must be enumerate or random");
      }
    }
    if (j.contains("seed")) s.seed = natural_field(j, "seed");
    if (j.contains("limits")) {
      const json& lim = j["limits"];
      if (lim.contains("max_executions")) s.limits.max_executions = natural_field(lim, "max_executions");
      if (lim.contains("max_steps")) s.limits.max_steps = natural_field(lim, "max_steps");
    }
    if (!j.contains("workload") || !j["workload"].is_array()) {
      throw ScenarioError("scenario needs a \"workload\" array of per-process op lists");
    }
    for (const auto& proc : j["workload"]) {
      if (!proc.is_array()) throw ScenarioError("each workload entry must be an array of ops");
      auto& ops = s.workload.emplace_back();
      for (const auto& op : proc) ops.push_back(parse_op(op));
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("bad scenario field: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

ProtocolSpec build_protocol(const Scenario& s) {
  std::uint64_t updates = 0;
  Value top = std::max<Value>(1, s.init);
  for (const auto& ops : s.workload) {
    for (const auto& op : ops) {
      if (is_update(op.kind)) {
        ++updates;
        top = std::max(top, op.arg);
      }
    }
  }

  TaggedOptions opts;
  opts.domain = s.domain.value_or(top + 1);
  opts.init = s.init;
  opts.max_seq = std::max<std::uint64_t>(1, updates);
  opts.base = s.base_semantics.value_or(SemanticsLevel::Atomic);

  ProtocolSpec spec;
  try {
    if (s.construction == "regular_bit") {
      spec = build_regular_bit(s.n, s.domain.value_or(2),
                               s.base_semantics.value_or(SemanticsLevel::Safe));
    } else if (s.construction == "passthrough") {
      spec = build_passthrough(s.n, s.domain.value_or(top + 1), opts.base);
    } else if (s.construction == "multireader") {
      spec = build_multireader(s.n, opts, true);
    } else if (s.construction == "multireader_nowriteback") {
      spec = build_multireader(s.n, opts, false);
    } else if (s.construction == "multiwriter") {
      spec = build_multiwriter(s.n, opts);
    } else if (s.construction == "cts") {
      spec = build_cts(s.n, opts);
    } else {
      throw ScenarioError("unknown construction \"" + s.construction + "\"");
    }
    validate_workload(spec, s.workload);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
  return spec;
}

json Report::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["construction"] = construction;
  j["check"] = check;
  j["executions"] = executions;
  j["truncated"] = truncated;
  json v = json::object();
  for (const auto& [level, c] : verdicts) v[level] = {{"pass", c.pass}, {"fail", c.fail}};
  j["verdicts"] = v;
  j["wait_free"] = {{"pass", wait_free.pass}, {"fail", wait_free.fail}};
  j["max_base_accesses"] = max_base_accesses;
  if (counterexample) {
    j["counterexample"] = {{"execution", counterexample->execution},
                           {"explanation", counterexample->explanation},
                           {"trace", counterexample->trace_file}};
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = load_scenario(opts.config);
    const ProtocolSpec spec = build_protocol(s);
    const std::uint64_t seed = opts.seed.value_or(s.seed);
    const Execution e = random_execution(spec, s.workload, seed);
    const std::string trace = write_file(opts.out_dir, "trace.jsonl", serialize_execution(e));
    write_file(opts.out_dir, "base_trace.jsonl", serialize_trace(extract_history(e, Scope::Base)));
    out << "simulate " << spec.name << " seed=" << seed << ": " << e.ops.size() << " ops, "
        << e.events.size() << " events, " << e.decisions.size() << " decisions -> " << trace
        << "\n";
    return kPass;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }
}

int cmd_enumerate(const EnumerateOptions& opts, std::ostream& out, std::ostream& err) {
  Scenario s;
  ProtocolSpec spec;
  std::string check;
  std::vector<std::string> levels;
  try {
    s = load_scenario(opts.config);
    if (s.mode != "enumerate") throw ScenarioError("scenario mode is not enumerate");
    spec = build_protocol(s);
    if (opts.max_executions) s.limits.max_executions = *opts.max_executions;
    if (opts.max_steps) s.limits.max_steps = *opts.max_steps;
    levels = applicable_levels(spec);
    check = opts.check.value_or(spec.layout->variable.timestamp ? "cts"
                                                                 : level_name(spec.guarantee));
    if (std::find(levels.begin(), levels.end(), check) == levels.end()) {
      throw ScenarioError("level \"" + check + "\" does not apply to " + spec.name);
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }

  Report report;
  report.scenario = s.raw;
  report.construction = spec.name;
  report.check = check;
  for (const auto& l : levels) report.verdicts[l];

  std::optional<std::string> counterexample_text;
  const EnumerationStats stats =
      enumerate_executions(spec, s.workload, s.limits, [&](const Execution& e) {
        const History h = extract_history(e, Scope::High);
        for (const auto& level : levels) {
          const Verdict v = judge(h, level);
          auto& c = report.verdicts[level];
          (v.pass ? c.pass : c.fail)++;
          if (!v.pass && level == check && !report.counterexample) {
            report.counterexample = Report::Counterexample{report.verdicts[level].pass +
                                                               report.verdicts[level].fail - 1,
                                                           v.explanation, "counterexample.jsonl"};
            counterexample_text = serialize_execution(e);
          }
        }
        const Verdict wf = check_wait_free(e, spec.budget);
        (wf.pass ? report.wait_free.pass : report.wait_free.fail)++;
        for (const auto& op : e.ops) {
          auto& m = report.max_base_accesses[std::string(to_string(op.kind))];
          m = std::max(m, op.base_accesses);
        }
        return true;
      });
  report.executions = stats.executions;
  report.truncated = stats.truncated;

  try {
    if (counterexample_text) write_file(opts.out_dir, "counterexample.jsonl", *counterexample_text);
    write_file(opts.out_dir, "report.json", report.to_json().dump(2) + "\n");
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }

  const LevelCounts& c = report.verdicts[check];
  out << "enumerate " << spec.name << ": " << report.executions << " executions"
      << (report.truncated ? " (truncated)" : "") << ", " << check << " pass " << c.pass
      << " fail " << c.fail << ", wait-free fail " << report.wait_free.fail << "\n";
  if (report.counterexample) {
    out << "counterexample (execution " << report.counterexample->execution
        << "): " << report.counterexample->explanation << "\n";
    return kSemanticFailure;
  }
  return report.truncated ? kTruncated : kPass;
}

int cmd_check(const CheckOptions& opts, std::ostream& out, std::ostream& err) {
  History h;
  try {
    h = parse_trace(read_file(opts.trace));
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }

  try {
    if (opts.level == "classify") {
      const auto level = classify(h);
      out << (level ? level_name(*level) : std::string("none")) << "\n";
      return level ? kPass : kSemanticFailure;
    }
    if (opts.level != "cts" && !parse_level(opts.level)) {
      throw ScenarioError("unknown level \"" + opts.level + "\"");
    }
    const Verdict v = judge(h, opts.level);
    if (!v.pass) {
      out << "fail: " << v.explanation << "\n";
      return kSemanticFailure;
    }
    out << "pass";
    for (const auto& [var, order] : v.linearizations) {
      out << " " << var << ":";
      for (OpId id : order) out << " " << id;
    }
    out << "\n";
    return kPass;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and verify wait-free register constructions"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run one seeded random execution");
  simulate->add_option("--config", sim.config, "Scenario config (JSON)")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "Decision generator seed");
  simulate->add_option("--out", sim.out_dir, "Output directory");

  EnumerateOptions en;
  std::string check_level;
  std::uint64_t max_exec = 0;
  std::size_t max_steps = 0;
  auto* enumerate = app.add_subcommand("enumerate", "Enumerate every execution and check each");
  enumerate->add_option("--config", en.config, "Scenario config (JSON)")->required();
  auto* check_opt = enumerate->add_option("--check", check_level, "safe|regular|atomic|cts");
  enumerate->add_option("--out", en.out_dir, "Output directory");
  auto* exec_opt = enumerate->add_option("--max-executions", max_exec, "Execution limit");
  auto* steps_opt = enumerate->add_option("--max-steps", max_steps, "Events per execution limit");

  CheckOptions ch;
  auto* check = app.add_subcommand("check", "Check a trace file");
  check->add_option("trace", ch.trace, "Trace (JSON Lines)")->required();
  check->add_option("--level", ch.level, "safe|regular|atomic|cts|classify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  if (simulate->parsed()) {
    if (seed_opt->count() > 0) sim.seed = seed;
    return cmd_simulate(sim, out, err);
  }
  if (enumerate->parsed()) {
    if (check_opt->count() > 0) en.check = check_level;
    if (exec_opt->count() > 0) en.max_executions = max_exec;
    if (steps_opt->count() > 0) en.max_steps = max_steps;
    return cmd_enumerate(en, out, err);
  }
  return cmd_check(ch, out, err);
}

}  // namespace wfreg::cli
