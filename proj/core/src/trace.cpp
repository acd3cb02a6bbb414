#include "wfreg/trace.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace wfreg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw TraceError("trace line " + std::to_string(line) + ": " + what);
}

std::uint64_t natural(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(line, std::string("missing field \"") + key + "\"");
  if (!it->is_number_unsigned()) bad(line, std::string("field \"") + key + "\" must be a natural");
  return it->get<std::uint64_t>();
}

std::uint64_t natural(const json& v, std::size_t line) {
  if (!v.is_number_unsigned()) bad(line, "expected a natural number");
  return v.get<std::uint64_t>();
}

std::set<ProcessId> proc_set(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) bad(line, std::string("\"") + key + "\" must be an array");
  std::set<ProcessId> out;
  for (const auto& p : *it) out.insert(static_cast<ProcessId>(natural(p, line)));
  return out;
}

std::map<std::string, VarDecl> parse_header(const json& hdr, std::size_t line) {
  if (!hdr.is_object()) bad(line, "header must be an object");
  if (natural(hdr, "version", line) != 1) bad(line, "unsupported trace version");
  auto vars_it = hdr.find("vars");
  if (vars_it == hdr.end() || !vars_it->is_object()) bad(line, "header needs a \"vars\" object");

  std::map<std::string, VarDecl> vars;
  for (const auto& [name, spec] : vars_it->items()) {
    if (!spec.is_object()) bad(line, "variable " + name + " must be an object");
    VarDecl decl;
    decl.domain = natural(spec, "domain", line);
    decl.init = natural(spec, "init", line);
    decl.writers = proc_set(spec, "writers", line);
    decl.readers = proc_set(spec, "readers", line);
    if (auto t = spec.find("type"); t != spec.end()) {
      if (*t == "timestamp") {
        decl.timestamp = true;
      } else if (*t != "register") {
        bad(line, "unknown variable type for " + name);
      }
    }
    vars.emplace(name, std::move(decl));
  }
  return vars;
}

Tag parse_tag(const json& v, std::size_t line) {
  if (!v.is_array() || v.size() != 2) bad(line, "label must be [seq, pid]");
  return Tag{natural(v[0], line), static_cast<ProcessId>(natural(v[1], line))};
}

std::vector<ScanEntry> parse_scan(const json& v, std::size_t line) {
  if (!v.is_array()) bad(line, "scan must be an array");
  std::vector<ScanEntry> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 4) bad(line, "scan entry must be [owner, seq, pid, payload]");
    out.push_back(ScanEntry{static_cast<ProcessId>(natural(e[0], line)),
                            Tag{natural(e[1], line), static_cast<ProcessId>(natural(e[2], line))},
                            natural(e[3], line)});
  }
  return out;
}

}  // namespace

History parse_trace(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    lines.emplace_back(line_no, line);
  }
  if (lines.empty()) throw TraceError("empty trace: missing header");

  auto parse_json = [](std::size_t n, std::string_view line) {
    try {
      return json::parse(line);
    } catch (const json::parse_error& e) {
      bad(n, std::string("malformed JSON: ") + e.what());
    }
  };

  auto vars = parse_header(parse_json(lines[0].first, lines[0].second), lines[0].first);

  std::vector<OpRecord> ops;
  std::unordered_map<OpId, std::size_t> open;  // op id -> index into ops
  std::unordered_map<OpId, bool> seen;
  std::optional<StepIndex> last_step;
  bool in_extensions = false;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [n, raw] = lines[i];
    json ev = parse_json(n, raw);
    if (!ev.is_object()) bad(n, "event must be an object");
    if (ev.contains("ext")) {
      in_extensions = true;
      continue;
    }
    if (in_extensions) bad(n, "event after extension record");

    const StepIndex step = natural(ev, "step", n);
    if (last_step) {
      if (step == *last_step) bad(n, "duplicate step index " + std::to_string(step));
      if (step < *last_step) bad(n, "steps must be strictly increasing");
    }
    last_step = step;

    const OpId id = natural(ev, "op", n);
    const auto proc = static_cast<ProcessId>(natural(ev, "proc", n));
    auto var_it = ev.find("var");
    if (var_it == ev.end() || !var_it->is_string()) bad(n, "missing field \"var\"");
    const std::string var = var_it->get<std::string>();
    auto decl_it = vars.find(var);
    if (decl_it == vars.end()) bad(n, "undeclared variable " + var);
    const bool ts = decl_it->second.timestamp;

    auto kind_it = ev.find("kind");
    OpKind kind;
    if (kind_it != ev.end() && *kind_it == "R") {
      kind = ts ? OpKind::Scan : OpKind::Read;
    } else if (kind_it != ev.end() && *kind_it == "W") {
      kind = ts ? OpKind::Label : OpKind::Write;
    } else {
      bad(n, "\"kind\" must be \"R\" or \"W\"");
    }

    auto act_it = ev.find("act");
    if (act_it != ev.end() && *act_it == "invoke") {
      if (seen.contains(id)) bad(n, "op " + std::to_string(id) + " invoked twice");
      seen[id] = true;
      if (ev.contains("ret") || ev.contains("label") || ev.contains("scan")) {
        bad(n, "invoke event carries a result");
      }
      OpRecord op;
      op.id = id;
      op.proc = proc;
      op.var = var;
      op.kind = kind;
      op.start = step;
      if (auto a = ev.find("arg"); a != ev.end()) op.arg = natural(*a, n);
      open[id] = ops.size();
      ops.push_back(std::move(op));
    } else if (act_it != ev.end() && *act_it == "respond") {
      auto o = open.find(id);
      if (o == open.end()) bad(n, "respond without invoke for op " + std::to_string(id));
      OpRecord& op = ops[o->second];
      open.erase(o);
      if (op.proc != proc || op.var != var || op.kind != kind) {
        bad(n, "respond does not match its invoke");
      }
      if (ev.contains("arg")) bad(n, "respond event carries an argument");
      op.end = step;
      if (auto r = ev.find("ret"); r != ev.end()) op.ret = natural(*r, n);
      if (auto l = ev.find("label"); l != ev.end()) op.label = parse_tag(*l, n);
      if (auto s = ev.find("scan"); s != ev.end()) op.scan = parse_scan(*s, n);
    } else {
      bad(n, "\"act\" must be \"invoke\" or \"respond\"");
    }
  }

  try {
    return History(std::move(vars), std::move(ops));
  } catch (const TraceError&) {
    throw;
  } catch (const HistoryError& e) {
    throw TraceError(e.what());
  }
}

std::string serialize_trace(const History& h) {
  ordered_json vars = ordered_json::object();
  for (const auto& [name, decl] : h.vars()) {
    ordered_json v;
    v["domain"] = decl.domain;
    v["init"] = decl.init;
    v["writers"] = decl.writers;
    v["readers"] = decl.readers;
    if (decl.timestamp) v["type"] = "timestamp";
    vars[name] = std::move(v);
  }
  ordered_json header;
  header["version"] = 1;
  header["vars"] = std::move(vars);

  struct Ev {
    StepIndex step;
    const OpRecord* op;
    bool invoke;
  };
  std::vector<Ev> events;
  for (const auto& op : h.ops()) {
    events.push_back({op.start, &op, true});
    if (op.completed()) events.push_back({op.end, &op, false});
  }
  std::sort(events.begin(), events.end(), [](const Ev& a, const Ev& b) { return a.step < b.step; });

  std::string out = header.dump();
  out += '\n';
  for (const auto& ev : events) {
    const OpRecord& op = *ev.op;
    ordered_json e;
    e["step"] = ev.step;
    e["op"] = op.id;
    e["proc"] = op.proc;
    e["var"] = op.var;
    e["act"] = ev.invoke ? "invoke" : "respond";
    e["kind"] = is_update(op.kind) ? "W" : "R";
    if (ev.invoke) {
      if (op.arg) e["arg"] = *op.arg;
    } else {
      if (op.ret) e["ret"] = *op.ret;
      if (op.label) e["label"] = {op.label->seq, op.label->pid};
      if (op.kind == OpKind::Scan) {
        ordered_json scan = ordered_json::array();
        for (const auto& s : op.scan) scan.push_back({s.owner, s.tag.seq, s.tag.pid, s.payload});
        e["scan"] = std::move(scan);
      }
    }
    out += e.dump();
    out += '\n';
  }
  return out;
}

}  // namespace wfreg
