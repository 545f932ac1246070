#include "bdl/ingest.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "json.hpp"

namespace bdl {

namespace {

constexpr size_t kMaxStoredWarnings = 20;

bool parse_int(const std::string& s, int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// fd=3(<4t>1.2.3.4:80->5.6.7.8:90) -> value "3", decoration "<4t>1.2..."
void split_decoration(const std::string& raw, std::string& value, std::string& info) {
  auto paren = raw.find('(');
  if (paren == std::string::npos || raw.back() != ')') {
    value = raw;
    return;
  }
  value = raw.substr(0, paren);
  info = raw.substr(paren + 1, raw.size() - paren - 2);
}

// cmd=2(F_SETFD) renders an enum: the symbolic name is what mapping guards
// match on. Error renderings like res=-1(EAGAIN) keep the numeric value.
bool symbolic_decoration(const std::string& value, const std::string& info) {
  if (info.empty() || !(info[0] >= 'A' && info[0] <= 'Z')) return false;
  for (char c : info)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '|'))
      return false;
  int64_t n = 0;
  return parse_int(value, n) && n >= 0;
}

}  // namespace

void IngestReport::warn(const std::string& msg) {
  if (warnings.size() < kMaxStoredWarnings) warnings.push_back(msg);
}

bool MappingGuard::matches(const TraceEvent& ev) const {
  switch (kind) {
    case Kind::All:
      for (const auto& c : children)
        if (!c.matches(ev)) return false;
      return true;
    case Kind::ArgIs: {
      auto it = ev.args.find(arg);
      return it != ev.args.end() && it->second == value;
    }
    case Kind::ArgContains: {
      auto it = ev.args.find(arg);
      return it != ev.args.end() && it->second.find(value) != std::string::npos;
    }
  }
  return false;
}

std::vector<RawEvent> parse_sysdig(std::istream& in, IngestReport& report) {
  std::vector<RawEvent> events;
  std::string line;
  int64_t lineno = 0;
  int64_t last_seq = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    RawEvent ev;
    std::string time, cpu, proc, tid, dir;
    if (!(ls >> ev.seq >> time >> cpu >> proc >> tid >> dir)) {
      ++report.malformed_lines;
      report.warn("line " + std::to_string(lineno) + ": not a sysdig event line");
      continue;
    }
    if (dir != ">" && dir != "<") {
      ++report.malformed_lines;
      report.warn("line " + std::to_string(lineno) + ": bad direction token '" + dir + "'");
      continue;
    }
    if (tid.size() >= 2 && tid.front() == '(' && tid.back() == ')') {
      int64_t t = 0;
      if (parse_int(tid.substr(1, tid.size() - 2), t)) {
        ev.thread_id = t;
        ev.pid = t;
      }
    }
    if (ev.seq <= last_seq) {
      ++report.malformed_lines;
      report.warn("line " + std::to_string(lineno) + ": event number not increasing");
      continue;
    }
    last_seq = ev.seq;
    ev.direction = dir == ">" ? Direction::Enter : Direction::Exit;
    if (!(ls >> ev.syscall)) {
      ++report.malformed_lines;
      report.warn("line " + std::to_string(lineno) + ": missing syscall name");
      continue;
    }
    std::string tok;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) continue;  // free-form info, ignore
      std::string name = tok.substr(0, eq);
      std::string value, info;
      split_decoration(tok.substr(eq + 1), value, info);
      ev.args[name] = symbolic_decoration(value, info) ? info : value;
      if (!info.empty()) ev.args[name + "_info"] = info;
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<TraceEvent> parse_canonical(std::istream& in, IngestReport& report) {
  std::vector<TraceEvent> events;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    auto malformed = [&](const std::string& why) {
      ++report.malformed_lines;
      report.warn("line " + std::to_string(lineno) + ": " + why);
    };
    if (j.is_discarded() || !j.is_object()) {
      malformed("not a JSON object");
      continue;
    }
    if (!j.contains("seq") || !j["seq"].is_number_integer() || !j.contains("name") ||
        !j["name"].is_string() || !j.contains("ret") || !j["ret"].is_number_integer()) {
      malformed("missing or mistyped seq/name/ret field");
      continue;
    }
    TraceEvent ev;
    ev.seq = j["seq"].get<int64_t>();
    ev.syscall = j["name"].get<std::string>();
    ev.ret = j["ret"].get<int64_t>();
    if (j.contains("args")) {
      if (!j["args"].is_object()) {
        malformed("args must be a string map");
        continue;
      }
      bool ok = true;
      for (auto& [k, v] : j["args"].items()) {
        if (!v.is_string()) {
          ok = false;
          break;
        }
        ev.args[k] = v.get<std::string>();
      }
      if (!ok) {
        malformed("args must be a string map");
        continue;
      }
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<TraceEvent> parse_canonical_file(const std::string& path, IngestReport& report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open trace file: " + path);
  return parse_canonical(in, report);
}

void write_canonical(std::ostream& out, const std::vector<TraceEvent>& events) {
  for (const auto& ev : events) {
    nlohmann::json j;
    j["seq"] = ev.seq;
    j["name"] = ev.syscall;
    j["args"] = nlohmann::json::object();
    for (const auto& [k, v] : ev.args) j["args"][k] = v;
    j["ret"] = ev.ret;
    out << j.dump() << "\n";
  }
}

std::vector<TraceEvent> pair_events(const std::vector<RawEvent>& raw, IngestReport& report) {
  std::vector<TraceEvent> events;
  std::optional<RawEvent> pending;
  for (const auto& ev : raw) {
    if (ev.direction == Direction::Enter) {
      if (pending) {
        if (pending->syscall != ev.syscall)
          throw IngestError("malformed stream: enter of '" + ev.syscall +
                            "' while '" + pending->syscall +
                            "' is still in flight on the same thread");
        // Re-entered the same syscall without an exit; keep the newer one.
        ++report.unmatched_events;
        report.warn("enter event " + std::to_string(pending->seq) + " never completed");
      }
      pending = ev;
      continue;
    }
    if (!pending) {
      ++report.unmatched_events;
      report.warn("exit event " + std::to_string(ev.seq) + " has no matching enter");
      continue;
    }
    if (pending->syscall != ev.syscall)
      throw IngestError("malformed stream: exit of '" + ev.syscall + "' while '" +
                        pending->syscall + "' is still in flight on the same thread");
    TraceEvent out;
    out.syscall = ev.syscall;
    out.seq = pending->seq;
    out.args = pending->args;
    for (const auto& [k, v] : ev.args) out.args[k] = v;  // exit args win
    auto res = ev.args.find("res");
    if (res == ev.args.end()) res = ev.args.find("fd");
    int64_t ret = 0;
    if (res != ev.args.end() && parse_int(res->second, ret)) out.ret = ret;
    events.push_back(std::move(out));
    pending.reset();
  }
  if (pending) {
    ++report.unmatched_events;
    report.warn("enter event " + std::to_string(pending->seq) + " never completed");
  }
  return events;
}

std::optional<GroundAction> map_event(const std::vector<MappingRule>& rules,
                                      const TraceEvent& event, const Problem& problem,
                                      IngestReport& report) {
  if (event.ret < 0) return std::nullopt;  // failed syscalls change nothing
  for (const auto& rule : rules) {
    if (rule.syscall != event.syscall || !rule.guard.matches(event)) continue;
    std::unordered_map<std::string, std::string> binding;
    for (const auto& [param, x] : rule.extractors) {
      int64_t fd = -1;
      switch (x.kind) {
        case ArgExtractor::Kind::ReturnFd:
          fd = event.ret;
          break;
        case ArgExtractor::Kind::ArgFd: {
          auto it = event.args.find(x.arg);
          if (it == event.args.end() || !parse_int(it->second, fd)) {
            ++report.extractor_failures;
            report.warn("event " + std::to_string(event.seq) + ": argument '" + x.arg +
                        "' missing or not an integer");
            return std::nullopt;
          }
          break;
        }
        case ArgExtractor::Kind::Constant:
          binding[param] = x.value;
          continue;
        case ArgExtractor::Kind::ArgName: {
          auto it = event.args.find(x.arg);
          if (it == event.args.end()) {
            ++report.extractor_failures;
            report.warn("event " + std::to_string(event.seq) + ": argument '" + x.arg +
                        "' missing");
            return std::nullopt;
          }
          binding[param] = it->second;
          continue;
        }
      }
      std::string name = "fd" + std::to_string(fd);
      if (!problem.const_id(name)) {
        ++report.fd_overflows;
        report.warn("event " + std::to_string(event.seq) + ": descriptor " +
                    std::to_string(fd) + " is outside the declared fd pool");
        return std::nullopt;
      }
      binding[param] = name;
    }
    try {
      return ground(problem.domain(), problem, rule.schema, binding);
    } catch (const ModelError& e) {
      ++report.extractor_failures;
      report.warn("event " + std::to_string(event.seq) + ": " + e.what());
      return std::nullopt;
    }
  }
  return std::nullopt;  // no rule: semantic no-op
}

IngestResult ingest_events(const std::vector<TraceEvent>& events,
                           const std::vector<MappingRule>& rules, const Problem& problem,
                           IngestReport report) {
  IngestResult result;
  result.report = std::move(report);
  for (const auto& ev : events) {
    ++result.report.events;
    auto action = map_event(rules, ev, problem, result.report);
    if (action) {
      ++result.report.mapped;
      result.plan.push_back(std::move(*action));
    } else {
      ++result.report.noops;
    }
  }
  return result;
}

IngestResult ingest(std::istream& in, TraceFormat format,
                    const std::vector<MappingRule>& rules, const Problem& problem) {
  IngestReport report;
  std::vector<TraceEvent> events;
  if (format == TraceFormat::Canonical) {
    events = parse_canonical(in, report);
  } else {
    auto raw = parse_sysdig(in, report);
    events = pair_events(raw, report);
  }
  return ingest_events(events, rules, problem, std::move(report));
}

std::vector<std::string> validate_rules(const std::vector<MappingRule>& rules,
                                        const Problem& problem) {
  std::vector<std::string> problems;
  const Domain& d = problem.domain();
  for (const auto& rule : rules) {
    auto sid = d.schema_id(rule.schema);
    if (!sid) {
      problems.push_back("mapping rule for '" + rule.syscall + "': unknown action schema '" +
                         rule.schema + "'");
      continue;
    }
    const ActionSchema& schema = d.schemas[*sid];
    std::vector<bool> covered(schema.param_count, false);
    for (const auto& [param, x] : rule.extractors) {
      int32_t idx = -1;
      for (int32_t i = 0; i < schema.param_count; ++i)
        if (schema.variables[i].name == param) idx = i;
      if (idx < 0) {
        problems.push_back("mapping rule for '" + rule.syscall + "': schema '" + rule.schema +
                           "' has no parameter '?" + param + "'");
        continue;
      }
      covered[idx] = true;
      TypeId want = schema.variables[idx].type;
      if (x.kind == ArgExtractor::Kind::Constant) {
        auto cid = problem.const_id(x.value);
        if (!cid)
          problems.push_back("mapping rule for '" + rule.syscall + "': unknown constant '" +
                             x.value + "'");
        else if (problem.constant(*cid).type != want)
          problems.push_back("mapping rule for '" + rule.syscall + "': constant '" + x.value +
                             "' does not fit parameter '?" + param + "'");
      } else if (x.kind == ArgExtractor::Kind::ReturnFd || x.kind == ArgExtractor::Kind::ArgFd) {
        auto fd0 = problem.const_id("fd0");
        if (!fd0 || problem.constant(*fd0).type != want)
          problems.push_back("mapping rule for '" + rule.syscall + "': parameter '?" + param +
                             "' is not descriptor-typed (fd0 missing or of another type)");
      }
    }
    for (int32_t i = 0; i < schema.param_count; ++i)
      if (!covered[i])
        problems.push_back("mapping rule for '" + rule.syscall + "': parameter '?" +
                           schema.variables[i].name + "' of schema '" + rule.schema +
                           "' has no extractor");
  }
  return problems;
}

}  // namespace bdl
