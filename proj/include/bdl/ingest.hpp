#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdl/model.hpp"

// Trace ingestion: sysdig text + canonical line-delimited JSON parsing,
// enter/exit pairing, and the declarative syscall -> ground action mapping.

namespace bdl {

enum class Direction { Enter, Exit };

struct RawEvent {
  int64_t seq = 0;
  Direction direction = Direction::Enter;
  int64_t pid = 0;
  int64_t thread_id = 0;
  std::string syscall;
  std::map<std::string, std::string> args;
};

struct TraceEvent {
  std::string syscall;
  std::map<std::string, std::string> args;
  int64_t ret = 0;
  int64_t seq = 0;
  bool operator==(const TraceEvent&) const = default;
};

// Guards select a mapping rule based on the completed event. Every rule
// additionally requires ret >= 0: failed syscalls change nothing.
struct MappingGuard {
  enum class Kind { ArgIs, ArgContains, All };
  Kind kind = Kind::All;
  std::string arg;
  std::string value;
  std::vector<MappingGuard> children;  // All

  bool matches(const TraceEvent& ev) const;
};

// How one schema parameter gets its constant.
struct ArgExtractor {
  enum class Kind {
    ReturnFd,   // constant fd<ret>
    ArgFd,      // constant fd<int(args[arg])>
    Constant,   // fixed constant by name
    ArgName,    // constant named by the verbatim arg value
  };
  Kind kind = Kind::Constant;
  std::string arg;    // ArgFd / ArgName
  std::string value;  // Constant
  bool operator==(const ArgExtractor&) const = default;
};

struct MappingRule {
  std::string syscall;
  MappingGuard guard;  // All{} when absent
  std::string schema;
  std::vector<std::pair<std::string, ArgExtractor>> extractors;  // parameter -> extractor
};

struct IngestReport {
  int64_t events = 0;        // completed trace events seen
  int64_t mapped = 0;        // events that became plan actions
  int64_t noops = 0;         // events elided (no rule, failed call, overflow)
  int64_t malformed_lines = 0;
  int64_t unmatched_events = 0;  // pairing drops
  int64_t fd_overflows = 0;
  int64_t extractor_failures = 0;
  std::vector<std::string> warnings;  // capped

  int64_t warning_count() const {
    return malformed_lines + unmatched_events + fd_overflows + extractor_failures;
  }
  void warn(const std::string& msg);
};

class IngestError : public std::runtime_error {
 public:
  explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

// sysdig default text output: N time cpu proc (tid) dir syscall args...
// Non-event lines are counted and skipped. Argument decorations such as
// fd=3(<4t>…) are reduced to the bare value; the decoration is preserved
// under "<name>_info".
std::vector<RawEvent> parse_sysdig(std::istream& in, IngestReport& report);

// Canonical format: one JSON object per line with exactly
//   {"seq": int, "name": str, "args": {str: str}, "ret": int}
std::vector<TraceEvent> parse_canonical(std::istream& in, IngestReport& report);
std::vector<TraceEvent> parse_canonical_file(const std::string& path, IngestReport& report);
void write_canonical(std::ostream& out, const std::vector<TraceEvent>& events);

// Matches each Enter with the next Exit of the same syscall; ret comes from
// the exit record ("res", falling back to "fd"). Cross-syscall nesting on the
// single modeled thread is a fatal MalformedStream (IngestError).
std::vector<TraceEvent> pair_events(const std::vector<RawEvent>& raw, IngestReport& report);

// First rule whose syscall name and guard match wins; nullopt = no-op.
std::optional<GroundAction> map_event(const std::vector<MappingRule>& rules,
                                      const TraceEvent& event, const Problem& problem,
                                      IngestReport& report);

enum class TraceFormat { Canonical, Sysdig };

struct IngestResult {
  std::vector<GroundAction> plan;
  IngestReport report;
};

IngestResult ingest(std::istream& in, TraceFormat format,
                    const std::vector<MappingRule>& rules, const Problem& problem);
IngestResult ingest_events(const std::vector<TraceEvent>& events,
                           const std::vector<MappingRule>& rules, const Problem& problem,
                           IngestReport report = {});

// Rule validation against a domain/problem (schema exists, every parameter
// covered, constants exist and fit). Returns human-readable problems.
std::vector<std::string> validate_rules(const std::vector<MappingRule>& rules,
                                        const Problem& problem);

}  // namespace bdl
