#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdl/ingest.hpp"
#include "bdl/model.hpp"
#include "bdl/sexpr.hpp"

// Textual behavior-domain language (.bdl): s-expression syntax for domains,
// problems, named goals, and syscall mapping rules. The full grammar is
// documented in docs/formats.md.

namespace bdl {

template <typename T>
struct ParseResult {
  std::optional<T> value;
  std::vector<ParseError> errors;
  bool ok() const { return value.has_value() && errors.empty(); }
};

struct ParsedProblem {
  Problem problem;
  std::vector<MappingRule> mapping;
};

ParseResult<Domain> parse_domain(const std::string& text, const std::string& file = "<domain>");
ParseResult<ParsedProblem> parse_problem(const std::string& text, const Domain& domain,
                                         const std::string& file = "<problem>");

std::string serialize(const Domain& domain);
std::string serialize(const Problem& problem, const std::vector<MappingRule>& mapping = {});

// File helpers used by the CLI; throw IngestError on I/O failure.
std::string read_file(const std::string& path);

}  // namespace bdl
