#pragma once

#include <string>
#include <vector>

// Minimal s-expression reader shared by the domain/problem parsers.
// Tracks source positions for diagnostics; `;` starts a line comment.
// Bare symbols are canonicalized to lower case, quoted strings are kept
// verbatim (they carry case-sensitive payload like syscall arg values).

namespace bdl {

struct SourceSpan {
  std::string file;
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  bool operator==(const SourceSpan&) const = default;
};

struct ParseError {
  enum class Kind { Lexical, Syntactic, Semantic };
  SourceSpan span;
  std::string message;
  Kind kind = Kind::Syntactic;
};

std::string to_string(const ParseError& e);

struct SExpr {
  enum class Kind { Symbol, String, List };
  Kind kind = Kind::List;
  std::string text;           // Symbol (lower-cased) or String (verbatim)
  std::vector<SExpr> items;   // List
  SourceSpan span;

  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_symbol(const std::string& s) const { return kind == Kind::Symbol && text == s; }
  bool is_list() const { return kind == Kind::List; }
  bool is_string() const { return kind == Kind::String; }
};

// Reads every top-level form in `text`. On any error the returned forms are
// empty and `errors` holds at least one entry; the reader never throws.
std::vector<SExpr> read_sexprs(const std::string& text, const std::string& file,
                               std::vector<ParseError>& errors);

}  // namespace bdl
