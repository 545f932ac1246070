#include "bdl/sexpr.hpp"

#include <cctype>
#include <sstream>

namespace bdl {

std::string to_string(const ParseError& e) {
  std::ostringstream os;
  os << e.span.file << ":" << e.span.line << ":" << e.span.column << ": ";
  switch (e.kind) {
    case ParseError::Kind::Lexical: os << "lexical error: "; break;
    case ParseError::Kind::Syntactic: os << "syntax error: "; break;
    case ParseError::Kind::Semantic: os << "error: "; break;
  }
  os << e.message;
  return os.str();
}

namespace {

struct Reader {
  const std::string& text;
  std::string file;
  size_t pos = 0;
  int line = 1;
  int col = 1;
  std::vector<ParseError>& errors;

  SourceSpan span() const { return {file, line, col}; }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  char advance() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool symbol_char(char c) const {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' &&
           c != ';' && c != '"';
  }

  SExpr read_form() {
    skip_ws();
    SExpr node;
    node.span = span();
    if (eof()) {
      errors.push_back({span(), "unexpected end of input", ParseError::Kind::Syntactic});
      return node;
    }
    char c = peek();
    if (c == '(') {
      advance();
      node.kind = SExpr::Kind::List;
      while (true) {
        skip_ws();
        if (eof()) {
          errors.push_back({node.span, "unterminated list", ParseError::Kind::Syntactic});
          return node;
        }
        if (peek() == ')') {
          advance();
          return node;
        }
        node.items.push_back(read_form());
        if (!errors.empty() && eof()) return node;
      }
    }
    if (c == ')') {
      errors.push_back({span(), "unmatched ')'", ParseError::Kind::Syntactic});
      advance();
      return node;
    }
    if (c == '"') {
      advance();
      node.kind = SExpr::Kind::String;
      while (!eof() && peek() != '"') {
        char d = advance();
        if (d == '\\' && !eof()) d = advance();  // \" and \\ escapes
        node.text.push_back(d);
      }
      if (eof()) {
        errors.push_back({node.span, "unterminated string", ParseError::Kind::Lexical});
        return node;
      }
      advance();  // closing quote
      return node;
    }
    node.kind = SExpr::Kind::Symbol;
    while (!eof() && symbol_char(peek()))
      node.text.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(advance()))));
    if (node.text.empty()) {
      errors.push_back({node.span, "unexpected character", ParseError::Kind::Lexical});
      advance();
    }
    return node;
  }
};

}  // namespace

std::vector<SExpr> read_sexprs(const std::string& text, const std::string& file,
                               std::vector<ParseError>& errors) {
  Reader r{text, file, 0, 1, 1, errors};
  std::vector<SExpr> forms;
  while (true) {
    r.skip_ws();
    if (r.eof()) break;
    forms.push_back(r.read_form());
    if (!errors.empty()) break;
  }
  if (!errors.empty()) forms.clear();
  return forms;
}

}  // namespace bdl
