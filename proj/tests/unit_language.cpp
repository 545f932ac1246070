#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bdl/behaviors.hpp"
#include "bdl/language.hpp"

using namespace bdl;

namespace {

std::string domain_path(const std::string& name) {
  return std::string(BDL_DOMAINS_DIR) + "/" + name;
}

bool has_error_containing(const std::vector<ParseError>& errors, const std::string& needle) {
  for (const auto& e : errors)
    if (e.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("the shipped reverse-shell domain parses to six actions") {
  auto result = parse_domain(read_file(domain_path("reverse-shell.bdl")));
  REQUIRE(result.ok());
  const Domain& d = *result.value;
  CHECK(d.name == "reverse-shell");
  CHECK(d.schemas.size() == 6);
  CHECK(d.predicates.size() == 7);
  for (const char* name : {"socket", "connect", "dup", "fcntl", "close", "execve"})
    CHECK(d.schema_id(name).has_value());
}

TEST_CASE("the shipped reverse-shell problem carries the tainted initial state") {
  auto d = parse_domain(read_file(domain_path("reverse-shell.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(read_file(domain_path("reverse-shell-std.bdl")), *d.value);
  REQUIRE(p.ok());
  const Problem& problem = p.value->problem;
  CHECK(problem.initial().size() == 5);
  auto opened = *problem.domain().pred_id("opened");
  auto is_shell = *problem.domain().pred_id("is-shell");
  for (const char* fd : {"fd0", "fd1", "fd2"})
    CHECK(problem.initial().contains(problem.prop_id(opened, {*problem.const_id(fd)})));
  for (const char* sh : {"sh", "bash"})
    CHECK(problem.initial().contains(problem.prop_id(is_shell, {*problem.const_id(sh)})));
  REQUIRE(problem.goals().size() == 1);
  CHECK(problem.goals()[0].label == "remote-shell");
  CHECK(!p.value->mapping.empty());
}

TEST_CASE("an empty domain parses") {
  auto result = parse_domain("(define (domain d))");
  REQUIRE(result.ok());
  CHECK(result.value->name == "d");
  CHECK(result.value->predicates.empty());
  CHECK(result.value->schemas.empty());
}

TEST_CASE("undeclared predicates in effects are semantic errors") {
  auto result = parse_domain(
      "(define (domain d) (:types t) (:predicates (p ?x - t))"
      " (:action a :parameters (?x - t) :effect (when (p ?x) (q ?x))))");
  CHECK(!result.ok());
  CHECK(has_error_containing(result.errors, "undeclared predicate 'q'"));
  for (const auto& e : result.errors) CHECK(e.kind == ParseError::Kind::Semantic);
}

TEST_CASE("unknown constants in init are semantic errors") {
  auto d = parse_domain(read_file(domain_path("reverse-shell.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(
      "(define (problem x) (:domain reverse-shell) (:objects sh - path)"
      " (:init (opened fd99)))",
      *d.value);
  CHECK(!p.ok());
  CHECK(has_error_containing(p.errors, "unknown constant 'fd99'"));
}

TEST_CASE("an empty init produces an empty initial state") {
  auto d = parse_domain(read_file(domain_path("background.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(
      "(define (problem x) (:domain socket-basics) (:objects fd0 - fd) (:init))", *d.value);
  REQUIRE(p.ok());
  CHECK(p.value->problem.initial().size() == 0);
}

TEST_CASE("negated init atoms are rejected") {
  auto d = parse_domain(read_file(domain_path("background.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(
      "(define (problem x) (:domain socket-basics) (:objects fd0 - fd)"
      " (:init (not (opened fd0))))",
      *d.value);
  CHECK(!p.ok());
  CHECK(has_error_containing(p.errors, "positive"));
}

TEST_CASE("all problems are rejected rather than returned partially") {
  auto d = parse_domain(read_file(domain_path("background.bdl")));
  REQUIRE(d.ok());
  // Two independent errors: both must be collected, no problem returned.
  auto p = parse_problem(
      "(define (problem x) (:domain socket-basics) (:objects fd0 - fd)"
      " (:init (opened nope) (listening also-nope)))",
      *d.value);
  CHECK(!p.value.has_value());
  CHECK(p.errors.size() == 2);
}

TEST_CASE("parser survives malformed input with spans") {
  for (const std::string bad :
       {"(((", ")", "(define", "(define (domain))", "\"unterminated",
        "(define (domain d) (:types", "(define (domain d) (:nonsense 1))",
        "(define (domain d) (:action a))"}) {
    auto result = parse_domain(bad, "bad.bdl");
    CHECK(!result.ok());
    REQUIRE(!result.errors.empty());
    for (const auto& e : result.errors) {
      CHECK(e.span.line >= 1);
      CHECK(e.span.column >= 1);
      CHECK(e.span.file == "bad.bdl");
    }
  }
}

TEST_CASE("identifiers are case-insensitive and lower-cased") {
  auto result = parse_domain("(DEFINE (Domain ShellGame) (:TYPES Fd))");
  REQUIRE(result.ok());
  CHECK(result.value->name == "shellgame");
  CHECK(result.value->type_id("fd").has_value());
}

TEST_CASE("comments run to end of line") {
  auto result = parse_domain(
      "; header comment\n(define (domain d) ; trailing\n  (:types t)) ; done\n");
  REQUIRE(result.ok());
  CHECK(result.value->types.size() == 1);
}

TEST_CASE("rich conditions are rejected in preconditions") {
  auto result = parse_domain(
      "(define (domain d) (:types t) (:predicates (p ?x - t))"
      " (:action a :parameters (?x - t)"
      " :precondition (or (p ?x)) :effect (p ?x)))");
  CHECK(!result.ok());
  CHECK(has_error_containing(result.errors, "conjunctions of literals"));
}

TEST_CASE("quantified variables may not shadow an enclosing binding") {
  auto result = parse_domain(
      "(define (domain d) (:types t) (:predicates (p ?x - t))"
      " (:action a :parameters (?x - t)"
      " :effect (when (exists (?x - t) (p ?x)) (p ?x))))");
  CHECK(!result.ok());
  CHECK(has_error_containing(result.errors, "shadows"));
}

TEST_CASE("duplicate goal labels are rejected") {
  auto d = parse_domain(read_file(domain_path("background.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(
      "(define (problem x) (:domain socket-basics) (:objects fd0 - fd)"
      " (:goal g (opened fd0)) (:goal g (listening fd0)))",
      *d.value);
  CHECK(!p.ok());
  CHECK(has_error_containing(p.errors, "duplicate goal label"));
}

TEST_CASE("shipped sources serialize to a canonical fixed point") {
  for (const auto& [dname, pname] :
       std::vector<std::pair<std::string, std::string>>{
           {"reverse-shell.bdl", "reverse-shell-std.bdl"},
           {"mail.bdl", "mail-std.bdl"},
           {"background.bdl", "background-std.bdl"}}) {
    auto d1 = parse_domain(read_file(domain_path(dname)), dname);
    REQUIRE(d1.ok());
    std::string dtext = serialize(*d1.value);
    auto d2 = parse_domain(dtext, dname + " (canonical)");
    REQUIRE(d2.ok());
    CHECK(*d1.value == *d2.value);
    CHECK(serialize(*d2.value) == dtext);

    auto p1 = parse_problem(read_file(domain_path(pname)), *d1.value, pname);
    REQUIRE(p1.ok());
    std::string ptext = serialize(p1.value->problem, p1.value->mapping);
    auto p2 = parse_problem(ptext, *d1.value, pname + " (canonical)");
    REQUIRE(p2.ok());
    CHECK(p1.value->problem == p2.value->problem);
    CHECK(serialize(p2.value->problem, p2.value->mapping) == ptext);
  }
}

TEST_CASE("an empty domain serializes to a canonical fixed point") {
  auto d = parse_domain("(define (domain d))");
  REQUIRE(d.ok());
  std::string text = serialize(*d.value);
  auto back = parse_domain(text);
  REQUIRE(back.ok());
  CHECK(*back.value == *d.value);
  CHECK(serialize(*back.value) == text);
  CHECK(text.find("(define (domain d)") == 0);
}

TEST_CASE("goal declaration order is preserved") {
  auto d = parse_domain(read_file(domain_path("mail.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(read_file(domain_path("mail-std.bdl")), *d.value);
  REQUIRE(p.ok());
  std::vector<std::string> labels;
  for (const auto& g : p.value->problem.goals()) labels.push_back(g.label);
  CHECK(labels == std::vector<std::string>{"smtp-receive", "imap-receive", "forward",
                                           "imap-login", "remote-shell"});
  std::string text = serialize(p.value->problem, p.value->mapping);
  CHECK(text.find("(:goal smtp-receive") < text.find("(:goal imap-receive"));
  CHECK(text.find("(:goal imap-login") < text.find("(:goal remote-shell"));
}

TEST_CASE("identical text parses to identical structures") {
  std::string text = read_file(domain_path("mail.bdl"));
  auto a = parse_domain(text);
  auto b = parse_domain(text);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(*a.value == *b.value);
}

TEST_CASE("built-in problems equal the shipped files") {
  auto d = parse_domain(read_file(domain_path("reverse-shell.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(read_file(domain_path("reverse-shell-std.bdl")), *d.value);
  REQUIRE(p.ok());
  CHECK(p.value->problem == reverse_shell_problem().problem);

  auto md = parse_domain(read_file(domain_path("mail.bdl")));
  REQUIRE(md.ok());
  auto mp = parse_problem(read_file(domain_path("mail-std.bdl")), *md.value);
  REQUIRE(mp.ok());
  CHECK(mp.value->problem == mail_problem().problem);
}

TEST_CASE("mapping rules are validated against the problem") {
  auto d = parse_domain(read_file(domain_path("background.bdl")));
  REQUIRE(d.ok());
  auto p = parse_problem(
      "(define (problem x) (:domain socket-basics) (:objects fd0 - fd)"
      " (:mapping (:rule socket (:action warp (?returned-sd (ret-fd))))))",
      *d.value);
  CHECK(!p.ok());
  CHECK(has_error_containing(p.errors, "unknown action schema 'warp'"));

  auto p2 = parse_problem(
      "(define (problem x) (:domain socket-basics) (:objects fd0 - fd)"
      " (:mapping (:rule socket (:action socket))))",
      *d.value);
  CHECK(!p2.ok());
  CHECK(has_error_containing(p2.errors, "has no extractor"));
}
