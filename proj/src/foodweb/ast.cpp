#include "pnp/foodweb/ast.hpp"

#include <cctype>
#include <memory>
#include <vector>

namespace pnp::foodweb {

std::string to_string(Change change) {
  return change == Change::kIncrease ? "increase" : "decrease";
}

std::string to_string(Effect effect) {
  switch (effect) {
    case Effect::kIncrease: return "increase";
    case Effect::kDecrease: return "decrease";
    case Effect::kSame: return "same";
  }
  return "?";
}

std::string to_string(const Answer& answer) {
  if (const bool* b = std::get_if<bool>(&answer.value)) {
    return *b ? "true" : "false";
  }
  if (const std::int64_t* n = std::get_if<std::int64_t>(&answer.value)) {
    return std::to_string(*n);
  }
  return to_string(std::get<Effect>(answer.value));
}

std::ostream& operator<<(std::ostream& os, const Answer& answer) {
  return os << to_string(answer);
}

namespace {

struct SExpr {
  std::string atom;  // valid when children is empty and is_atom
  bool is_atom = false;
  std::vector<SExpr> children;
};

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '_';
}

SExpr parse_sexpr(const std::string& text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size()) throw DataError("program: unexpected end of input");
  if (text[pos] == '(') {
    ++pos;
    SExpr list;
    for (;;) {
      while (pos < text.size() &&
             std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      }
      if (pos >= text.size()) throw DataError("program: missing ')'");
      if (text[pos] == ')') {
        ++pos;
        return list;
      }
      list.children.push_back(parse_sexpr(text, pos));
    }
  }
  if (!is_token_char(text[pos])) {
    throw DataError("program: unexpected character '" +
                    std::string(1, text[pos]) + "' at position " +
                    std::to_string(pos));
  }
  SExpr atom;
  atom.is_atom = true;
  while (pos < text.size() && is_token_char(text[pos])) atom.atom += text[pos++];
  return atom;
}

const std::string& expect_atom(const SExpr& e, const char* what) {
  if (!e.is_atom || e.atom.empty()) {
    throw DataError(std::string("program: expected ") + what);
  }
  return e.atom;
}

const SExpr& expect_list(const SExpr& e, std::size_t arity, const char* what) {
  if (e.is_atom || e.children.size() != arity) {
    throw DataError(std::string("program: malformed ") + what);
  }
  return e;
}

ProgramAst ast_from_sexpr(const SExpr& e) {
  if (e.is_atom || e.children.empty() || !e.children[0].is_atom) {
    throw DataError("program: expected a form like (eats x y)");
  }
  const std::string& head = e.children[0].atom;
  if (head == "eats") {
    expect_list(e, 3, "(eats x y)");
    return EatsQuery{expect_atom(e.children[1], "label"),
                     expect_atom(e.children[2], "label")};
  }
  if (head == "organism") {
    expect_list(e, 2, "(organism x)");
    return OrganismQuery{expect_atom(e.children[1], "label")};
  }
  if (head == "tertiary-consumer") {
    expect_list(e, 2, "(tertiary-consumer x)");
    return TertiaryConsumerQuery{expect_atom(e.children[1], "label")};
  }
  if (head == "count") {
    expect_list(e, 2, "(count (lambda v body))");
    const SExpr& lam = expect_list(e.children[1], 3, "(lambda v body)");
    if (expect_atom(lam.children[0], "lambda") != "lambda") {
      throw DataError("program: count body must be a lambda");
    }
    CountQuery q;
    q.var = expect_atom(lam.children[1], "variable");
    ProgramAst body = ast_from_sexpr(lam.children[2]);
    EatsQuery* eats = std::get_if<EatsQuery>(&body);
    if (!eats) throw DataError("program: count body must be an eats query");
    q.body = *eats;
    bool in_subject = q.body.subject == q.var;
    bool in_object = q.body.object == q.var;
    if (in_subject == in_object) {
      throw DataError("program: count variable '" + q.var +
                      "' must appear in exactly one slot of the body");
    }
    return q;
  }
  if (head == "cause") {
    expect_list(e, 3, "(cause (change x) y)");
    const SExpr& ch = expect_list(e.children[1], 2, "(increase x)");
    const std::string& dir = expect_atom(ch.children[0], "change direction");
    CauseQuery q;
    if (dir == "increase") {
      q.change = Change::kIncrease;
    } else if (dir == "decrease") {
      q.change = Change::kDecrease;
    } else {
      throw DataError("program: unknown change direction '" + dir + "'");
    }
    q.source = expect_atom(ch.children[1], "label");
    q.target = expect_atom(e.children[2], "label");
    return q;
  }
  throw DataError("program: unknown form '" + head + "'");
}

}  // namespace

ProgramAst parse_program(const std::string& text) {
  std::size_t pos = 0;
  SExpr e = parse_sexpr(text, pos);
  while (pos < text.size() &&
         std::isspace(static_cast<unsigned char>(text[pos]))) {
    ++pos;
  }
  if (pos != text.size()) {
    throw DataError("program: trailing input after position " +
                    std::to_string(pos));
  }
  return ast_from_sexpr(e);
}

std::string print_program(const ProgramAst& ast) {
  struct Printer {
    std::string operator()(const EatsQuery& q) const {
      return "(eats " + q.subject + " " + q.object + ")";
    }
    std::string operator()(const OrganismQuery& q) const {
      return "(organism " + q.label + ")";
    }
    std::string operator()(const CountQuery& q) const {
      return "(count (lambda " + q.var + " " + Printer{}(q.body) + "))";
    }
    std::string operator()(const TertiaryConsumerQuery& q) const {
      return "(tertiary-consumer " + q.label + ")";
    }
    std::string operator()(const CauseQuery& q) const {
      return "(cause (" + to_string(q.change) + " " + q.source + ") " +
             q.target + ")";
    }
  };
  return std::visit(Printer{}, ast);
}

}  // namespace pnp::foodweb
