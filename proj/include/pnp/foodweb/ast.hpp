#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>

#include "pnp/errors.hpp"

namespace pnp::foodweb {

enum class Change { kIncrease, kDecrease };
enum class Effect { kIncrease, kDecrease, kSame };

std::string to_string(Change change);
std::string to_string(Effect effect);

// Does `subject` eat `object`?
struct EatsQuery {
  std::string subject;
  std::string object;
  bool operator==(const EatsQuery&) const = default;
};

// Is this text label an organism (as opposed to, say, the image title)?
struct OrganismQuery {
  std::string label;
  bool operator==(const OrganismQuery&) const = default;
};

// How many labels c satisfy the body with var := c? The body is an eats
// query mentioning the variable in exactly one slot.
struct CountQuery {
  std::string var;
  EatsQuery body;
  bool operator==(const CountQuery&) const = default;

  bool var_is_subject() const { return body.subject == var; }
  const std::string& fixed_label() const {
    return var_is_subject() ? body.object : body.subject;
  }
};

struct TertiaryConsumerQuery {
  std::string label;
  bool operator==(const TertiaryConsumerQuery&) const = default;
};

// What happens to `target` if the `source` population changes?
struct CauseQuery {
  Change change;
  std::string source;
  std::string target;
  bool operator==(const CauseQuery&) const = default;
};

using ProgramAst = std::variant<EatsQuery, OrganismQuery, CountQuery,
                                TertiaryConsumerQuery, CauseQuery>;

// Boolean for eats/organism/tertiary-consumer, count for count,
// population effect for cause.
struct Answer {
  std::variant<bool, std::int64_t, Effect> value;

  static Answer of_bool(bool b) { return {b}; }
  static Answer of_int(std::int64_t n) { return {n}; }
  static Answer of_effect(Effect e) { return {e}; }

  bool operator==(const Answer&) const = default;
};

std::string to_string(const Answer& answer);
std::ostream& operator<<(std::ostream& os, const Answer& answer);

// S-expression syntax:
//   (eats x y)
//   (organism x)
//   (count (lambda v (eats v y)))
//   (tertiary-consumer x)
//   (cause (decrease x) y)
// Labels are lowercase tokens; parse and print round-trip exactly.
ProgramAst parse_program(const std::string& text);
std::string print_program(const ProgramAst& ast);

}  // namespace pnp::foodweb
