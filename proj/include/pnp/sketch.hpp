#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/graph.hpp"
#include "pnp/tensor.hpp"

namespace pnp {

// Names one decision site. Equal tags mean the same site; trace matching
// and the per-decision metrics key off them.
struct ChoiceTag {
  std::string kind = "anon";
  std::vector<std::string> args;

  bool operator==(const ChoiceTag&) const = default;
  auto operator<=>(const ChoiceTag&) const = default;
};

inline std::string to_string(const ChoiceTag& tag) {
  std::string out = tag.kind;
  if (!tag.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < tag.args.size(); ++i) {
      if (i) out += ',';
      out += tag.args[i];
    }
    out += ')';
  }
  return out;
}

using Unit = std::monostate;

namespace detail {

template <typename T>
concept Streamable = requires(std::ostream& os, const T& v) { os << v; };

template <typename T>
std::string display_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (Streamable<T>) {
    std::ostringstream os;
    os << v;
    return os.str();
  } else {
    return "<value>";
  }
}

}  // namespace detail

template <typename T>
class Sketch;

template <typename T>
struct Done {
  T value;
};

// A suspended nondeterministic choice. `resume(i)` yields the rest of the
// computation after selecting option i; it may be called any number of
// times with any indices, which is what lets beam search fan one Choose
// out into several executions.
template <typename T>
struct ChoicePoint {
  std::vector<std::string> option_display;
  NodeRef score;  // forward(score) must have option_display.size() entries
  ChoiceTag tag;
  std::function<Sketch<T>(std::size_t)> resume;

  std::size_t option_count() const { return option_display.size(); }
};

struct Failed {};

template <typename T>
using Step = std::variant<Done<T>, ChoicePoint<T>, Failed>;

// A probabilistic neural program: a suspended computation that, advanced
// against a graph, either finishes with a value, fails (conditioning), or
// stops at a weighted choice. Sketch values are persistent: advancing
// builds graph nodes but never mutates the sketch, so one suspension can
// be resumed along many branches.
//
// The log probability of a complete execution is the sum of the chosen
// score entries along its path; inference normalizes over the executions
// it finds.
template <typename T>
class Sketch {
 public:
  using value_type = T;

  static Sketch pure(T value) {
    return Sketch([v = std::move(value)](Graph&) -> Step<T> {
      return Done<T>{v};
    });
  }

  static Sketch fail() {
    return Sketch([](Graph&) -> Step<T> { return Failed{}; });
  }

  // Deterministic segment that may build graph nodes. The callable runs on
  // every advance that reaches it (once per execution branch).
  template <typename Fn>
    requires std::is_invocable_r_v<T, Fn, Graph&>
  static Sketch compute(Fn fn) {
    return Sketch([fn = std::move(fn)](Graph& g) -> Step<T> {
      return Done<T>{fn(g)};
    });
  }

  // Monadic sequencing. Fn: T -> Sketch<U>.
  template <typename Fn>
  auto and_then(Fn fn) const -> std::invoke_result_t<Fn, T> {
    using SketchU = std::invoke_result_t<Fn, T>;
    using U = typename SketchU::value_type;
    return SketchU([prev = *this, fn = std::move(fn)](Graph& g) -> Step<U> {
      Step<T> step = prev.advance(g);
      if (auto* done = std::get_if<Done<T>>(&step)) {
        return fn(done->value).advance(g);
      }
      if (std::holds_alternative<Failed>(step)) return Failed{};
      auto& cp = std::get<ChoicePoint<T>>(step);
      return ChoicePoint<U>{
          std::move(cp.option_display), cp.score, std::move(cp.tag),
          [resume = std::move(cp.resume), fn](std::size_t i) {
            return resume(i).and_then(fn);
          }};
    });
  }

  // Fn: T -> U.
  template <typename Fn>
  auto map(Fn fn) const {
    using U = std::invoke_result_t<Fn, T>;
    return and_then([fn = std::move(fn)](T v) {
      return Sketch<U>::pure(fn(std::move(v)));
    });
  }

  // Runs the computation up to its next suspension point against `g`.
  Step<T> advance(Graph& g) const { return run_(g); }

  // Raw constructor for inference/test machinery; prefer the combinators.
  using RunFn = std::function<Step<T>(Graph&)>;
  static Sketch from_run(RunFn run) { return Sketch(std::move(run)); }

 private:
  template <typename U>
  friend class Sketch;

  explicit Sketch(RunFn run) : run_(std::move(run)) {}
  RunFn run_;
};

// The graph node holding the named parameter's current value. Unknown
// names surface as GraphError when the sketch is advanced.
inline Sketch<NodeRef> param(std::string name) {
  return Sketch<NodeRef>::compute(
      [name = std::move(name)](Graph& g) { return g.parameter(name); });
}

inline Sketch<NodeRef> constant(Tensor t) {
  return Sketch<NodeRef>::compute(
      [t = std::move(t)](Graph& g) { return g.constant(std::move(t)); });
}

// Weighted nondeterministic choice. Selecting option i adds entry i of
// forward(score) to the execution's accumulated score; the score node is
// evaluated lazily, no earlier than the advance that reaches this choice.
template <typename T>
Sketch<T> choose(std::vector<T> options, NodeRef score, ChoiceTag tag = {}) {
  if (options.empty()) throw GraphError("choose: empty option list");
  std::vector<std::string> display;
  display.reserve(options.size());
  for (const T& v : options) display.push_back(detail::display_value(v));
  return Sketch<T>::from_run(
      [options = std::move(options), display = std::move(display), score,
       tag = std::move(tag)](Graph&) -> Step<T> {
        return ChoicePoint<T>{display, score, tag, [options](std::size_t i) {
                                return Sketch<T>::pure(options.at(i));
                              }};
      });
}

// choose with fixed scores; handy for tests and gold conditioning.
template <typename T>
Sketch<T> choose_scores(std::vector<T> options, std::vector<double> scores,
                        ChoiceTag tag = {}) {
  if (options.size() != scores.size()) {
    throw GraphError("choose_scores: " + std::to_string(options.size()) +
                     " options but " + std::to_string(scores.size()) +
                     " scores");
  }
  return Sketch<NodeRef>::compute([scores](Graph& g) {
           return g.constant(Tensor::vector(scores));
         })
      .and_then([options = std::move(options), tag = std::move(tag)](
                    NodeRef score) { return choose(options, score, tag); });
}

// Conditioning: a false condition removes the execution from the
// distribution.
inline Sketch<Unit> require(bool cond) {
  return cond ? Sketch<Unit>::pure(Unit{}) : Sketch<Unit>::fail();
}

}  // namespace pnp
