#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pnp/foodweb/ast.hpp"
#include "pnp/foodweb/model.hpp"
#include "pnp/foodweb/web.hpp"
#include "pnp/sketch.hpp"

namespace pnp::foodweb {

// Everything one program execution environment shares: the candidate
// labels in canonical (text) order, the decision scorer, and, for
// conditional sketches, the gold values to pin decisions to.
struct EvalEnv {
  std::vector<std::string> labels;
  DecisionScorer scorer;
  std::optional<std::map<ChoiceTag, bool>> gold;
};
using EnvPtr = std::shared_ptr<const EvalEnv>;

// Decisions already made on this execution branch. Threaded through the
// computation by value: branches diverge, so the cache is branch-local.
using Memo = std::map<ChoiceTag, bool>;

template <typename T>
struct MemoVal {
  T value;
  Memo memo;
};

template <typename T>
using DecisionSketch = Sketch<MemoVal<T>>;

// The two primitive diagram questions. The first query at a site scores a
// fresh choice; later queries on the same branch reuse the memoized
// outcome without adding score or trace. Under a gold map, each fresh
// decision is followed by require(decision == gold), and reaching a site
// with no gold entry is a data error.
DecisionSketch<bool> organism(EnvPtr env, Memo memo, const std::string& x);
DecisionSketch<bool> eat(EnvPtr env, Memo memo, const std::string& x,
                         const std::string& y);

// Compiles a program over the decisions above. The answer is a pure
// function of the decided values; all randomness lives in the choices.
DecisionSketch<Answer> compile_program(EnvPtr env, Memo memo,
                                       const ProgramAst& ast);

Sketch<Answer> execute_with(const ProgramAst& ast, const DetectionGraph& d,
                            DecisionScorer scorer);

Sketch<Answer> execute(const ProgramAst& ast, const DetectionGraph& d,
                       const ModelSpec& spec);

// The conditional member of a training pair: the same computation with
// every decision pinned to its gold value.
Sketch<Answer> conditional_with(const ProgramAst& ast,
                                const DetectionGraph& d,
                                DecisionScorer scorer, const GoldTrace& gold);

Sketch<Answer> conditional_sketch(const ProgramAst& ast,
                                  const DetectionGraph& d,
                                  const ModelSpec& spec,
                                  const GoldTrace& gold);

}  // namespace pnp::foodweb
