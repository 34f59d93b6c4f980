#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "pnp/foodweb/web.hpp"
#include "pnp/graph.hpp"
#include "pnp/sketch.hpp"

namespace pnp::foodweb {

enum class ModelKind { kLoglinear, kMlp2, kMaxpool };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct InitSpec {
  enum class Kind { kZeros, kUniform };
  Kind kind = Kind::kZeros;
  double scale = 0.1;        // uniform only
  std::uint64_t seed = 0;    // uniform only

  static InitSpec zeros() { return {}; }
  static InitSpec uniform(double scale, std::uint64_t seed) {
    return {Kind::kUniform, scale, seed};
  }
};

// Which architecture scores the organism/eat decisions.
//  - loglinear: score = W phi over the hand features
//  - mlp2:      score = W2 tanh(W1 phi + b1) + b2 over the hand features
//  - maxpool:   the same two-layer net, with the eat features extended by
//               a maxpool over per-arrow [confidence ++ geometry] rows
struct ModelSpec {
  ModelKind kind = ModelKind::kMlp2;
  std::size_t hidden_dim = 32;
  InitSpec init;
};

// Fresh parameters with the shapes the spec'd architecture needs, named
// "<head>.w" (loglinear) or "<head>.w1/b1/w2/b2" for heads "organism" and
// "eat".
ParamSet init_params(const ModelSpec& spec);

// Builds one decision's scoring subgraph and wraps it in a two-way choice
// over {true, false} (true is option 0). The tag selects the head and
// feature arguments: ("organism", [x]) or ("eat", [x, y]).
Sketch<bool> score_decision(const ModelSpec& spec, const DetectionGraph& d,
                            const ChoiceTag& tag);

// Produces the scoring sketch for any decision site of one diagram.
using DecisionScorer = std::function<Sketch<bool>(const ChoiceTag&)>;

DecisionScorer model_scorer(const ModelSpec& spec, DetectionGraph d);

// Scores +1 for the gold option and -1 for the other; teacher and decoder
// both become exact on data generated from `web`.
DecisionScorer oracle_scorer(FoodWeb web);

}  // namespace pnp::foodweb
