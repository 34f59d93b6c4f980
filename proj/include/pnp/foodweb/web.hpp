#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pnp/foodweb/ast.hpp"
#include "pnp/sketch.hpp"

namespace pnp::foodweb {

// Gold-standard ecosystem: organism labels plus the directed eat relation,
// pairs ordered (predator, prey). The relation is acyclic and has no
// self-loops.
struct FoodWeb {
  std::set<std::string> organisms;
  std::set<std::pair<std::string, std::string>> eats;

  bool has_organism(const std::string& x) const {
    return organisms.count(x) > 0;
  }
  bool has_eats(const std::string& predator, const std::string& prey) const {
    return eats.count({predator, prey}) > 0;
  }
  bool operator==(const FoodWeb&) const = default;
};

struct TextDetection {
  std::string label;
  double x = 0.0;  // position in the unit square
  double y = 0.0;
  double organism_score = 0.0;  // in [0, 1]
  bool operator==(const TextDetection&) const = default;
};

inline constexpr std::size_t kGeometryDim = 4;

struct ArrowDetection {
  std::string head_label;  // prey end
  std::string tail_label;  // predator end
  double confidence = 0.0;  // in [0, 1]
  std::vector<double> geometry;  // kGeometryDim channels
  bool operator==(const ArrowDetection&) const = default;
};

// Simulated vision output: noisy text and arrow detections.
struct DetectionGraph {
  std::vector<TextDetection> texts;
  std::vector<ArrowDetection> arrows;

  const TextDetection& text(const std::string& label) const;
  std::vector<std::string> labels() const;  // in text order
  bool operator==(const DetectionGraph&) const = default;
};

// The correct boolean outcome for every decision site of a program's gold
// execution, in advance order. Tags are unique within a trace.
struct GoldTrace {
  std::vector<std::pair<ChoiceTag, bool>> decisions;

  std::map<ChoiceTag, bool> as_map() const;  // throws DataError on dup tags
  bool operator==(const GoldTrace&) const = default;
};

// A fully or partially decided organism/eat assignment; the value source
// for the pure program semantics below. Unlike FoodWeb this may contain
// eat edges touching non-organisms or cycles (noisy models decide such
// relations), so traversals are depth-bounded.
struct DecidedRelation {
  std::function<bool(const std::string&)> organism;
  std::function<bool(const std::string&, const std::string&)> eat;

  static DecidedRelation from_web(const FoodWeb& web);
};

// Signed-reachability rules for population-change questions: the source
// takes the given change; a node with sign s passes s to its predators
// (their food supply moved) and -s to its prey (predation pressure moved).
// Each node takes the sign of its shallowest visit; conflicting proposals
// at equal depth make it `same`, and `same` nodes propagate nothing. An
// unreached target is `same`. Traversal depth is bounded by the label
// count, which also covers decided relations with cycles.
Effect propagate_over(const std::vector<std::string>& labels,
                      const DecidedRelation& relation, Change change,
                      const std::string& source, const std::string& target);

// Same rules over an explicit gold web; source and target must be web
// organisms.
Effect propagate_effect(const FoodWeb& web, Change change,
                        const std::string& source, const std::string& target);

// Pure program semantics over a decided relation; the oracle the data
// generator and the execution tests check against. `labels` is the
// candidate pool in canonical order.
Answer answer_on_relation(const ProgramAst& ast,
                          const std::vector<std::string>& labels,
                          const DecidedRelation& relation);

Answer answer_on_web(const ProgramAst& ast,
                     const std::vector<std::string>& labels,
                     const FoodWeb& web);

}  // namespace pnp::foodweb
