#include "pnp/harness/dataset.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "pnp/errors.hpp"
#include "pnp/foodweb/executor.hpp"
#include "pnp/foodweb/model.hpp"
#include "pnp/inference.hpp"
#include "pnp/random.hpp"

namespace pnp::harness {

using foodweb::Answer;
using foodweb::CauseQuery;
using foodweb::Change;
using foodweb::CountQuery;
using foodweb::DetectionGraph;
using foodweb::EatsQuery;
using foodweb::FoodWeb;
using foodweb::GoldTrace;
using foodweb::ProgramAst;
using foodweb::TertiaryConsumerQuery;

namespace {

const char* const kOrganismNames[] = {
    "grass",   "algae",   "shrubs",  "berries", "acorns",  "mice",
    "rabbits", "deer",    "snakes",  "hawks",   "owls",    "foxes",
    "frogs",   "crickets", "beetles", "minnows", "perch",   "herons",
    "wolves",  "elk",     "voles",   "shrews",  "lynx",    "sparrows",
};
const char* const kDistractorNames[] = {
    "title", "legend", "key", "caption", "note", "figure", "label", "source",
};

std::vector<std::string> pick_names(SplitMix64& rng, std::size_t n,
                                    const char* const* pool,
                                    std::size_t pool_size,
                                    const std::string& fallback_prefix) {
  std::vector<std::string> names(pool, pool + pool_size);
  rng.shuffle(names);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < names.size()) {
      out.push_back(names[i]);
    } else {
      out.push_back(fallback_prefix + std::to_string(i));
    }
  }
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Random DAG: organisms get ranks from their sampled order and edges only
// run from higher rank (predator) to lower rank (prey).
FoodWeb sample_web(SplitMix64& rng, const std::vector<std::string>& organisms,
                   double density) {
  FoodWeb web;
  web.organisms.insert(organisms.begin(), organisms.end());
  for (std::size_t hi = 1; hi < organisms.size(); ++hi) {
    for (std::size_t lo = 0; lo < hi; ++lo) {
      if (rng.bernoulli(density)) {
        web.eats.insert({organisms[hi], organisms[lo]});
      }
    }
  }
  return web;
}

DetectionGraph sample_detections(SplitMix64& rng, const FoodWeb& web,
                                 const std::vector<std::string>& organisms,
                                 const std::vector<std::string>& distractors,
                                 const NoiseConfig& noise) {
  DetectionGraph d;
  auto add_text = [&](const std::string& label, bool is_organism) {
    foodweb::TextDetection t;
    t.label = label;
    t.x = rng.uniform01();
    t.y = rng.uniform01();
    t.organism_score = clamp01(0.9 * (is_organism ? 1.0 : 0.0) + 0.1 +
                               rng.gaussian(noise.score_noise_sd));
    d.texts.push_back(std::move(t));
  };
  for (const std::string& label : organisms) add_text(label, true);
  for (const std::string& label : distractors) add_text(label, false);

  for (const auto& [pred, prey] : web.eats) {
    foodweb::ArrowDetection a;
    a.tail_label = pred;
    a.head_label = prey;
    a.confidence = clamp01(0.8 + rng.gaussian(noise.score_noise_sd));
    a.geometry = {noise.geometry_signal ? 1.0 : 0.0, 0.0, 0.0, 0.0};
    d.arrows.push_back(std::move(a));
  }
  std::vector<std::string> labels = d.labels();
  for (const std::string& from : labels) {
    for (const std::string& to : labels) {
      if (from == to || web.has_eats(from, to)) continue;
      if (!rng.bernoulli(noise.arrow_confusion_rate)) continue;
      foodweb::ArrowDetection a;
      a.tail_label = from;
      a.head_label = to;
      a.confidence = clamp01(0.6 + rng.gaussian(noise.score_noise_sd));
      a.geometry = {0.0, 0.0, 0.0, 0.0};
      d.arrows.push_back(std::move(a));
    }
  }
  return d;
}

std::string fresh_var(const std::vector<std::string>& labels) {
  std::string var = "x";
  while (std::find(labels.begin(), labels.end(), var) != labels.end()) {
    var += "x";
  }
  return var;
}

const std::string& pick_label(SplitMix64& rng,
                              const std::vector<std::string>& labels) {
  return labels[rng.index(labels.size())];
}

ProgramAst sample_program(SplitMix64& rng, const FoodWeb& web,
                          const std::vector<std::string>& organisms,
                          const std::vector<std::string>& all_labels,
                          std::size_t family) {
  std::vector<std::pair<std::string, std::string>> edges(web.eats.begin(),
                                                         web.eats.end());
  switch (family % 4) {
    case 0: {  // eats: half gold edges, half random pairs
      if (!edges.empty() && rng.bernoulli(0.5)) {
        const auto& [pred, prey] = edges[rng.index(edges.size())];
        return EatsQuery{pred, prey};
      }
      const std::string& a = pick_label(rng, organisms);
      std::string b = pick_label(rng, organisms);
      while (b == a) b = pick_label(rng, organisms);
      return EatsQuery{a, b};
    }
    case 1: {  // count: who eats a (preferably preyed-on) organism
      std::string object = edges.empty()
                               ? pick_label(rng, organisms)
                               : edges[rng.index(edges.size())].second;
      return CountQuery{fresh_var(all_labels),
                        EatsQuery{fresh_var(all_labels), object}};
    }
    case 2:
      return TertiaryConsumerQuery{pick_label(rng, organisms)};
    default: {  // cause: source must touch an edge
      if (edges.empty()) {
        throw DataError("cause program needs at least one edge");
      }
      const auto& edge = edges[rng.index(edges.size())];
      const std::string& source = rng.bernoulli(0.5) ? edge.first : edge.second;
      std::string target = pick_label(rng, organisms);
      while (target == source) target = pick_label(rng, organisms);
      Change change = rng.bernoulli(0.5) ? Change::kIncrease : Change::kDecrease;
      return CauseQuery{change, source, target};
    }
  }
}

// Gold answer and trace: walk the executor forcing every decision to its
// gold-web value, recording the visited sites in order.
ProgramExample annotate(const ProgramAst& ast, const FoodWeb& web,
                        const DetectionGraph& detections) {
  auto resolve = [&web](const ChoiceTag& tag) {
    if (tag.kind == "organism") return web.has_organism(tag.args.at(0));
    if (tag.kind == "eat") return web.has_eats(tag.args.at(0), tag.args.at(1));
    throw DataError("gold resolver: unknown tag " + to_string(tag));
  };

  ParamSet no_params;
  Graph g(no_params);
  Sketch<Answer> sketch =
      foodweb::execute_with(ast, detections, foodweb::oracle_scorer(web));
  GoldTrace trace;
  ExecutionEntry<Answer> walked = guided_walk(
      g, sketch,
      [&](const ChoicePoint<Answer>& cp, const Tensor&) -> std::size_t {
        bool gold = resolve(cp.tag);
        trace.decisions.emplace_back(cp.tag, gold);
        return gold ? 0 : 1;
      });

  // Independent recomputation of the answer from the gold relation.
  Answer expected =
      foodweb::answer_on_web(ast, detections.labels(), web);
  if (!(walked.value == expected)) {
    throw DataError("generator self-check failed for " +
                    foodweb::print_program(ast) + ": walked " +
                    to_string(walked.value) + ", relation oracle says " +
                    to_string(expected));
  }

  // Replaying the recorded trace must reproduce the same answer.
  std::vector<std::size_t> indices;
  indices.reserve(trace.decisions.size());
  for (const auto& [tag, gold] : trace.decisions) {
    indices.push_back(gold ? 0 : 1);
  }
  Graph replay_graph(no_params);
  ExecutionEntry<Answer> replayed = replay(replay_graph, sketch, indices);
  if (!(replayed.value == walked.value)) {
    throw DataError("generator replay mismatch for " +
                    foodweb::print_program(ast));
  }

  return ProgramExample{ast, walked.value, std::move(trace)};
}

}  // namespace

std::vector<DatasetExample> generate(const GenConfig& config) {
  if (config.organisms_per_web < 2) {
    throw DataError("generator: needs at least two organisms per web");
  }
  SplitMix64 rng(config.seed);
  std::vector<DatasetExample> out;
  out.reserve(config.num_webs);
  bool needs_edges = config.programs_per_web >= 4;  // the cause family
  for (std::size_t w = 0; w < config.num_webs; ++w) {
    constexpr int kMaxAttempts = 32;
    bool built = false;
    for (int attempt = 0; attempt < kMaxAttempts && !built; ++attempt) {
      std::vector<std::string> organisms = pick_names(
          rng, config.organisms_per_web, kOrganismNames,
          std::size(kOrganismNames), "org");
      std::vector<std::string> distractors = pick_names(
          rng, config.distractor_texts, kDistractorNames,
          std::size(kDistractorNames), "text");
      FoodWeb web = sample_web(rng, organisms, config.edge_density);
      if (needs_edges && web.eats.empty()) continue;
      DatasetExample example;
      example.web = web;
      example.detections =
          sample_detections(rng, web, organisms, distractors, config.noise);
      std::vector<std::string> labels = example.detections.labels();
      for (std::size_t p = 0; p < config.programs_per_web; ++p) {
        ProgramAst ast = sample_program(rng, web, organisms, labels, p);
        example.programs.push_back(annotate(ast, web, example.detections));
      }
      out.push_back(std::move(example));
      built = true;
    }
    if (!built) {
      throw DataError(
          "generator: could not sample a web satisfying the config (density "
          "too low for cause programs?)");
    }
  }
  return out;
}

}  // namespace pnp::harness
