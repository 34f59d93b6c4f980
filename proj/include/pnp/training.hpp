#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pnp/graph.hpp"
#include "pnp/inference.hpp"
#include "pnp/random.hpp"
#include "pnp/sketch.hpp"

namespace pnp {

// One supervised example: the same computation unconditioned and with the
// gold decisions enforced. Thunks, because every inference call wants a
// fresh sketch over a fresh graph.
template <typename T>
struct TrainingExample {
  std::function<Sketch<T>()> unconditional;
  std::function<Sketch<T>()> conditional;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 10;
  std::size_t beam_width = 32;
  std::uint64_t shuffle_seed = 0;
  double l2 = 0.0;
};

struct EpochStats {
  double mean_log_likelihood = 0.0;
  std::size_t processed = 0;
  std::size_t skipped = 0;  // conditional beam came back empty
};

struct TrainReport {
  std::vector<EpochStats> epochs;
};

// Loglikelihood of the conditioned outcomes under the model:
// logZ(conditional) - logZ(unconditional), each over the executions the
// beam found. Empty conditional beam means the gold trace fell off the
// beam; the example is infeasible at this width.
template <typename T>
std::optional<double> log_likelihood(const TrainingExample<T>& example,
                                     ParamSet& params,
                                     std::size_t beam_width) {
  Distribution<T> cond = beam_search(example.conditional(), beam_width, params);
  if (cond.empty()) return std::nullopt;
  Distribution<T> uncond =
      beam_search(example.unconditional(), beam_width, params);
  if (uncond.empty()) return std::nullopt;
  return cond.log_partition() - uncond.log_partition();
}

// Per-choice expected counts of a distribution, as one-hot adjoint seeds:
// for each execution with probability p and each of its records (node n,
// option i), coordinate i of the seed at n gains sign * p.
template <typename T>
std::map<NodeRef, Tensor> expected_count_seeds(Graph& g,
                                               const Distribution<T>& dist,
                                               double sign) {
  std::map<NodeRef, Tensor> seeds;
  for (const auto& entry : dist.entries()) {
    for (const ChoiceRecord& rec : entry.trace) {
      auto it = seeds.find(rec.score_node);
      if (it == seeds.end()) {
        // Score nodes were forwarded when inference expanded the choice.
        it = seeds
                 .emplace(rec.score_node,
                          Tensor::zeros(g.node(rec.score_node).value->shape()))
                 .first;
      }
      it->second[rec.option_index] += sign * entry.prob;
    }
  }
  return seeds;
}

// Expected-count gradient of the loglikelihood, accumulated into
// params.gradients: conditional counts push up, unconditional counts push
// down, one backward sweep per graph. Returns the example loglikelihood,
// or nullopt (and touches nothing) when the conditional beam is empty.
template <typename T>
std::optional<double> gradient(const TrainingExample<T>& example,
                               ParamSet& params, std::size_t beam_width) {
  Graph cond_graph(params);
  Distribution<T> cond =
      beam_search_on(cond_graph, example.conditional(), beam_width);
  if (cond.empty()) return std::nullopt;
  Graph uncond_graph(params);
  Distribution<T> uncond =
      beam_search_on(uncond_graph, example.unconditional(), beam_width);
  if (uncond.empty()) return std::nullopt;

  auto backprop = [](Graph& graph, const Distribution<T>& dist, double sign) {
    std::map<NodeRef, Tensor> seeds = expected_count_seeds(graph, dist, sign);
    std::vector<std::pair<NodeRef, Tensor>> seed_list(seeds.begin(),
                                                      seeds.end());
    graph.backward(seed_list);
  };
  backprop(cond_graph, cond, +1.0);
  backprop(uncond_graph, uncond, -1.0);
  return cond.log_partition() - uncond.log_partition();
}

// Ascent step on the loglikelihood: theta += lr * (grad - l2 * theta);
// gradients are zeroed afterwards.
inline void sgd_step(ParamSet& params, double learning_rate, double l2 = 0.0) {
  for (const std::string& name : params.names()) {
    const Tensor& g = params.gradient(name);
    Tensor& v = params.mutable_value(name);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] += learning_rate * (g[i] - l2 * v[i]);
    }
  }
  params.zero_gradients();
}

// Plain SGD over shuffled examples, one update per example. Infeasible
// examples (gold pruned off the beam) are skipped and counted, not errors.
template <typename T>
TrainReport train(const std::vector<TrainingExample<T>>& examples,
                  const TrainConfig& config, ParamSet& params) {
  TrainReport report;
  SplitMix64 shuffle_rng(config.shuffle_seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochStats stats;
    double total_ll = 0.0;
    for (std::size_t idx : order) {
      std::optional<double> ll =
          gradient(examples[idx], params, config.beam_width);
      if (!ll) {
        ++stats.skipped;
        continue;
      }
      sgd_step(params, config.learning_rate, config.l2);
      total_ll += *ll;
      ++stats.processed;
    }
    stats.mean_log_likelihood =
        stats.processed ? total_ll / static_cast<double>(stats.processed)
                        : 0.0;
    report.epochs.push_back(stats);
  }
  return report;
}

}  // namespace pnp
