#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/graph.hpp"
#include "pnp/sketch.hpp"

namespace pnp {

// One resolved choice in an execution. `score_node` points into the graph
// the execution ran on; training seeds expected counts there.
struct ChoiceRecord {
  ChoiceTag tag;
  std::size_t option_index = 0;
  double option_score = 0.0;
  std::string chosen_display;
  NodeRef score_node;
};

using Trace = std::vector<ChoiceRecord>;

// Orders traces by (tag, option index) pairs; two distinct execution paths
// always differ at their first divergence, so this is a strict order and
// keeps distribution output deterministic.
inline bool trace_less(const Trace& a, const Trace& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a[i].tag <=> b[i].tag; c != 0) return c < 0;
    if (a[i].option_index != b[i].option_index) {
      return a[i].option_index < b[i].option_index;
    }
  }
  return a.size() < b.size();
}

inline bool trace_same_choices(const Trace& a, const Trace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].tag != b[i].tag || a[i].option_index != b[i].option_index) {
      return false;
    }
  }
  return true;
}

template <typename T>
struct ExecutionEntry {
  T value;
  double score = 0.0;
  double prob = 0.0;
  Trace trace;
};

// An explicit distribution over completed executions: softmax over the
// accumulated scores of the executions inference found. Entries are sorted
// by probability descending, ties by trace order. Duplicate values stay
// separate entries until marginalize() merges them. An empty distribution
// is the signal that every execution failed.
template <typename T>
class Distribution {
 public:
  Distribution() = default;

  static Distribution from_executions(
      std::vector<ExecutionEntry<T>> entries) {
    Distribution d;
    d.entries_ = std::move(entries);
    if (d.entries_.empty()) {
      d.log_partition_ = -std::numeric_limits<double>::infinity();
      return d;
    }
    double m = d.entries_[0].score;
    for (const auto& e : d.entries_) m = std::max(m, e.score);
    double sum = 0.0;
    for (const auto& e : d.entries_) sum += std::exp(e.score - m);
    d.log_partition_ = m + std::log(sum);
    for (auto& e : d.entries_) e.prob = std::exp(e.score - d.log_partition_);
    std::sort(d.entries_.begin(), d.entries_.end(),
              [](const ExecutionEntry<T>& a, const ExecutionEntry<T>& b) {
                if (a.score != b.score) return a.score > b.score;
                return trace_less(a.trace, b.trace);
              });
    return d;
  }

  const std::vector<ExecutionEntry<T>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const ExecutionEntry<T>& best() const { return entries_.front(); }
  double log_partition() const { return log_partition_; }

 private:
  std::vector<ExecutionEntry<T>> entries_;
  double log_partition_ = -std::numeric_limits<double>::infinity();
};

namespace detail {

template <typename T>
struct Partial {
  Sketch<T> cont;
  double score;
  Trace trace;
};

template <typename T>
const Tensor& choice_scores(Graph& g, const ChoicePoint<T>& cp) {
  const Tensor& s = g.forward(cp.score);
  if (s.size() != cp.option_count()) {
    throw GraphError("choose: score node has " + std::to_string(s.size()) +
                     " entries for " + std::to_string(cp.option_count()) +
                     " options (tag " + to_string(cp.tag) + ")");
  }
  return s;
}

template <typename T>
Partial<T> expand_option(const Partial<T>& ex, const ChoicePoint<T>& cp,
                         const Tensor& scores, std::size_t i) {
  Trace trace = ex.trace;
  trace.push_back(ChoiceRecord{cp.tag, i, scores[i], cp.option_display[i],
                               cp.score});
  return Partial<T>{cp.resume(i), ex.score + scores[i], std::move(trace)};
}

}  // namespace detail

// Beam search over partial executions. Every execution extends the one
// graph `g`; forward passes happen lazily per score node. Each step
// advances the whole frontier one choice deep, drops failures, moves
// finished executions to the result set (completed executions are never
// pruned), and keeps the best `beam_width` partials by score, breaking
// ties by creation order. Normalization is over the executions found, so
// a narrow beam yields an approximate partition function.
template <typename T>
Distribution<T> beam_search_on(Graph& g, const Sketch<T>& sketch,
                               std::size_t beam_width) {
  if (beam_width == 0) throw GraphError("beam_search: width must be >= 1");
  std::vector<ExecutionEntry<T>> done;
  std::vector<detail::Partial<T>> frontier;
  frontier.push_back({sketch, 0.0, {}});
  while (!frontier.empty()) {
    std::vector<detail::Partial<T>> next;
    for (const auto& ex : frontier) {
      Step<T> step = ex.cont.advance(g);
      if (auto* fin = std::get_if<Done<T>>(&step)) {
        done.push_back({std::move(fin->value), ex.score, 0.0, ex.trace});
        continue;
      }
      if (std::holds_alternative<Failed>(step)) continue;
      const auto& cp = std::get<ChoicePoint<T>>(step);
      const Tensor& scores = detail::choice_scores(g, cp);
      for (std::size_t i = 0; i < cp.option_count(); ++i) {
        next.push_back(detail::expand_option(ex, cp, scores, i));
      }
    }
    if (next.size() > beam_width) {
      std::stable_sort(next.begin(), next.end(),
                       [](const detail::Partial<T>& a,
                          const detail::Partial<T>& b) {
                         return a.score > b.score;
                       });
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(beam_width),
                 next.end());
    }
    frontier = std::move(next);
  }
  return Distribution<T>::from_executions(std::move(done));
}

template <typename T>
Distribution<T> beam_search(const Sketch<T>& sketch, std::size_t beam_width,
                            ParamSet& params) {
  Graph g(params);
  return beam_search_on(g, sketch, beam_width);
}

inline constexpr std::size_t kDefaultEnumerationLimit = 1'000'000;

// Exact distribution by depth-first expansion of every choice. The guard
// limit bounds completed executions; sketches with unbounded choice trees
// are the caller's problem.
template <typename T>
Distribution<T> enumerate_on(Graph& g, const Sketch<T>& sketch,
                             std::size_t max_executions =
                                 kDefaultEnumerationLimit) {
  std::vector<ExecutionEntry<T>> done;
  std::vector<detail::Partial<T>> stack;
  stack.push_back({sketch, 0.0, {}});
  while (!stack.empty()) {
    detail::Partial<T> ex = std::move(stack.back());
    stack.pop_back();
    Step<T> step = ex.cont.advance(g);
    if (auto* fin = std::get_if<Done<T>>(&step)) {
      if (done.size() >= max_executions) {
        throw EnumerationLimitError(
            "enumerate: more than " + std::to_string(max_executions) +
            " executions");
      }
      done.push_back({std::move(fin->value), ex.score, 0.0, ex.trace});
      continue;
    }
    if (std::holds_alternative<Failed>(step)) continue;
    const auto& cp = std::get<ChoicePoint<T>>(step);
    const Tensor& scores = detail::choice_scores(g, cp);
    for (std::size_t i = cp.option_count(); i-- > 0;) {
      stack.push_back(detail::expand_option(ex, cp, scores, i));
    }
  }
  return Distribution<T>::from_executions(std::move(done));
}

template <typename T>
Distribution<T> enumerate(const Sketch<T>& sketch, ParamSet& params,
                          std::size_t max_executions =
                              kDefaultEnumerationLimit) {
  Graph g(params);
  return enumerate_on(g, sketch, max_executions);
}

// Merges entries with equal values; probabilities add, the representative
// trace comes from the most probable member.
template <typename T>
Distribution<T> marginalize(const Distribution<T>& d) {
  std::vector<ExecutionEntry<T>> merged;
  for (const auto& e : d.entries()) {  // entries are sorted best-first
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const ExecutionEntry<T>& m) {
                             return m.value == e.value;
                           });
    if (it == merged.end()) {
      merged.push_back(e);
    } else {
      // logaddexp keeps prob = exp(score - logZ) consistent after merging.
      double hi = std::max(it->score, e.score);
      it->score = hi + std::log(std::exp(it->score - hi) +
                                std::exp(e.score - hi));
    }
  }
  return Distribution<T>::from_executions(std::move(merged));
}

// Advances a sketch resolving every choice through `pick`, which sees the
// choice point and its forwarded scores and returns the option index to
// follow. One call walks exactly one execution; teacher forcing and
// gold-trace recording are both this walk with different pickers.
template <typename T, typename PickFn>
ExecutionEntry<T> guided_walk(Graph& g, const Sketch<T>& sketch, PickFn pick) {
  detail::Partial<T> ex{sketch, 0.0, {}};
  for (;;) {
    Step<T> step = ex.cont.advance(g);
    if (auto* fin = std::get_if<Done<T>>(&step)) {
      return {std::move(fin->value), ex.score, 1.0, ex.trace};
    }
    if (std::holds_alternative<Failed>(step)) {
      throw GraphError("guided_walk: execution failed");
    }
    const auto& cp = std::get<ChoicePoint<T>>(step);
    const Tensor& scores = detail::choice_scores(g, cp);
    std::size_t i = pick(cp, scores);
    if (i >= cp.option_count()) {
      throw GraphError("guided_walk: picked index " + std::to_string(i) +
                       " out of range at tag " + to_string(cp.tag));
    }
    ex = detail::expand_option(ex, cp, scores, i);
  }
}

// Re-advances a sketch along a recorded option-index sequence. Used to
// check that returned traces are valid replays and to verify gold data.
template <typename T>
ExecutionEntry<T> replay(Graph& g, const Sketch<T>& sketch,
                         const std::vector<std::size_t>& indices) {
  detail::Partial<T> ex{sketch, 0.0, {}};
  std::size_t used = 0;
  for (;;) {
    Step<T> step = ex.cont.advance(g);
    if (auto* fin = std::get_if<Done<T>>(&step)) {
      if (used != indices.size()) {
        throw GraphError("replay: " + std::to_string(indices.size() - used) +
                         " unused choice indices");
      }
      return {std::move(fin->value), ex.score, 1.0, ex.trace};
    }
    if (std::holds_alternative<Failed>(step)) {
      throw GraphError("replay: execution failed");
    }
    const auto& cp = std::get<ChoicePoint<T>>(step);
    if (used == indices.size()) {
      throw GraphError("replay: ran out of choice indices at tag " +
                       to_string(cp.tag));
    }
    std::size_t i = indices[used++];
    if (i >= cp.option_count()) {
      throw GraphError("replay: index " + std::to_string(i) +
                       " out of range at tag " + to_string(cp.tag));
    }
    const Tensor& scores = detail::choice_scores(g, cp);
    ex = detail::expand_option(ex, cp, scores, i);
  }
}

}  // namespace pnp
