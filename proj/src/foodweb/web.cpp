#include "pnp/foodweb/web.hpp"

#include <algorithm>

#include "pnp/errors.hpp"

namespace pnp::foodweb {

const TextDetection& DetectionGraph::text(const std::string& label) const {
  for (const TextDetection& t : texts) {
    if (t.label == label) return t;
  }
  throw DataError("unknown text label '" + label + "'");
}

std::vector<std::string> DetectionGraph::labels() const {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const TextDetection& t : texts) out.push_back(t.label);
  return out;
}

std::map<ChoiceTag, bool> GoldTrace::as_map() const {
  std::map<ChoiceTag, bool> out;
  for (const auto& [tag, gold] : decisions) {
    if (!out.emplace(tag, gold).second) {
      throw DataError("gold trace repeats tag " + to_string(tag));
    }
  }
  return out;
}

DecidedRelation DecidedRelation::from_web(const FoodWeb& web) {
  return DecidedRelation{
      [web](const std::string& x) { return web.has_organism(x); },
      [web](const std::string& x, const std::string& y) {
        return web.has_eats(x, y);
      }};
}

Effect propagate_over(const std::vector<std::string>& labels,
                      const DecidedRelation& relation, Change change,
                      const std::string& source, const std::string& target) {
  std::map<std::string, int> sign;
  sign[source] = change == Change::kIncrease ? +1 : -1;
  std::vector<std::string> frontier{source};
  for (std::size_t depth = 0; depth < labels.size(); ++depth) {
    if (auto it = sign.find(target); it != sign.end()) {
      if (it->second > 0) return Effect::kIncrease;
      if (it->second < 0) return Effect::kDecrease;
      return Effect::kSame;
    }
    if (frontier.empty()) break;
    std::map<std::string, int> proposals;
    for (const std::string& u : frontier) {
      int s = sign[u];
      for (const std::string& c : labels) {
        if (sign.count(c)) continue;
        if (!relation.organism(c)) continue;
        auto propose = [&](int value) {
          auto [it, inserted] = proposals.emplace(c, value);
          if (!inserted && it->second != value) it->second = 0;
        };
        if (relation.eat(c, u)) propose(s);    // predator of u
        if (relation.eat(u, c)) propose(-s);   // prey of u
      }
    }
    frontier.clear();
    for (const std::string& c : labels) {
      auto it = proposals.find(c);
      if (it == proposals.end()) continue;
      sign[c] = it->second;
      if (it->second != 0) frontier.push_back(c);
    }
  }
  if (auto it = sign.find(target); it != sign.end()) {
    if (it->second > 0) return Effect::kIncrease;
    if (it->second < 0) return Effect::kDecrease;
  }
  return Effect::kSame;
}

Effect propagate_effect(const FoodWeb& web, Change change,
                        const std::string& source, const std::string& target) {
  if (!web.has_organism(source)) {
    throw DataError("propagate_effect: unknown organism '" + source + "'");
  }
  if (!web.has_organism(target)) {
    throw DataError("propagate_effect: unknown organism '" + target + "'");
  }
  std::vector<std::string> labels(web.organisms.begin(), web.organisms.end());
  return propagate_over(labels, DecidedRelation::from_web(web), change, source,
                        target);
}

namespace {

// Exists a vertex-distinct eat path x -> a -> b -> p over decided
// organisms where p has no decided prey. Mirrors the lazy search the
// executor performs, minus the choice bookkeeping.
bool tertiary_consumer_on(const std::vector<std::string>& labels,
                          const DecidedRelation& r, const std::string& x) {
  if (!r.organism(x)) return false;
  auto is_producer = [&](const std::string& p) {
    for (const std::string& q : labels) {
      if (q == p) continue;
      if (r.organism(q) && r.eat(p, q)) return false;
    }
    return true;
  };
  for (const std::string& a : labels) {
    if (a == x || !r.organism(a) || !r.eat(x, a)) continue;
    for (const std::string& b : labels) {
      if (b == x || b == a || !r.organism(b) || !r.eat(a, b)) continue;
      for (const std::string& p : labels) {
        if (p == x || p == a || p == b) continue;
        if (!r.organism(p) || !r.eat(b, p)) continue;
        if (is_producer(p)) return true;
      }
    }
  }
  return false;
}

}  // namespace

Answer answer_on_relation(const ProgramAst& ast,
                          const std::vector<std::string>& labels,
                          const DecidedRelation& relation) {
  struct Eval {
    const std::vector<std::string>& labels;
    const DecidedRelation& r;

    Answer operator()(const EatsQuery& q) const {
      return Answer::of_bool(r.eat(q.subject, q.object));
    }
    Answer operator()(const OrganismQuery& q) const {
      return Answer::of_bool(r.organism(q.label));
    }
    Answer operator()(const CountQuery& q) const {
      std::int64_t count = 0;
      for (const std::string& c : labels) {
        if (c == q.fixed_label()) continue;
        if (!r.organism(c)) continue;
        bool hit = q.var_is_subject() ? r.eat(c, q.fixed_label())
                                      : r.eat(q.fixed_label(), c);
        if (hit) ++count;
      }
      return Answer::of_int(count);
    }
    Answer operator()(const TertiaryConsumerQuery& q) const {
      return Answer::of_bool(tertiary_consumer_on(labels, r, q.label));
    }
    Answer operator()(const CauseQuery& q) const {
      if (!r.organism(q.source) || !r.organism(q.target)) {
        return Answer::of_effect(Effect::kSame);
      }
      return Answer::of_effect(
          propagate_over(labels, r, q.change, q.source, q.target));
    }
  };
  return std::visit(Eval{labels, relation}, ast);
}

Answer answer_on_web(const ProgramAst& ast,
                     const std::vector<std::string>& labels,
                     const FoodWeb& web) {
  return answer_on_relation(ast, labels, DecidedRelation::from_web(web));
}

}  // namespace pnp::foodweb
