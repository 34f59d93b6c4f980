#include "pnp/foodweb/executor.hpp"

#include <algorithm>
#include <utility>

#include "pnp/errors.hpp"

namespace pnp::foodweb {

namespace {

DecisionSketch<bool> decide(EnvPtr env, Memo memo, ChoiceTag tag) {
  if (auto it = memo.find(tag); it != memo.end()) {
    return DecisionSketch<bool>::pure({it->second, std::move(memo)});
  }
  Sketch<bool> base = env->scorer(tag);
  if (env->gold) {
    auto git = env->gold->find(tag);
    if (git == env->gold->end()) {
      return DecisionSketch<bool>::from_run(
          [tag](Graph&) -> Step<MemoVal<bool>> {
            throw DataError("conditional execution reached site " +
                            to_string(tag) + " with no gold entry");
          });
    }
    bool gold_value = git->second;
    base = base.and_then([gold_value](bool v) {
      return require(v == gold_value).map([v](Unit) { return v; });
    });
  }
  return base.and_then([memo = std::move(memo), tag](bool v) {
    Memo extended = memo;
    extended.emplace(tag, v);
    return DecisionSketch<bool>::pure({v, std::move(extended)});
  });
}

}  // namespace

DecisionSketch<bool> organism(EnvPtr env, Memo memo, const std::string& x) {
  return decide(std::move(env), std::move(memo), ChoiceTag{"organism", {x}});
}

DecisionSketch<bool> eat(EnvPtr env, Memo memo, const std::string& x,
                         const std::string& y) {
  return decide(std::move(env), std::move(memo), ChoiceTag{"eat", {x, y}});
}

namespace {

// ---- count ----------------------------------------------------------------
// Sum over candidates c != fixed of [organism(c) and eat-pair(c)], with the
// eat query skipped when c is decided not to be an organism.

DecisionSketch<std::int64_t> count_from(EnvPtr env, Memo memo, CountQuery q,
                                        std::size_t idx, std::int64_t acc) {
  const std::vector<std::string>& labels = env->labels;
  while (idx < labels.size() && labels[idx] == q.fixed_label()) ++idx;
  if (idx == labels.size()) {
    return DecisionSketch<std::int64_t>::pure({acc, std::move(memo)});
  }
  std::string c = labels[idx];
  return organism(env, std::move(memo), c)
      .and_then([env, q, idx, acc, c](MemoVal<bool> org) {
        if (!org.value) {
          return count_from(env, std::move(org.memo), q, idx + 1, acc);
        }
        auto pair = q.var_is_subject()
                        ? eat(env, std::move(org.memo), c, q.fixed_label())
                        : eat(env, std::move(org.memo), q.fixed_label(), c);
        return pair.and_then([env, q, idx, acc](MemoVal<bool> e) {
          return count_from(env, std::move(e.memo), q, idx + 1,
                            acc + (e.value ? 1 : 0));
        });
      });
}

// ---- tertiary consumer ------------------------------------------------
// Backtracking search for a vertex-distinct decided eat chain
// x -> a -> b -> p whose endpoint p has no decided prey. Decisions made
// while probing a dead end stay decided for the rest of the execution.

DecisionSketch<bool> producer_check(EnvPtr env, Memo memo, std::string p,
                                    std::size_t idx) {
  const std::vector<std::string>& labels = env->labels;
  while (idx < labels.size() && labels[idx] == p) ++idx;
  if (idx == labels.size()) {
    return DecisionSketch<bool>::pure({true, std::move(memo)});
  }
  std::string q = labels[idx];
  return organism(env, std::move(memo), q)
      .and_then([env, p, idx, q](MemoVal<bool> org) {
        if (!org.value) {
          return producer_check(env, std::move(org.memo), p, idx + 1);
        }
        return eat(env, std::move(org.memo), p, q)
            .and_then([env, p, idx](MemoVal<bool> e) {
              if (e.value) {
                return DecisionSketch<bool>::pure({false, std::move(e.memo)});
              }
              return producer_check(env, std::move(e.memo), p, idx + 1);
            });
      });
}

DecisionSketch<bool> chain_from(EnvPtr env, Memo memo,
                                std::vector<std::string> path,
                                std::size_t idx) {
  const std::vector<std::string>& labels = env->labels;
  while (idx < labels.size() &&
         std::find(path.begin(), path.end(), labels[idx]) != path.end()) {
    ++idx;
  }
  if (idx == labels.size()) {
    return DecisionSketch<bool>::pure({false, std::move(memo)});
  }
  std::string c = labels[idx];
  return organism(env, std::move(memo), c)
      .and_then([env, path, idx, c](MemoVal<bool> org) {
        if (!org.value) {
          return chain_from(env, std::move(org.memo), path, idx + 1);
        }
        return eat(env, std::move(org.memo), path.back(), c)
            .and_then([env, path, idx, c](MemoVal<bool> e) {
              if (!e.value) {
                return chain_from(env, std::move(e.memo), path, idx + 1);
              }
              auto continue_here = [env, path, idx](Memo memo) {
                return chain_from(env, std::move(memo), path, idx + 1);
              };
              if (path.size() == 3) {  // c closes the 3-edge chain
                return producer_check(env, std::move(e.memo), c, 0)
                    .and_then([env, continue_here](MemoVal<bool> prod) {
                      if (prod.value) {
                        return DecisionSketch<bool>::pure(
                            {true, std::move(prod.memo)});
                      }
                      return continue_here(std::move(prod.memo));
                    });
              }
              std::vector<std::string> longer = path;
              longer.push_back(c);
              return chain_from(env, std::move(e.memo), std::move(longer), 0)
                  .and_then([env, continue_here](MemoVal<bool> found) {
                    if (found.value) {
                      return DecisionSketch<bool>::pure(
                          {true, std::move(found.memo)});
                    }
                    return continue_here(std::move(found.memo));
                  });
            });
      });
}

DecisionSketch<bool> tertiary(EnvPtr env, Memo memo, const std::string& x) {
  return organism(env, std::move(memo), x)
      .and_then([env, x](MemoVal<bool> org) {
        if (!org.value) {
          return DecisionSketch<bool>::pure({false, std::move(org.memo)});
        }
        return chain_from(env, std::move(org.memo), {x}, 0);
      });
}

// ---- cause ------------------------------------------------------------
// Layered signed BFS mirroring propagate_over: per layer, collect signed
// proposals from every frontier node to every unsigned organism candidate,
// merge (conflicts become 0 = same), then advance. Queries follow the
// canonical order (frontier order, then label order) so traces replay.

struct BfsState {
  std::map<std::string, int> sign;
  std::vector<std::string> frontier;
  std::size_t depth = 0;
};

using Proposals = std::map<std::string, int>;

void merge_proposal(Proposals& proposals, const std::string& c, int value) {
  auto [it, inserted] = proposals.emplace(c, value);
  if (!inserted && it->second != value) it->second = 0;
}

DecisionSketch<Proposals> collect_layer(EnvPtr env, Memo memo,
                                        std::shared_ptr<const BfsState> st,
                                        std::size_t u_idx, std::size_t c_idx,
                                        Proposals proposals) {
  const std::vector<std::string>& labels = env->labels;
  if (u_idx == st->frontier.size()) {
    return DecisionSketch<Proposals>::pure(
        {std::move(proposals), std::move(memo)});
  }
  if (c_idx == labels.size()) {
    return collect_layer(env, std::move(memo), st, u_idx + 1, 0,
                         std::move(proposals));
  }
  std::string u = st->frontier[u_idx];
  std::string c = labels[c_idx];
  if (st->sign.count(c)) {
    return collect_layer(env, std::move(memo), st, u_idx, c_idx + 1,
                         std::move(proposals));
  }
  int s = st->sign.at(u);
  return organism(env, std::move(memo), c)
      .and_then([env, st, u_idx, c_idx, proposals, u, c,
                 s](MemoVal<bool> org) {
        if (!org.value) {
          return collect_layer(env, std::move(org.memo), st, u_idx, c_idx + 1,
                               proposals);
        }
        return eat(env, std::move(org.memo), c, u)
            .and_then([env, st, u_idx, c_idx, proposals, u, c,
                       s](MemoVal<bool> cu) {
              Proposals acc = proposals;
              if (cu.value) merge_proposal(acc, c, s);  // c preys on u
              return eat(env, std::move(cu.memo), u, c)
                  .and_then([env, st, u_idx, c_idx, acc, c,
                             s](MemoVal<bool> uc) {
                    Proposals out = acc;
                    if (uc.value) merge_proposal(out, c, -s);  // u preys on c
                    return collect_layer(env, std::move(uc.memo), st, u_idx,
                                         c_idx + 1, std::move(out));
                  });
            });
      });
}

Effect effect_of_sign(int s) {
  if (s > 0) return Effect::kIncrease;
  if (s < 0) return Effect::kDecrease;
  return Effect::kSame;
}

DecisionSketch<Effect> bfs_layers(EnvPtr env, Memo memo, BfsState st,
                                  std::string target) {
  if (auto it = st.sign.find(target); it != st.sign.end()) {
    return DecisionSketch<Effect>::pure(
        {effect_of_sign(it->second), std::move(memo)});
  }
  if (st.frontier.empty() || st.depth >= env->labels.size()) {
    return DecisionSketch<Effect>::pure({Effect::kSame, std::move(memo)});
  }
  auto shared = std::make_shared<const BfsState>(std::move(st));
  return collect_layer(env, std::move(memo), shared, 0, 0, {})
      .and_then([env, shared, target](MemoVal<Proposals> result) {
        BfsState next;
        next.sign = shared->sign;
        next.depth = shared->depth + 1;
        for (const std::string& c : env->labels) {
          auto it = result.value.find(c);
          if (it == result.value.end()) continue;
          next.sign[c] = it->second;
          if (it->second != 0) next.frontier.push_back(c);
        }
        return bfs_layers(env, std::move(result.memo), std::move(next),
                          target);
      });
}

DecisionSketch<Effect> cause(EnvPtr env, Memo memo, const CauseQuery& q) {
  return organism(env, std::move(memo), q.source)
      .and_then([env, q](MemoVal<bool> src) {
        if (!src.value) {
          return DecisionSketch<Effect>::pure(
              {Effect::kSame, std::move(src.memo)});
        }
        return organism(env, std::move(src.memo), q.target)
            .and_then([env, q](MemoVal<bool> tgt) {
              if (!tgt.value) {
                return DecisionSketch<Effect>::pure(
                    {Effect::kSame, std::move(tgt.memo)});
              }
              BfsState st;
              st.sign[q.source] = q.change == Change::kIncrease ? +1 : -1;
              st.frontier = {q.source};
              return bfs_layers(env, std::move(tgt.memo), std::move(st),
                                q.target);
            });
      });
}

void require_label(const std::vector<std::string>& labels,
                   const std::string& x) {
  if (std::find(labels.begin(), labels.end(), x) == labels.end()) {
    throw DataError("program mentions unknown label '" + x + "'");
  }
}

void validate_labels(const ProgramAst& ast,
                     const std::vector<std::string>& labels) {
  struct Check {
    const std::vector<std::string>& labels;
    void operator()(const EatsQuery& q) const {
      require_label(labels, q.subject);
      require_label(labels, q.object);
    }
    void operator()(const OrganismQuery& q) const {
      require_label(labels, q.label);
    }
    void operator()(const CountQuery& q) const {
      require_label(labels, q.fixed_label());
    }
    void operator()(const TertiaryConsumerQuery& q) const {
      require_label(labels, q.label);
    }
    void operator()(const CauseQuery& q) const {
      require_label(labels, q.source);
      require_label(labels, q.target);
    }
  };
  std::visit(Check{labels}, ast);
}

}  // namespace

DecisionSketch<Answer> compile_program(EnvPtr env, Memo memo,
                                       const ProgramAst& ast) {
  struct Compile {
    EnvPtr env;
    Memo memo;

    DecisionSketch<Answer> operator()(const EatsQuery& q) {
      return eat(env, std::move(memo), q.subject, q.object)
          .and_then([](MemoVal<bool> v) {
            return DecisionSketch<Answer>::pure(
                {Answer::of_bool(v.value), std::move(v.memo)});
          });
    }
    DecisionSketch<Answer> operator()(const OrganismQuery& q) {
      return organism(env, std::move(memo), q.label)
          .and_then([](MemoVal<bool> v) {
            return DecisionSketch<Answer>::pure(
                {Answer::of_bool(v.value), std::move(v.memo)});
          });
    }
    DecisionSketch<Answer> operator()(const CountQuery& q) {
      return count_from(env, std::move(memo), q, 0, 0)
          .and_then([](MemoVal<std::int64_t> v) {
            return DecisionSketch<Answer>::pure(
                {Answer::of_int(v.value), std::move(v.memo)});
          });
    }
    DecisionSketch<Answer> operator()(const TertiaryConsumerQuery& q) {
      return tertiary(env, std::move(memo), q.label)
          .and_then([](MemoVal<bool> v) {
            return DecisionSketch<Answer>::pure(
                {Answer::of_bool(v.value), std::move(v.memo)});
          });
    }
    DecisionSketch<Answer> operator()(const CauseQuery& q) {
      return cause(env, std::move(memo), q).and_then([](MemoVal<Effect> v) {
        return DecisionSketch<Answer>::pure(
            {Answer::of_effect(v.value), std::move(v.memo)});
      });
    }
  };
  return std::visit(Compile{std::move(env), std::move(memo)}, ast);
}

namespace {

Sketch<Answer> build(const ProgramAst& ast, const DetectionGraph& d,
                     DecisionScorer scorer,
                     std::optional<std::map<ChoiceTag, bool>> gold) {
  auto env = std::make_shared<const EvalEnv>(
      EvalEnv{d.labels(), std::move(scorer), std::move(gold)});
  validate_labels(ast, env->labels);
  return compile_program(env, Memo{}, ast).map([](MemoVal<Answer> v) {
    return v.value;
  });
}

}  // namespace

Sketch<Answer> execute_with(const ProgramAst& ast, const DetectionGraph& d,
                            DecisionScorer scorer) {
  return build(ast, d, std::move(scorer), std::nullopt);
}

Sketch<Answer> execute(const ProgramAst& ast, const DetectionGraph& d,
                       const ModelSpec& spec) {
  return execute_with(ast, d, model_scorer(spec, d));
}

Sketch<Answer> conditional_with(const ProgramAst& ast,
                                const DetectionGraph& d,
                                DecisionScorer scorer, const GoldTrace& gold) {
  return build(ast, d, std::move(scorer), gold.as_map());
}

Sketch<Answer> conditional_sketch(const ProgramAst& ast,
                                  const DetectionGraph& d,
                                  const ModelSpec& spec,
                                  const GoldTrace& gold) {
  return conditional_with(ast, d, model_scorer(spec, d), gold);
}

}  // namespace pnp::foodweb
