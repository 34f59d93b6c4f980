#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/foodweb/executor.hpp"
#include "pnp/foodweb/features.hpp"
#include "pnp/foodweb/model.hpp"
#include "pnp/foodweb/web.hpp"
#include "pnp/inference.hpp"
#include "pnp/random.hpp"

using namespace pnp;
using namespace pnp::foodweb;

namespace {

DetectionGraph flat_detections(const std::vector<std::string>& labels) {
  DetectionGraph d;
  double x = 0.0;
  for (const std::string& label : labels) {
    d.texts.push_back({label, x, 0.0, 0.5});
    x += 0.1;
  }
  return d;
}

DecisionScorer uniform_scorer() {
  return [](const ChoiceTag& tag) {
    return choose_scores<bool>({true, false}, {0.0, 0.0}, tag);
  };
}

FoodWeb chain_web() {
  FoodWeb web;
  web.organisms = {"snakes", "mice", "grass"};
  web.eats = {{"snakes", "mice"}, {"mice", "grass"}};
  return web;
}

}  // namespace

TEST_CASE("program s-expressions round-trip") {
  std::vector<std::string> texts{
      "(eats deer grass)",
      "(organism title)",
      "(count (lambda x (eats x grass)))",
      "(count (lambda v (eats hawk v)))",
      "(tertiary-consumer rabbits)",
      "(cause (decrease mice) snakes)",
      "(cause (increase grass) deer)",
  };
  for (const std::string& text : texts) {
    ProgramAst ast = parse_program(text);
    CHECK(print_program(ast) == text);
    CHECK(parse_program(print_program(ast)) == ast);
  }
}

TEST_CASE("program parse errors") {
  CHECK_THROWS_AS(parse_program("(eats deer)"), DataError);
  CHECK_THROWS_AS(parse_program("(eats deer grass) junk"), DataError);
  CHECK_THROWS_AS(parse_program("(munch deer grass)"), DataError);
  CHECK_THROWS_AS(parse_program("(count (lambda x (organism x)))"), DataError);
  CHECK_THROWS_AS(parse_program("(count (lambda x (eats a b)))"), DataError);
  CHECK_THROWS_AS(parse_program("(count (lambda x (eats x x)))"), DataError);
  CHECK_THROWS_AS(parse_program("(cause (shrink mice) snakes)"), DataError);
  CHECK_THROWS_AS(parse_program("(eats Deer grass)"), DataError);
  CHECK_THROWS_AS(parse_program(""), DataError);
}

TEST_CASE("hand features") {
  DetectionGraph d;
  d.texts.push_back({"a", 0.0, 0.0, 0.8});
  d.texts.push_back({"b", 1.0, 1.0, 0.3});

  Tensor org = hand_features_organism(d, "a");
  REQUIRE(org.size() == kOrganismFeatureDim);
  CHECK(org[0] == 0.8);
  CHECK(org[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(org[2] == 1.0);

  Tensor no_arrows = hand_features_eat(d, "a", "b");
  REQUIRE(no_arrows.size() == kEatFeatureDim);
  CHECK(no_arrows[0] == -1.0);  // sentinel: no arrow a -> b
  CHECK(no_arrows[1] == 0.0);
  CHECK(no_arrows[2] == doctest::Approx(std::sqrt(2.0)));
  CHECK(no_arrows[3] == 0.8);
  CHECK(no_arrows[4] == 0.3);
  CHECK(no_arrows[5] == 1.0);

  d.arrows.push_back({"b", "a", 0.7, {1, 0, 0, 0}});
  d.arrows.push_back({"b", "a", 0.5, {0, 1, 0, 0}});
  Tensor with_arrows = hand_features_eat(d, "a", "b");
  CHECK(with_arrows[0] == 0.7);
  CHECK(with_arrows[1] == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(hand_features_organism(d, "zebra"), DataError);
}

TEST_CASE("maxpool features") {
  DetectionGraph d;
  d.texts.push_back({"a", 0.0, 0.0, 0.9});
  d.texts.push_back({"b", 0.5, 0.0, 0.9});

  Tensor empty_pool = maxpool_features_eat(d, "a", "b");
  REQUIRE(empty_pool.size() == kMaxpoolEatFeatureDim);
  for (std::size_t i = kEatFeatureDim; i < empty_pool.size(); ++i) {
    CHECK(empty_pool[i] == -1.0);
  }

  d.arrows.push_back({"b", "a", 0.7, {1, 0, 0.2, 0}});
  Tensor one = maxpool_features_eat(d, "a", "b");
  CHECK(one[kEatFeatureDim + 0] == 0.7);
  CHECK(one[kEatFeatureDim + 1] == 1.0);
  CHECK(one[kEatFeatureDim + 3] == 0.2);

  d.arrows.push_back({"b", "a", 0.4, {0, 1, 0, 0}});
  Tensor two = maxpool_features_eat(d, "a", "b");
  CHECK(two[kEatFeatureDim + 0] == 0.7);   // max confidence
  CHECK(two[kEatFeatureDim + 1] == 1.0);   // elementwise max of geometry
  CHECK(two[kEatFeatureDim + 2] == 1.0);
}

TEST_CASE("zero-initialized models score every decision uniformly") {
  DetectionGraph d = flat_detections({"a", "b"});
  for (ModelKind kind :
       {ModelKind::kLoglinear, ModelKind::kMlp2, ModelKind::kMaxpool}) {
    ModelSpec spec{kind, 4, InitSpec::zeros()};
    ParamSet params = init_params(spec);
    for (ChoiceTag tag : {ChoiceTag{"organism", {"a"}},
                          ChoiceTag{"eat", {"a", "b"}}}) {
      Distribution<bool> dist =
          enumerate(score_decision(spec, d, tag), params);
      REQUIRE(dist.size() == 2);
      CHECK(dist.entries()[0].prob == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("loglinear is monotone in a positively weighted feature") {
  ModelSpec spec{ModelKind::kLoglinear, 4, InitSpec::zeros()};
  ParamSet params = init_params(spec);
  params.mutable_value("organism.w") =
      Tensor::from_values({2, 3}, {1, 0, 0, 0, 0, 0});
  auto p_true = [&](double score) {
    DetectionGraph d;
    d.texts.push_back({"a", 0.0, 0.0, score});
    Distribution<bool> dist =
        enumerate(score_decision(spec, d, {"organism", {"a"}}), params);
    for (const auto& e : dist.entries()) {
      if (e.value) return e.prob;
    }
    return 0.0;
  };
  CHECK(p_true(0.2) > 0.5);
  CHECK(p_true(0.9) > p_true(0.5));
  CHECK(p_true(0.5) > p_true(0.2));
}

TEST_CASE("mlp2 with zero weights matches the loglinear-uniform output") {
  DetectionGraph d = flat_detections({"a", "b"});
  ModelSpec mlp{ModelKind::kMlp2, 8, InitSpec::zeros()};
  ModelSpec lin{ModelKind::kLoglinear, 8, InitSpec::zeros()};
  ParamSet mlp_params = init_params(mlp);
  ParamSet lin_params = init_params(lin);
  Distribution<bool> a =
      enumerate(score_decision(mlp, d, {"eat", {"a", "b"}}), mlp_params);
  Distribution<bool> b =
      enumerate(score_decision(lin, d, {"eat", {"a", "b"}}), lin_params);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.entries()[i].value == b.entries()[i].value);
    CHECK(a.entries()[i].prob == doctest::Approx(b.entries()[i].prob));
  }
}

TEST_CASE("decisions memoize within an execution") {
  DetectionGraph d = flat_detections({"a", "b"});
  auto env = std::make_shared<const EvalEnv>(
      EvalEnv{d.labels(), uniform_scorer(), std::nullopt});

  // The same site queried twice: one choice, one trace record, consistent
  // values.
  auto twice =
      eat(env, Memo{}, "a", "b").and_then([env](MemoVal<bool> first) {
        return eat(env, first.memo, "a", "b")
            .and_then([first](MemoVal<bool> second) {
              return Sketch<std::pair<bool, bool>>::pure(
                  {first.value, second.value});
            });
      });
  ParamSet params;
  Distribution<std::pair<bool, bool>> dist = enumerate(twice, params);
  REQUIRE(dist.size() == 2);  // two executions, not four
  std::set<bool> seen;
  for (const auto& e : dist.entries()) {
    CHECK(e.trace.size() == 1);
    CHECK(e.value.first == e.value.second);
    CHECK(e.prob == doctest::Approx(0.5));
    seen.insert(e.value.first);
  }
  CHECK(seen.size() == 2);  // distinct executions memoize different outcomes
}

TEST_CASE("no tag repeats in any trace of any family") {
  std::vector<std::string> labels{"p", "q", "r", "s"};
  DetectionGraph d = flat_detections(labels);
  ParamSet params;
  for (const char* text :
       {"(eats p q)", "(organism s)", "(count (lambda v (eats v q)))",
        "(tertiary-consumer p)", "(cause (decrease q) p)"}) {
    Sketch<Answer> sk =
        execute_with(parse_program(text), d, uniform_scorer());
    Distribution<Answer> dist = enumerate(sk, params, 2'000'000);
    for (const auto& e : dist.entries()) {
      std::set<std::string> tags;
      for (const ChoiceRecord& rec : e.trace) {
        CHECK(tags.insert(to_string(rec.tag)).second);
      }
    }
  }
}

TEST_CASE("count over n candidates issues at most 2n decisions") {
  std::vector<std::string> labels{"a", "b", "c", "d", "e"};
  DetectionGraph d = flat_detections(labels);
  ParamSet params;
  Sketch<Answer> sk = execute_with(
      parse_program("(count (lambda v (eats v a)))"), d, uniform_scorer());
  Distribution<Answer> dist = enumerate(sk, params);
  std::size_t n = labels.size() - 1;  // candidates exclude the object
  for (const auto& e : dist.entries()) {
    CHECK(e.trace.size() <= 2 * n);
    CHECK(e.trace.size() >= n);  // at least the organism query per candidate
  }
}

TEST_CASE("execute answers eats directly from the eat decision") {
  DetectionGraph d = flat_detections({"deer", "grass"});
  ParamSet params;
  Sketch<Answer> sk =
      execute_with(parse_program("(eats deer grass)"), d, uniform_scorer());
  Distribution<Answer> dist = enumerate(sk, params);
  REQUIRE(dist.size() == 2);
  for (const auto& e : dist.entries()) {
    REQUIRE(e.trace.size() == 1);
    CHECK(to_string(e.trace[0].tag) == "eat(deer,grass)");
    CHECK(e.value == Answer::of_bool(e.trace[0].option_index == 0));
  }
}

TEST_CASE("execute matches the decided-relation oracle on forced webs") {
  // Deciding every site from an explicit web must reproduce the pure
  // semantics, family by family.
  FoodWeb web;
  web.organisms = {"grass", "mice", "deer", "hawks"};
  web.eats = {{"mice", "grass"}, {"deer", "grass"}, {"hawks", "mice"}};
  std::vector<std::string> labels{"grass", "mice", "deer", "hawks", "title"};
  DetectionGraph d = flat_detections(labels);
  ParamSet params;
  for (const char* text :
       {"(count (lambda x (eats x grass)))", "(eats deer grass)",
        "(eats grass deer)", "(organism title)", "(tertiary-consumer hawks)",
        "(cause (decrease mice) hawks)", "(cause (decrease mice) grass)"}) {
    ProgramAst ast = parse_program(text);
    Sketch<Answer> sk = execute_with(ast, d, oracle_scorer(web));
    Graph g(params);
    Distribution<Answer> dist = beam_search_on(g, sk, 1);  // greedy = gold
    REQUIRE(!dist.empty());
    CHECK(dist.best().value == answer_on_web(ast, labels, web));
  }
  // Spot-check two of them by hand.
  CHECK(answer_on_web(parse_program("(count (lambda x (eats x grass)))"),
                      labels, web) == Answer::of_int(2));
  CHECK(answer_on_web(parse_program("(cause (decrease mice) hawks)"), labels,
                      web) == Answer::of_effect(Effect::kDecrease));
}

TEST_CASE("propagate_effect hand cases") {
  FoodWeb web = chain_web();
  CHECK(propagate_effect(web, Change::kDecrease, "mice", "snakes") ==
        Effect::kDecrease);
  CHECK(propagate_effect(web, Change::kDecrease, "mice", "grass") ==
        Effect::kIncrease);
  CHECK(propagate_effect(web, Change::kIncrease, "mice", "snakes") ==
        Effect::kIncrease);
  CHECK(propagate_effect(web, Change::kIncrease, "snakes", "grass") ==
        Effect::kIncrease);  // two hops: mice down, grass up

  FoodWeb island = chain_web();
  island.organisms.insert("moss");
  CHECK(propagate_effect(island, Change::kDecrease, "mice", "moss") ==
        Effect::kSame);

  CHECK_THROWS_AS(propagate_effect(web, Change::kDecrease, "mice", "zebra"),
                  DataError);
}

TEST_CASE("equal-depth sign conflicts resolve to same") {
  FoodWeb web;
  web.organisms = {"s", "a", "b", "t"};
  web.eats = {{"a", "s"}, {"s", "b"}, {"t", "a"}, {"t", "b"}};
  CHECK(propagate_effect(web, Change::kDecrease, "s", "a") ==
        Effect::kDecrease);
  CHECK(propagate_effect(web, Change::kDecrease, "s", "b") ==
        Effect::kIncrease);
  CHECK(propagate_effect(web, Change::kDecrease, "s", "t") == Effect::kSame);
}

TEST_CASE("flipping the source change flips every non-same effect") {
  SplitMix64 rng(4242);
  std::vector<std::string> names{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 40; ++trial) {
    FoodWeb web;
    web.organisms.insert(names.begin(), names.end());
    for (std::size_t hi = 1; hi < names.size(); ++hi) {
      for (std::size_t lo = 0; lo < hi; ++lo) {
        if (rng.bernoulli(0.4)) web.eats.insert({names[hi], names[lo]});
      }
    }
    const std::string& s = names[rng.index(names.size())];
    const std::string& t = names[rng.index(names.size())];
    Effect up = propagate_effect(web, Change::kIncrease, s, t);
    Effect down = propagate_effect(web, Change::kDecrease, s, t);
    if (up == Effect::kSame) {
      CHECK(down == Effect::kSame);
    } else {
      CHECK(down != up);
      CHECK(down != Effect::kSame);
    }
  }
}

TEST_CASE("tertiary consumer requires a chain of exactly three decided edges") {
  std::vector<std::string> labels{"w", "x", "y", "z"};
  FoodWeb web;
  web.organisms = {"w", "x", "y", "z"};
  web.eats = {{"w", "x"}, {"x", "y"}, {"y", "z"}};
  CHECK(answer_on_web(parse_program("(tertiary-consumer w)"), labels, web) ==
        Answer::of_bool(true));
  CHECK(answer_on_web(parse_program("(tertiary-consumer x)"), labels, web) ==
        Answer::of_bool(false));
  // The endpoint must be a producer: give z prey and the chain fails.
  FoodWeb deeper = web;
  deeper.organisms.insert("v");
  deeper.eats.insert({"z", "v"});
  std::vector<std::string> more{"w", "x", "y", "z", "v"};
  CHECK(answer_on_web(parse_program("(tertiary-consumer w)"), more, deeper) ==
        Answer::of_bool(false));
  CHECK(answer_on_web(parse_program("(tertiary-consumer x)"), more, deeper) ==
        Answer::of_bool(true));
}

TEST_CASE("every execution's answer is determined by its queried decisions") {
  // For each execution of each family on a small instance, every
  // completion of the unqueried sites gives the same pure-semantics answer
  // as the executor: short-circuiting never skips a decision that matters.
  std::vector<std::string> labels{"a", "b", "c"};
  DetectionGraph d = flat_detections(labels);
  ParamSet params;
  std::vector<std::pair<ChoiceTag, int>> sites;  // site -> bit position
  int bit = 0;
  for (const std::string& x : labels) {
    sites.push_back({ChoiceTag{"organism", {x}}, bit++});
  }
  for (const std::string& x : labels) {
    for (const std::string& y : labels) {
      if (x != y) sites.push_back({ChoiceTag{"eat", {x, y}}, bit++});
    }
  }

  for (const char* text :
       {"(eats a b)", "(organism c)", "(count (lambda v (eats v b)))",
        "(tertiary-consumer a)", "(cause (decrease b) a)",
        "(cause (increase a) c)"}) {
    ProgramAst ast = parse_program(text);
    Sketch<Answer> sk = execute_with(ast, d, uniform_scorer());
    Distribution<Answer> dist = enumerate(sk, params, 100'000);
    for (const auto& e : dist.entries()) {
      std::map<ChoiceTag, bool> decided;
      for (const ChoiceRecord& rec : e.trace) {
        decided[rec.tag] = rec.option_index == 0;
      }
      std::vector<std::pair<ChoiceTag, int>> free_sites;
      for (const auto& site : sites) {
        if (!decided.count(site.first)) free_sites.push_back(site);
      }
      REQUIRE(free_sites.size() <= 12);
      for (std::uint64_t mask = 0; mask < (1ull << free_sites.size());
           ++mask) {
        std::map<ChoiceTag, bool> full = decided;
        for (std::size_t i = 0; i < free_sites.size(); ++i) {
          full[free_sites[i].first] = (mask >> i) & 1;
        }
        DecidedRelation relation{
            [&full](const std::string& x) {
              return full.at(ChoiceTag{"organism", {x}});
            },
            [&full](const std::string& x, const std::string& y) {
              return full.at(ChoiceTag{"eat", {x, y}});
            }};
        CHECK(answer_on_relation(ast, labels, relation) == e.value);
      }
    }
  }
}

TEST_CASE("conditional sketch pins every decision") {
  FoodWeb web = chain_web();
  std::vector<std::string> labels{"snakes", "mice", "grass", "title"};
  DetectionGraph d = flat_detections(labels);
  ProgramAst ast = parse_program("(count (lambda v (eats v grass)))");

  // Record the gold trace by walking with the gold resolver.
  ParamSet no_params;
  Graph g(no_params);
  GoldTrace gold;
  Sketch<Answer> oracle_sketch = execute_with(ast, d, oracle_scorer(web));
  ExecutionEntry<Answer> walked = guided_walk(
      g, oracle_sketch,
      [&](const ChoicePoint<Answer>& cp, const Tensor&) -> std::size_t {
        bool v = cp.tag.kind == "organism"
                     ? web.has_organism(cp.tag.args[0])
                     : web.has_eats(cp.tag.args[0], cp.tag.args[1]);
        gold.decisions.emplace_back(cp.tag, v);
        return v ? 0 : 1;
      });
  CHECK(walked.value == Answer::of_int(1));  // only mice eat grass

  ModelSpec spec{ModelKind::kMlp2, 4, InitSpec::zeros()};
  ParamSet params = init_params(spec);
  Sketch<Answer> cond = conditional_sketch(ast, d, spec, gold);
  Distribution<Answer> dist = enumerate(cond, params);
  REQUIRE(dist.size() == 1);  // gold pins everything
  CHECK(dist.entries()[0].value == walked.value);
  REQUIRE(dist.entries()[0].trace.size() == gold.decisions.size());
  for (std::size_t i = 0; i < gold.decisions.size(); ++i) {
    CHECK(dist.entries()[0].trace[i].tag == gold.decisions[i].first);
    CHECK((dist.entries()[0].trace[i].option_index == 0) ==
          gold.decisions[i].second);
  }

  // Unconditional probability mass over N uniform executions is 1/N, and
  // the conditional loglikelihood is -log N.
  Sketch<Answer> uncond = execute(ast, d, spec);
  Distribution<Answer> full = enumerate(uncond, params);
  for (const auto& e : full.entries()) {
    CHECK(e.prob ==
          doctest::Approx(1.0 / static_cast<double>(full.size())));
  }
  CHECK(dist.log_partition() - full.log_partition() ==
        doctest::Approx(-std::log(static_cast<double>(full.size()))));
}

TEST_CASE("zero-init loglikelihood is k log(1/2) on fixed-depth programs") {
  // eats is a one-decision program; a chain of three distinct eat sites
  // has a complete depth-3 tree.
  DetectionGraph d = flat_detections({"a", "b", "c", "x"});
  ModelSpec spec{ModelKind::kLoglinear, 4, InitSpec::zeros()};
  ParamSet params = init_params(spec);

  ProgramAst eats_ast = parse_program("(eats a b)");
  Sketch<Answer> one = execute(eats_ast, d, spec);
  Distribution<Answer> one_dist = enumerate(one, params);
  REQUIRE(one_dist.size() == 2);
  for (const auto& e : one_dist.entries()) {
    CHECK(e.prob == doctest::Approx(0.5).epsilon(1e-12));  // 2^-1 exactly
  }

  auto env = std::make_shared<const EvalEnv>(
      EvalEnv{d.labels(), model_scorer(spec, d), std::nullopt});
  auto three = eat(env, Memo{}, "a", "b").and_then([env](MemoVal<bool> r1) {
    return eat(env, r1.memo, "b", "c").and_then([env](MemoVal<bool> r2) {
      return eat(env, r2.memo, "c", "x").and_then([](MemoVal<bool> r3) {
        return Sketch<int>::pure(static_cast<int>(r3.value));
      });
    });
  });
  Distribution<int> deep = enumerate(three, params);
  REQUIRE(deep.size() == 8);
  for (const auto& e : deep.entries()) {
    CHECK(e.prob == doctest::Approx(0.125).epsilon(1e-12));  // 2^-3 exactly
  }
}

TEST_CASE("conditional execution errors on a missing gold site") {
  DetectionGraph d = flat_detections({"a", "b"});
  ModelSpec spec{ModelKind::kLoglinear, 4, InitSpec::zeros()};
  ParamSet params = init_params(spec);
  GoldTrace empty_gold;
  Sketch<Answer> cond =
      conditional_sketch(parse_program("(eats a b)"), d, spec, empty_gold);
  CHECK_THROWS_AS(enumerate(cond, params), DataError);
}

TEST_CASE("unknown labels are rejected up front") {
  DetectionGraph d = flat_detections({"a", "b"});
  CHECK_THROWS_AS(
      execute_with(parse_program("(eats a zebra)"), d, uniform_scorer()),
      DataError);
  CHECK_THROWS_AS(
      execute_with(parse_program("(cause (decrease zebra) a)"), d,
                   uniform_scorer()),
      DataError);
}

TEST_CASE("in-graph maxpool features equal the tensor-level op") {
  DetectionGraph d = flat_detections({"a", "b"});
  d.arrows.push_back({"b", "a", 0.6, {1, 0, 0.5, 0}});
  d.arrows.push_back({"b", "a", 0.9, {0, 0.3, 0, 0}});
  ModelSpec spec{ModelKind::kMaxpool, 4, InitSpec::zeros()};
  ParamSet params = init_params(spec);
  params.mutable_value("eat.w1") =
      Tensor::from_values({4, kMaxpoolEatFeatureDim},
                          std::vector<double>(4 * kMaxpoolEatFeatureDim, 0.0));
  // Identity-ish first layer read-out is overkill; instead check the
  // concat node's forward value against maxpool_features_eat directly.
  Graph g(params);
  Sketch<bool> sk = score_decision(spec, d, {"eat", {"a", "b"}});
  Step<bool> step = sk.advance(g);
  auto& cp = std::get<ChoicePoint<bool>>(step);
  g.forward(cp.score);
  Tensor expected = maxpool_features_eat(d, "a", "b");
  bool found = false;
  for (std::size_t id = 0; id < g.node_count(); ++id) {
    const Node& node = g.node(NodeRef{static_cast<std::uint32_t>(id)});
    if (node.kind == OpKind::kConcat && node.value &&
        *node.value == expected) {
      found = true;
    }
  }
  CHECK(found);
}
