#include "pnp/foodweb/model.hpp"

#include <utility>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/foodweb/features.hpp"

namespace pnp::foodweb {

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "loglinear") return ModelKind::kLoglinear;
  if (name == "mlp2") return ModelKind::kMlp2;
  if (name == "maxpool") return ModelKind::kMaxpool;
  throw DataError("unknown model kind '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLoglinear: return "loglinear";
    case ModelKind::kMlp2: return "mlp2";
    case ModelKind::kMaxpool: return "maxpool";
  }
  return "?";
}

namespace {

std::size_t eat_feature_dim(ModelKind kind) {
  return kind == ModelKind::kMaxpool ? kMaxpoolEatFeatureDim : kEatFeatureDim;
}

Tensor init_tensor(const InitSpec& init, std::vector<std::size_t> shape,
                   std::uint64_t stream) {
  if (init.kind == InitSpec::Kind::kZeros) return Tensor::zeros(shape);
  // One stream per parameter so adding a head never reshuffles another.
  return Tensor::random_uniform(std::move(shape), init.scale,
                                init.seed * 0x1000193ULL + stream);
}

}  // namespace

ParamSet init_params(const ModelSpec& spec) {
  ParamSet params;
  std::uint64_t stream = 1;
  for (const auto& [head, dim] :
       {std::pair<std::string, std::size_t>{"organism", kOrganismFeatureDim},
        std::pair<std::string, std::size_t>{"eat", eat_feature_dim(spec.kind)}}) {
    if (spec.kind == ModelKind::kLoglinear) {
      params.define(head + ".w", init_tensor(spec.init, {2, dim}, stream++));
      continue;
    }
    std::size_t h = spec.hidden_dim;
    params.define(head + ".w1", init_tensor(spec.init, {h, dim}, stream++));
    params.define(head + ".b1", init_tensor(spec.init, {h}, stream++));
    params.define(head + ".w2", init_tensor(spec.init, {2, h}, stream++));
    params.define(head + ".b2", init_tensor(spec.init, {2}, stream++));
  }
  return params;
}

namespace {

NodeRef two_layer_score(Graph& g, const std::string& head, NodeRef phi) {
  NodeRef h1 = g.tanh(g.add(g.matvec(g.parameter(head + ".w1"), phi),
                            g.parameter(head + ".b1")));
  return g.add(g.matvec(g.parameter(head + ".w2"), h1),
               g.parameter(head + ".b2"));
}

const std::string& tag_arg(const ChoiceTag& tag, std::size_t i) {
  if (tag.args.size() <= i) {
    throw DataError("decision tag " + to_string(tag) + " is missing args");
  }
  return tag.args[i];
}

}  // namespace

Sketch<bool> score_decision(const ModelSpec& spec, const DetectionGraph& d,
                            const ChoiceTag& tag) {
  ModelKind kind = spec.kind;
  Sketch<NodeRef> score_node = Sketch<NodeRef>::compute([spec, kind, d,
                                                         tag](Graph& g) {
    NodeRef phi;
    std::string head = tag.kind;
    if (tag.kind == "organism") {
      phi = g.constant(hand_features_organism(d, tag_arg(tag, 0)));
    } else if (tag.kind == "eat" && kind != ModelKind::kMaxpool) {
      phi = g.constant(hand_features_eat(d, tag_arg(tag, 0), tag_arg(tag, 1)));
    } else if (tag.kind == "eat") {
      // Maxpool input layer, built in-graph: pool the per-arrow rows and
      // append the pooled block to the hand features.
      const std::string& x = tag_arg(tag, 0);
      const std::string& y = tag_arg(tag, 1);
      std::vector<NodeRef> rows;
      for (Tensor& row : arrow_rows_eat(d, x, y)) {
        rows.push_back(g.constant(std::move(row)));
      }
      NodeRef pooled = g.maxpool(std::move(rows), 1 + kGeometryDim);
      phi = g.concat({g.constant(hand_features_eat(d, x, y)), pooled});
    } else {
      throw DataError("no model head for decision tag " + to_string(tag));
    }
    if (kind == ModelKind::kLoglinear) {
      return g.matvec(g.parameter(head + ".w"), phi);
    }
    return two_layer_score(g, head, phi);
  });
  return score_node.and_then([tag](NodeRef score) {
    return choose<bool>({true, false}, score, tag);
  });
}

DecisionScorer model_scorer(const ModelSpec& spec, DetectionGraph d) {
  return [spec, d = std::move(d)](const ChoiceTag& tag) {
    return score_decision(spec, d, tag);
  };
}

DecisionScorer oracle_scorer(FoodWeb web) {
  return [web = std::move(web)](const ChoiceTag& tag) {
    bool gold;
    if (tag.kind == "organism") {
      gold = web.has_organism(tag_arg(tag, 0));
    } else if (tag.kind == "eat") {
      gold = web.has_eats(tag_arg(tag, 0), tag_arg(tag, 1));
    } else {
      throw DataError("oracle scorer: unknown decision tag " + to_string(tag));
    }
    std::vector<double> scores =
        gold ? std::vector<double>{+1.0, -1.0} : std::vector<double>{-1.0, +1.0};
    return choose_scores<bool>({true, false}, std::move(scores), tag);
  };
}

}  // namespace pnp::foodweb
