#include "pnp/harness/metrics.hpp"

#include <utility>

#include "pnp/errors.hpp"
#include "pnp/foodweb/executor.hpp"
#include "pnp/inference.hpp"

namespace pnp::harness {

using foodweb::Answer;

namespace {

foodweb::DecisionScorer build_scorer(const EvalModel& model,
                                     const DatasetExample& example) {
  if (model.oracle) return foodweb::oracle_scorer(example.web);
  return foodweb::model_scorer(model.spec, example.detections);
}

struct ProgramOutcome {
  std::size_t sites = 0;
  std::size_t correct_sites = 0;
  bool all_sites_correct = true;
  bool execution_correct = false;
  bool answer_correct = false;
  std::vector<std::pair<std::string, bool>> per_kind_hits;  // (kind, correct)
};

ProgramOutcome score_program(const DatasetExample& example,
                             const ProgramExample& program,
                             const EvalModel& model, ParamSet& params,
                             std::size_t beam_width) {
  ProgramOutcome outcome;
  std::map<ChoiceTag, bool> gold = program.trace.as_map();
  foodweb::DecisionScorer scorer = build_scorer(model, example);

  // Teacher forcing: walk the sketch pinning every decision to gold; at
  // each site compare the argmax of the two score entries against gold,
  // counting exact ties as incorrect.
  {
    Graph g(params);
    Sketch<Answer> sketch =
        foodweb::execute_with(program.ast, example.detections, scorer);
    guided_walk(g, sketch,
                [&](const ChoicePoint<Answer>& cp,
                    const Tensor& scores) -> std::size_t {
                  auto it = gold.find(cp.tag);
                  if (it == gold.end()) {
                    throw DataError("teacher forcing reached site " +
                                    to_string(cp.tag) +
                                    " missing from the gold trace");
                  }
                  std::size_t gold_index = it->second ? 0 : 1;
                  bool tie = scores[0] == scores[1];
                  std::size_t argmax = scores[0] >= scores[1] ? 0 : 1;
                  bool correct = !tie && argmax == gold_index;
                  ++outcome.sites;
                  outcome.correct_sites += correct ? 1 : 0;
                  outcome.all_sites_correct &= correct;
                  outcome.per_kind_hits.emplace_back(cp.tag.kind, correct);
                  return gold_index;
                });
  }

  // Decoding: most probable completed execution must match the gold trace
  // site for site.
  {
    Graph g(params);
    Sketch<Answer> sketch =
        foodweb::execute_with(program.ast, example.detections, scorer);
    Distribution<Answer> dist = beam_search_on(g, sketch, beam_width);
    if (!dist.empty()) {
      const ExecutionEntry<Answer>& best = dist.best();
      const auto& want = program.trace.decisions;
      bool match = best.trace.size() == want.size();
      for (std::size_t i = 0; match && i < want.size(); ++i) {
        match = best.trace[i].tag == want[i].first &&
                (best.trace[i].option_index == 0) == want[i].second;
      }
      outcome.execution_correct = match;
      outcome.answer_correct = best.value == program.answer;
    }
  }
  return outcome;
}

}  // namespace

EvalReport evaluate(const std::vector<DatasetExample>& examples,
                    const EvalModel& model, ParamSet& params,
                    std::size_t beam_width) {
  EvalReport report;
  std::size_t correct_sites = 0;
  std::size_t exec_correct = 0;
  std::size_t answer_correct = 0;
  std::size_t all_correct = 0;
  for (const DatasetExample& example : examples) {
    for (const ProgramExample& program : example.programs) {
      ProgramOutcome o =
          score_program(example, program, model, params, beam_width);
      ++report.programs;
      report.decisions += o.sites;
      correct_sites += o.correct_sites;
      exec_correct += o.execution_correct ? 1 : 0;
      answer_correct += o.answer_correct ? 1 : 0;
      all_correct += o.all_sites_correct ? 1 : 0;
      for (const auto& [kind, hit] : o.per_kind_hits) {
        TagKindStats& stats = report.per_kind[kind];
        ++stats.total;
        stats.correct += hit ? 1 : 0;
      }
    }
  }
  auto frac = [](std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  report.choose_accuracy = frac(correct_sites, report.decisions);
  report.execution_accuracy = frac(exec_correct, report.programs);
  report.answer_accuracy = frac(answer_correct, report.programs);
  report.all_correct_fraction = frac(all_correct, report.programs);
  return report;
}

double choose_accuracy(const std::vector<DatasetExample>& examples,
                       const EvalModel& model, ParamSet& params) {
  return evaluate(examples, model, params, 1).choose_accuracy;
}

double execution_accuracy(const std::vector<DatasetExample>& examples,
                          const EvalModel& model, ParamSet& params,
                          std::size_t beam_width) {
  return evaluate(examples, model, params, beam_width).execution_accuracy;
}

std::vector<TrainingExample<Answer>> make_training_examples(
    const std::vector<DatasetExample>& examples,
    const foodweb::ModelSpec& spec) {
  std::vector<TrainingExample<Answer>> out;
  for (const DatasetExample& example : examples) {
    for (const ProgramExample& program : example.programs) {
      // Copies keep the thunks self-contained; datasets may move later.
      foodweb::ProgramAst ast = program.ast;
      foodweb::DetectionGraph detections = example.detections;
      foodweb::GoldTrace gold = program.trace;
      out.push_back(TrainingExample<Answer>{
          [ast, detections, spec] {
            return foodweb::execute(ast, detections, spec);
          },
          [ast, detections, spec, gold] {
            return foodweb::conditional_sketch(ast, detections, spec, gold);
          }});
    }
  }
  return out;
}

}  // namespace pnp::harness
