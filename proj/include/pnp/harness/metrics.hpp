#pragma once

#include <map>
#include <string>
#include <vector>

#include "pnp/foodweb/model.hpp"
#include "pnp/harness/dataset.hpp"
#include "pnp/training.hpp"

namespace pnp::harness {

struct TagKindStats {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const {
    return total ? static_cast<double>(correct) / static_cast<double>(total)
                 : 0.0;
  }
};

struct EvalReport {
  // Teacher forcing: per decision, all earlier decisions pinned to gold.
  // Ties between the two score entries count as incorrect.
  double choose_accuracy = 0.0;
  // Fraction of programs whose best decoded execution matches the gold
  // trace at every site.
  double execution_accuracy = 0.0;
  // Informational: best decoded answer equals the gold answer.
  double answer_accuracy = 0.0;
  // Fraction of programs with every teacher-forced decision correct.
  double all_correct_fraction = 0.0;
  std::map<std::string, TagKindStats> per_kind;
  std::size_t programs = 0;
  std::size_t decisions = 0;
};

// Scorer selection for evaluation: a trained model or the gold-web oracle.
struct EvalModel {
  bool oracle = false;
  foodweb::ModelSpec spec;

  static EvalModel model(foodweb::ModelSpec spec) { return {false, spec}; }
  static EvalModel gold_oracle() { return {true, {}}; }
};

EvalReport evaluate(const std::vector<DatasetExample>& examples,
                    const EvalModel& model, ParamSet& params,
                    std::size_t beam_width);

double choose_accuracy(const std::vector<DatasetExample>& examples,
                       const EvalModel& model, ParamSet& params);

double execution_accuracy(const std::vector<DatasetExample>& examples,
                          const EvalModel& model, ParamSet& params,
                          std::size_t beam_width);

// Unconditional/conditional sketch pairs for every program in the dataset.
std::vector<TrainingExample<foodweb::Answer>> make_training_examples(
    const std::vector<DatasetExample>& examples,
    const foodweb::ModelSpec& spec);

}  // namespace pnp::harness
