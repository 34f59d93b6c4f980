#pragma once

#include <cstdint>
#include <vector>

#include "pnp/foodweb/ast.hpp"
#include "pnp/foodweb/web.hpp"

namespace pnp::harness {

struct NoiseConfig {
  double score_noise_sd = 0.0;
  double arrow_confusion_rate = 0.0;
  bool geometry_signal = false;
  bool operator==(const NoiseConfig&) const = default;
};

struct GenConfig {
  std::size_t num_webs = 120;
  std::size_t organisms_per_web = 6;
  double edge_density = 0.3;    // in (0, 1)
  std::size_t distractor_texts = 2;
  NoiseConfig noise;
  std::size_t programs_per_web = 4;  // cycles eats, count, tertiary, cause
  std::uint64_t seed = 0;
  bool operator==(const GenConfig&) const = default;
};

struct ProgramExample {
  foodweb::ProgramAst ast;
  foodweb::Answer answer;
  foodweb::GoldTrace trace;
  bool operator==(const ProgramExample&) const = default;
};

struct DatasetExample {
  foodweb::FoodWeb web;
  foodweb::DetectionGraph detections;
  std::vector<ProgramExample> programs;
  bool operator==(const DatasetExample&) const = default;
};

// Seeded synthetic stand-in for a vision system reading food-web diagrams:
// gold webs are random DAGs; every text gets a noisy organism score; every
// gold edge emits an arrow (confidence ~0.8, geometry channel 0 carries 1
// when geometry_signal is on); confusion arrows (confidence ~0.6, channel
// 0 = 0) appear between random non-edges. Confidence alone is therefore
// ambiguous under noise while the geometry channel stays clean. Program
// answers and traces come from walking the executor with a gold-web
// oracle, then each example is verified by an independent recomputation
// and a trace replay before it is returned.
std::vector<DatasetExample> generate(const GenConfig& config);

}  // namespace pnp::harness
