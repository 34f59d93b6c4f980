#pragma once

#include <cstddef>
#include <ostream>

#include "pnp/inference.hpp"

namespace pnp::harness {

// The worked multilayer-perceptron example: a two-layer net over a fixed
// input scores two sequential binary choices whose outcomes are summed.
// With all parameters zero every execution scores 0, so beam search finds
// four executions with values 2, 3, 3, 4 at probability 1/4 each.
Sketch<int> demo_sketch();
ParamSet demo_params();
Distribution<int> demo_distribution(std::size_t beam_width = 10);

// Subcommands: gen, train, eval, demo.
// Exit codes: 0 success, 1 usage error, 2 data/runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace pnp::harness
