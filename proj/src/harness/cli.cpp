#include "pnp/harness/cli.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnp/errors.hpp"
#include "pnp/foodweb/model.hpp"
#include "pnp/harness/dataset.hpp"
#include "pnp/harness/metrics.hpp"
#include "pnp/harness/serialize.hpp"
#include "pnp/training.hpp"

namespace pnp::harness {

namespace {

constexpr std::size_t kDemoHidden = 8;
constexpr std::size_t kDemoInputDim = 2;

Sketch<NodeRef> demo_mlp(Tensor input) {
  return param("w1").and_then([input](NodeRef w1) {
    return param("b1").and_then([input, w1](NodeRef b1) {
      return param("w2").and_then([input, w1, b1](NodeRef w2) {
        return param("b2").and_then([input, w1, b1, w2](NodeRef b2) {
          return Sketch<NodeRef>::compute([input, w1, b1, w2, b2](Graph& g) {
            NodeRef v = g.constant(input);
            NodeRef h1 = g.tanh(g.add(g.matvec(w1, v), b1));
            return g.add(g.matvec(w2, h1), b2);
          });
        });
      });
    });
  });
}

std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", p);
  return buf;
}

}  // namespace

ParamSet demo_params() {
  ParamSet params;
  params.define("w1", Tensor::zeros({kDemoHidden, kDemoInputDim}));
  params.define("b1", Tensor::zeros({kDemoHidden}));
  params.define("w2", Tensor::zeros({2, kDemoHidden}));
  params.define("b2", Tensor::zeros({2}));
  return params;
}

Sketch<int> demo_sketch() {
  Tensor input = Tensor::vector({0.5, -0.3});
  return demo_mlp(input).and_then([](NodeRef scores) {
    return choose<int>({0, 1}, scores, {"first", {}})
        .and_then([scores](int v) {
          return choose<int>({2, 3}, scores, {"second", {}})
              .map([v](int y) { return v + y; });
        });
  });
}

Distribution<int> demo_distribution(std::size_t beam_width) {
  ParamSet params = demo_params();
  return beam_search(demo_sketch(), beam_width, params);
}

namespace {

struct TrainArgs {
  std::string data_path;
  std::string model = "mlp2";
  std::size_t hidden_dim = 32;
  std::size_t beam_width = 32;
  double learning_rate = 0.1;
  std::size_t epochs = 10;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::string init = "uniform";
  double init_scale = 0.1;
  std::string out_path;
};

struct EvalArgs {
  std::string data_path;
  std::string params_path;
  std::string model = "mlp2";
  std::size_t hidden_dim = 32;
  std::size_t beam_width = 32;
  bool oracle = false;
  std::string report_path;
};

foodweb::ModelSpec spec_from(const std::string& model, std::size_t hidden_dim,
                             const std::string& init, double init_scale,
                             std::uint64_t seed) {
  foodweb::ModelSpec spec;
  spec.kind = foodweb::model_kind_from_string(model);
  spec.hidden_dim = hidden_dim;
  if (init == "zeros") {
    spec.init = foodweb::InitSpec::zeros();
  } else if (init == "uniform") {
    spec.init = foodweb::InitSpec::uniform(init_scale, seed);
  } else {
    throw DataError("unknown init '" + init + "' (want zeros|uniform)");
  }
  return spec;
}

int cmd_gen(const std::string& config_path, const std::string& out_path,
            std::ostream& out) {
  GenConfig config =
      config_path.empty() ? GenConfig{} : load_gen_config(config_path);
  std::vector<DatasetExample> examples = generate(config);
  save_dataset(examples, out_path);
  std::size_t programs = 0;
  for (const auto& e : examples) programs += e.programs.size();
  out << "wrote " << examples.size() << " webs / " << programs
      << " programs to " << out_path << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
  std::vector<DatasetExample> data = load_dataset(args.data_path);
  foodweb::ModelSpec spec = spec_from(args.model, args.hidden_dim, args.init,
                                      args.init_scale, args.seed);
  ParamSet params = foodweb::init_params(spec);
  std::vector<TrainingExample<foodweb::Answer>> examples =
      make_training_examples(data, spec);
  TrainConfig config;
  config.learning_rate = args.learning_rate;
  config.epochs = args.epochs;
  config.beam_width = args.beam_width;
  config.shuffle_seed = args.seed;
  config.l2 = args.l2;
  TrainReport report = train(examples, config, params);
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    const EpochStats& stats = report.epochs[i];
    out << "epoch " << (i + 1) << ": mean LL "
        << format_prob(stats.mean_log_likelihood) << " over "
        << stats.processed << " examples";
    if (stats.skipped) out << " (" << stats.skipped << " skipped)";
    out << "\n";
  }
  save_params(params, args.out_path);
  out << "wrote parameters to " << args.out_path << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  std::vector<DatasetExample> data = load_dataset(args.data_path);
  EvalModel model;
  ParamSet params;
  if (args.oracle) {
    model = EvalModel::gold_oracle();
  } else {
    if (args.params_path.empty()) {
      throw DataError("eval: --params is required unless --oracle is set");
    }
    model = EvalModel::model(spec_from(args.model, args.hidden_dim, "zeros",
                                       0.0, 0));
    params = load_params(args.params_path);
    // Catch model/params mismatches up front with a readable message.
    ParamSet expected = foodweb::init_params(model.spec);
    if (expected.names() != params.names()) {
      throw DataError("params file does not match --model " + args.model);
    }
    for (const std::string& name : expected.names()) {
      if (expected.value(name).shape() != params.value(name).shape()) {
        throw DataError("parameter '" + name + "' has shape " +
                        shape_to_string(params.value(name).shape()) +
                        ", model wants " +
                        shape_to_string(expected.value(name).shape()));
      }
    }
  }
  EvalReport report = evaluate(data, model, params, args.beam_width);
  out << "programs:           " << report.programs << "\n";
  out << "decisions:          " << report.decisions << "\n";
  out << "choose accuracy:    " << format_prob(report.choose_accuracy) << "\n";
  out << "execution accuracy: " << format_prob(report.execution_accuracy)
      << "\n";
  out << "answer accuracy:    " << format_prob(report.answer_accuracy) << "\n";
  for (const auto& [kind, stats] : report.per_kind) {
    out << "  " << kind << ": " << format_prob(stats.accuracy()) << " ("
        << stats.correct << "/" << stats.total << ")\n";
  }
  if (!args.report_path.empty()) {
    save_report(report, args.report_path);
    out << "wrote report to " << args.report_path << "\n";
  }
  return 0;
}

int cmd_demo(std::ostream& out) {
  Distribution<int> dist = demo_distribution();
  out << "executions:\n";
  for (const auto& e : dist.entries()) {
    out << "  " << e.value << " (" << format_prob(e.prob) << ")\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"probabilistic neural programs over food-web diagrams"};
  app.require_subcommand(1);

  std::string gen_config_path;
  std::string gen_out_path;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", gen_config_path,
                  "JSON generator config (defaults apply when omitted)");
  gen->add_option("--out", gen_out_path, "output dataset path")->required();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a model on a dataset");
  train->add_option("--data", train_args.data_path, "dataset path")
      ->required();
  train->add_option("--model", train_args.model, "loglinear|mlp2|maxpool");
  train->add_option("--hidden-dim", train_args.hidden_dim, "hidden width");
  train->add_option("--beam-width", train_args.beam_width, "beam width");
  train->add_option("--lr", train_args.learning_rate, "learning rate");
  train->add_option("--epochs", train_args.epochs, "training epochs");
  train->add_option("--l2", train_args.l2, "L2 penalty");
  train->add_option("--seed", train_args.seed, "init + shuffle seed");
  train->add_option("--init", train_args.init, "zeros|uniform");
  train->add_option("--init-scale", train_args.init_scale, "uniform scale");
  train->add_option("--out", train_args.out_path, "output params path")
      ->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate params on a dataset");
  eval->add_option("--data", eval_args.data_path, "dataset path")->required();
  eval->add_option("--params", eval_args.params_path, "params path");
  eval->add_option("--model", eval_args.model, "loglinear|mlp2|maxpool");
  eval->add_option("--hidden-dim", eval_args.hidden_dim, "hidden width");
  eval->add_option("--beam-width", eval_args.beam_width, "beam width");
  eval->add_flag("--oracle", eval_args.oracle,
                 "score decisions from the gold web instead of params");
  eval->add_option("--report", eval_args.report_path, "report output path");

  CLI::App* demo =
      app.add_subcommand("demo", "run the two-choice perceptron example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_config_path, gen_out_path, out);
    if (train->parsed()) return cmd_train(train_args, out);
    if (eval->parsed()) return cmd_eval(eval_args, out);
    if (demo->parsed()) return cmd_demo(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace pnp::harness
