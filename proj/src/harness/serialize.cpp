#include "pnp/harness/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pnp/errors.hpp"

namespace pnp::harness {

using json = nlohmann::json;
using foodweb::Answer;
using foodweb::Effect;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

void check_schema(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw DataError(std::string(what) + ": missing schema_version");
  }
  int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw DataError(std::string(what) + ": unsupported schema version " +
                    std::to_string(version) + " (expected " +
                    std::to_string(kSchemaVersion) + ")");
  }
}

json answer_to_json(const Answer& answer) {
  if (const bool* b = std::get_if<bool>(&answer.value)) {
    return json{{"kind", "bool"}, {"value", *b}};
  }
  if (const std::int64_t* n = std::get_if<std::int64_t>(&answer.value)) {
    return json{{"kind", "int"}, {"value", *n}};
  }
  return json{{"kind", "effect"},
              {"value", to_string(std::get<Effect>(answer.value))}};
}

Answer answer_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bool") return Answer::of_bool(j.at("value").get<bool>());
  if (kind == "int") return Answer::of_int(j.at("value").get<std::int64_t>());
  if (kind == "effect") {
    const std::string v = j.at("value").get<std::string>();
    if (v == "increase") return Answer::of_effect(Effect::kIncrease);
    if (v == "decrease") return Answer::of_effect(Effect::kDecrease);
    if (v == "same") return Answer::of_effect(Effect::kSame);
    throw DataError("answer: unknown effect '" + v + "'");
  }
  throw DataError("answer: unknown kind '" + kind + "'");
}

// Trace rows are flat [kind, args..., gold] tuples.
json trace_to_json(const foodweb::GoldTrace& trace) {
  json rows = json::array();
  for (const auto& [tag, gold] : trace.decisions) {
    json row = json::array();
    row.push_back(tag.kind);
    for (const std::string& arg : tag.args) row.push_back(arg);
    row.push_back(gold);
    rows.push_back(std::move(row));
  }
  return rows;
}

foodweb::GoldTrace trace_from_json(const json& rows) {
  foodweb::GoldTrace trace;
  for (const json& row : rows) {
    if (!row.is_array() || row.size() < 2) {
      throw DataError("trace row must be [kind, args..., gold]");
    }
    ChoiceTag tag;
    tag.kind = row.at(0).get<std::string>();
    for (std::size_t i = 1; i + 1 < row.size(); ++i) {
      tag.args.push_back(row.at(i).get<std::string>());
    }
    trace.decisions.emplace_back(std::move(tag), row.back().get<bool>());
  }
  return trace;
}

}  // namespace

std::string params_to_json(const ParamSet& params) {
  json entries = json::object();
  for (const std::string& name : params.names()) {
    const Tensor& t = params.value(name);
    entries[name] = json{{"shape", t.shape()},
                         {"values", std::vector<double>(t.values().begin(),
                                                        t.values().end())}};
  }
  json j{{"schema_version", kSchemaVersion}, {"params", std::move(entries)}};
  return j.dump(2) + "\n";
}

ParamSet params_from_json(const std::string& text) {
  json j = parse_json(text, "params file");
  check_schema(j, "params file");
  ParamSet params;
  for (const auto& [name, entry] : j.at("params").items()) {
    auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    auto values = entry.at("values").get<std::vector<double>>();
    params.define(name, Tensor::from_values(std::move(shape),
                                            std::move(values)));
  }
  return params;
}

std::string dataset_to_json(const std::vector<DatasetExample>& examples) {
  json out_examples = json::array();
  for (const DatasetExample& example : examples) {
    json web{{"organisms", example.web.organisms},
             {"eats", example.web.eats}};
    json texts = json::array();
    for (const auto& t : example.detections.texts) {
      texts.push_back(json{{"label", t.label},
                           {"x", t.x},
                           {"y", t.y},
                           {"organism_score", t.organism_score}});
    }
    json arrows = json::array();
    for (const auto& a : example.detections.arrows) {
      arrows.push_back(json{{"head", a.head_label},
                            {"tail", a.tail_label},
                            {"confidence", a.confidence},
                            {"geometry", a.geometry}});
    }
    json programs = json::array();
    for (const ProgramExample& p : example.programs) {
      programs.push_back(json{{"program", foodweb::print_program(p.ast)},
                              {"answer", answer_to_json(p.answer)},
                              {"trace", trace_to_json(p.trace)}});
    }
    out_examples.push_back(
        json{{"web", std::move(web)},
             {"detections",
              json{{"texts", std::move(texts)}, {"arrows", std::move(arrows)}}},
             {"programs", std::move(programs)}});
  }
  json j{{"schema_version", kSchemaVersion},
         {"examples", std::move(out_examples)}};
  return j.dump(2) + "\n";
}

std::vector<DatasetExample> dataset_from_json(const std::string& text) {
  json j = parse_json(text, "dataset file");
  check_schema(j, "dataset file");
  std::vector<DatasetExample> out;
  for (const json& je : j.at("examples")) {
    DatasetExample example;
    for (const json& o : je.at("web").at("organisms")) {
      example.web.organisms.insert(o.get<std::string>());
    }
    for (const json& e : je.at("web").at("eats")) {
      example.web.eats.insert(
          {e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    }
    for (const json& t : je.at("detections").at("texts")) {
      example.detections.texts.push_back(
          {t.at("label").get<std::string>(), t.at("x").get<double>(),
           t.at("y").get<double>(), t.at("organism_score").get<double>()});
    }
    for (const json& a : je.at("detections").at("arrows")) {
      example.detections.arrows.push_back(
          {a.at("head").get<std::string>(), a.at("tail").get<std::string>(),
           a.at("confidence").get<double>(),
           a.at("geometry").get<std::vector<double>>()});
    }
    for (const json& p : je.at("programs")) {
      example.programs.push_back(
          {foodweb::parse_program(p.at("program").get<std::string>()),
           answer_from_json(p.at("answer")),
           trace_from_json(p.at("trace"))});
    }
    out.push_back(std::move(example));
  }
  return out;
}

std::string report_to_json(const EvalReport& report) {
  json per_kind = json::object();
  for (const auto& [kind, stats] : report.per_kind) {
    per_kind[kind] = json{{"correct", stats.correct},
                          {"total", stats.total},
                          {"accuracy", stats.accuracy()}};
  }
  json j{{"schema_version", kSchemaVersion},
         {"choose_accuracy", report.choose_accuracy},
         {"execution_accuracy", report.execution_accuracy},
         {"answer_accuracy", report.answer_accuracy},
         {"all_correct_fraction", report.all_correct_fraction},
         {"per_kind", std::move(per_kind)},
         {"counts",
          json{{"programs", report.programs},
               {"decisions", report.decisions}}}};
  return j.dump(2) + "\n";
}

GenConfig gen_config_from_json(const std::string& text) {
  json j = parse_json(text, "gen config");
  GenConfig config;
  config.num_webs = j.value("num_webs", config.num_webs);
  config.organisms_per_web =
      j.value("organisms_per_web", config.organisms_per_web);
  config.edge_density = j.value("edge_density", config.edge_density);
  config.distractor_texts =
      j.value("distractor_texts", config.distractor_texts);
  config.programs_per_web =
      j.value("programs_per_web", config.programs_per_web);
  config.seed = j.value("seed", config.seed);
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    config.noise.score_noise_sd =
        n.value("score_noise_sd", config.noise.score_noise_sd);
    config.noise.arrow_confusion_rate =
        n.value("arrow_confusion_rate", config.noise.arrow_confusion_rate);
    config.noise.geometry_signal =
        n.value("geometry_signal", config.noise.geometry_signal);
  }
  return config;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw DataError("short write to '" + path + "'");
}

void save_params(const ParamSet& params, const std::string& path) {
  write_file(path, params_to_json(params));
}

ParamSet load_params(const std::string& path) {
  return params_from_json(read_file(path));
}

void save_dataset(const std::vector<DatasetExample>& examples,
                  const std::string& path) {
  write_file(path, dataset_to_json(examples));
}

std::vector<DatasetExample> load_dataset(const std::string& path) {
  return dataset_from_json(read_file(path));
}

void save_report(const EvalReport& report, const std::string& path) {
  write_file(path, report_to_json(report));
}

GenConfig load_gen_config(const std::string& path) {
  return gen_config_from_json(read_file(path));
}

}  // namespace pnp::harness
