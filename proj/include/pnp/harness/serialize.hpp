#pragma once

#include <string>
#include <vector>

#include "pnp/graph.hpp"
#include "pnp/harness/dataset.hpp"
#include "pnp/harness/metrics.hpp"

namespace pnp::harness {

inline constexpr int kSchemaVersion = 1;

// All files are JSON with a mandatory schema_version field and stable
// (sorted) key order; tensor values round-trip bit for bit. Read errors
// surface as DataError with the parser's position diagnostics.

std::string params_to_json(const ParamSet& params);
ParamSet params_from_json(const std::string& text);
void save_params(const ParamSet& params, const std::string& path);
ParamSet load_params(const std::string& path);

std::string dataset_to_json(const std::vector<DatasetExample>& examples);
std::vector<DatasetExample> dataset_from_json(const std::string& text);
void save_dataset(const std::vector<DatasetExample>& examples,
                  const std::string& path);
std::vector<DatasetExample> load_dataset(const std::string& path);

std::string report_to_json(const EvalReport& report);
void save_report(const EvalReport& report, const std::string& path);

GenConfig gen_config_from_json(const std::string& text);
GenConfig load_gen_config(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace pnp::harness
