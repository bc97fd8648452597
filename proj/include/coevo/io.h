#pragma once

#include "coevo/baselines.h"
#include "coevo/effects.h"
#include "coevo/estimator.h"
#include "coevo/panel_data.h"
#include "coevo/simulator.h"
#include "coevo/synthesize.h"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace coevo::io {

using json = nlohmann::ordered_json;

/// Reads and parses a JSON file; DataError on a missing file or bad syntax.
json read_json(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const json& value);

json to_json(const DataConfig& config);
DataConfig data_config_from_json(const json& j);

/// {"network": ["out_degree", "covariate_similarity(age)"], "behavior": [...]}
json to_json(const EffectSpec& spec);
EffectSpec effect_spec_from_json(const json& j);
NetworkEffect parse_network_effect(const std::string& name);
BehaviorEffect parse_behavior_effect(const std::string& name);

/// Parameter file: {"effects": ..., "rho_network": [...], "rho_behavior": [...],
/// "beta_network": [...], "beta_behavior": [...]}
struct ModelParameters {
    EffectSpec spec;
    ParameterVector params;
};
json to_json(const EffectSpec& spec, const ParameterVector& params);
ModelParameters model_parameters_from_json(const json& j);

json to_json(const EstimationConfig& config);
EstimationConfig estimation_config_from_json(const json& j);

json to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const json& j);

json to_json(const EstimationResult& result, const EffectSpec& spec);
json to_json(const ConvergenceReport& report);
json to_json(const BaselineResult& result);

/// edges.csv (every tie of every wave, src < dst), behavior.csv (raw values)
/// and covariates.csv.
void write_dataset(const PanelDataset& dataset, const std::filesystem::path& directory);

/// simulated_edges.csv (replication,wave,src,dst) and simulated_behavior.csv
/// (replication,wave,actor,level) for waves 2..T of each replication.
void write_simulated_waves(const std::vector<std::vector<SimulatedWave>>& replications,
                           const std::filesystem::path& directory);

/// One line per event: t,actor,domain,choice.
std::string format_trace(const SimulationTrace& trace);

} // namespace coevo::io
