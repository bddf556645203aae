#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "enseq/oracle.hpp"

#include <json.hpp>

namespace enseq::experiment {

struct ExperimentConfig {
  toy::ToyModelSpec model_spec;
  int m_members = 2;
  std::vector<toy::DatasetSpec> dataset_specs;
  int beam_width = 1;
  std::vector<double> temperatures = {1.0};
  std::vector<int> sample_counts;
  std::vector<post::Combination> combinations = {post::Combination::PrEx};
  std::vector<bool> length_norm = {true};
  std::string output_dir = ".";
  std::uint64_t seed = 0;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one "--a.b.c=value" style override onto a config JSON document.
void apply_override(nlohmann::json& j, const std::string& dotted_path,
                    const std::string& value);

post::Ensemble scoring_ensemble(const ExperimentConfig& config, post::Combination combination);

/// Reference ensemble for the error tasks: same task (same base_seed) with
/// member-noise streams disjoint from every scored member.
post::Ensemble reference_ensemble(const ExperimentConfig& config);

// Output files, all under config.output_dir.
std::filesystem::path ensemble_spec_path(const ExperimentConfig& config);
std::filesystem::path dataset_path(const ExperimentConfig& config, std::size_t dataset_index);
std::filesystem::path decode_path(const ExperimentConfig& config, std::size_t dataset_index,
                                  post::Combination combination);
std::filesystem::path scores_path(const ExperimentConfig& config, std::size_t dataset_index);
std::filesystem::path metrics_path(const ExperimentConfig& config, const std::string& task);
std::filesystem::path oracle_path(const ExperimentConfig& config);
std::filesystem::path sweep_path(const ExperimentConfig& config);

void cmd_synth(const ExperimentConfig& config);
void cmd_decode(const ExperimentConfig& config, int jobs);
void cmd_score(const ExperimentConfig& config, int jobs);
void cmd_eval(const ExperimentConfig& config, const std::string& task, int jobs);
void cmd_oracle(const ExperimentConfig& config, int jobs);
void cmd_sweep(const ExperimentConfig& config, int jobs);

/// Index-parallel loop; results must be written into per-index slots so the
/// outcome is identical for any worker count. Worker exceptions are rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

/// Shortest round-trip decimal form, locale-independent.
std::string format_double(double v);

}  // namespace enseq::experiment
