#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "opsteer/baselines.hpp"
#include "opsteer/online.hpp"

namespace opsteer {

enum class ControllerKind { KnownAnalytic, AdaptiveOnline, GradientBaseline, BudgetOptimal };

std::string_view to_string(ControllerKind k);

struct ScenarioConfig {
  enum class Source { Random, Inline, File };
  Source source = Source::Random;
  RandomNetworkSpec random;
  // Inline / File
  Mat adjacency;
  Vec lambda;
  Vec h;
  double h_min = 0.0;
  double h_max = 0.0;
  std::string path;
};

struct InitialStateConfig {
  bool random = true;
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 1.0;
  Vec values;
};

struct AnalyticConfig {
  double a_cap = 0.999;
  double a = 0.5;  // used when neither epsilon nor budget is given
  double b = 0.9;
};

struct EstimateConfig {
  std::optional<double> alpha;
  int max_steps = 50;
};

struct ExperimentConfig {
  int version = 1;
  std::string name;
  ScenarioConfig scenario;
  double target = 1.0;
  InitialStateConfig x0;
  ControllerKind controller = ControllerKind::KnownAnalytic;
  int horizon = 100;
  std::optional<double> budget;
  std::optional<double> epsilon;
  AnalyticConfig analytic;
  OnlineConfig online;
  EstimateConfig estimate;
  GradientControllerConfig gradient;
  BudgetOptimalConfig budget_optimal;
};

inline constexpr int kConfigVersion = 1;

/// Throws ConfigInvalid naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical document: every field present, keys sorted.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical document, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Applies a --seed override to every random source in the config.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

Network build_scenario(const ScenarioConfig& scenario);
Vec build_initial_state(const InitialStateConfig& x0, int n);

struct ExperimentRecord {
  std::string run_id;
  std::string config_hash;
  std::string controller;
  std::string status;
  double final_err_inf = 0.0;
  double cumulative_cost = 0.0;
  int steps = 0;
  std::string trajectory_path;
  std::string cycles_path;
  std::string estimator_path;
  std::string error;  // empty on success
};

/// Runs one experiment; with `out_dir` set, writes trace CSVs named after the
/// run id. Deterministic in the config.
ExperimentRecord run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Runs configs on up to `parallelism` threads. Records come back in input
/// order; a failing config yields a record with `error` set.
std::vector<ExperimentRecord> sweep(const std::vector<ExperimentConfig>& configs, int parallelism,
                                   const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Either {"runs": [config, ...]} or {"base": config, "budgets": [...],
/// "controllers": [...]} expanded as the budget x controller grid.
std::vector<ExperimentConfig> parse_sweep(const nlohmann::json& doc);

enum class EmitFormat { Csv, Text };

void emit(std::ostream& out, const std::vector<ExperimentRecord>& records, EmitFormat format);

/// Reads records back from emitted CSV.
std::vector<ExperimentRecord> parse_records_csv(const std::string& text);

}  // namespace opsteer
