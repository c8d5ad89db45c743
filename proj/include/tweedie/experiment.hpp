#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tweedie/losses.hpp"
#include "tweedie/ranker.hpp"
#include "tweedie/simulation.hpp"
#include "tweedie/statistics.hpp"

namespace tweedie {

struct ProtocolConfig {
  int editorial_days = 3;
  int total_days = 13;
  WorldConfig world;
  TrainConfig train;
  std::vector<LossKind> kinds{loss::TweediePow{1.5}, loss::MeanSquared{},
                              loss::WeightedLogLoss{}, loss::LogLoss{}};
  int n_runs = 10;
  /// Continue from the previous day's model instead of re-initializing.
  bool warm_start = false;

  void validate() const;
};

/// Ranker training example for one logged impression. Regression targets are
/// watch / watch_scale; clicked impressions carry that same normalized watch
/// as their log-loss weight and unclicked ones weight 1.
Sample to_sample(const SessionEvent& event, double watch_scale);

struct RunResult {
  /// Summed watch seconds of each day, day 1 first.
  std::vector<double> daily_watch_seconds;
  std::vector<std::uint64_t> daily_clicks;
  std::vector<std::uint64_t> daily_events;
  /// Filled only when requested.
  std::vector<SessionEvent> events;
  /// Ranking served on the last day.
  std::vector<std::uint32_t> final_ranking;

  /// Total over the model-ranked days only.
  double model_days_total(int editorial_days) const;
};

/// Seed of run `run_index` under the config's master seed. Every kind uses
/// the same run seed for a given index.
std::uint64_t run_seed(const ProtocolConfig& config, int run_index);

/// One 13-day (by default) trajectory for one loss. The world comes from
/// config.world.master_seed; sessions, editorial lists and model
/// initialization come from run_seed; shuffling from train.shuffle_seed.
RunResult run_protocol(const ProtocolConfig& config, const LossKind& kind,
                       std::uint64_t run_seed, const World& world,
                       bool keep_events = false);
RunResult run_protocol(const ProtocolConfig& config, const LossKind& kind,
                       std::uint64_t run_seed);

struct Comparison {
  std::string baseline;
  double lift_percent = 0.0;
  std::optional<WelchResult> welch;  // empty when both variances are zero
  double p_value = 1.0;
};

struct ExperimentReport {
  ProtocolConfig config;
  /// Unique label per configured kind ("tweedie", "mse", ...; repeated
  /// kinds get "#2", "#3" suffixes).
  std::vector<std::string> labels;
  /// [kind][run][day] summed watch seconds.
  std::vector<std::vector<std::vector<double>>> daily_totals;
  /// [kind][run] total watch over the model-ranked days.
  std::vector<std::vector<double>> per_run_totals;
  /// [kind][day] mean over runs of watch seconds per user.
  std::vector<std::vector<double>> daily_means;
  std::string reference;
  std::vector<Comparison> comparisons;
  /// Event logs of run 0 per kind, when requested.
  std::vector<std::vector<SessionEvent>> run0_events;
};

struct RunManyOptions {
  unsigned threads = 1;
  bool keep_run0_events = false;
};

/// All kinds times n_runs trajectories, then lifts and Welch p-values of the
/// reference (first Tweedie kind, else the first kind) against every other.
ExperimentReport run_many(const ProtocolConfig& config,
                          const RunManyOptions& options = {});

std::vector<std::string> unique_labels(const std::vector<LossKind>& kinds);

struct ReportPaths {
  std::filesystem::path report;
  std::filesystem::path plot_data;
};

/// Writes the JSON report (config_echo, per_run_totals, daily_means, lifts,
/// p_values) and the kind,day,mean_watch_seconds plot table.
void emit_report(const ExperimentReport& report, const ReportPaths& paths);

std::string report_json(const ExperimentReport& report);
std::string plot_data_csv(const ExperimentReport& report);

}  // namespace tweedie
