#pragma once

#include <string>
#include <vector>

#include "hrl4in/harness/eval.hpp"

namespace hrl4in::harness {

// One line-delimited record per update cycle.
struct MetricsRecord {
  int update = 0;
  long long env_steps = 0;
  int episodes = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_energy = 0.0;
  std::array<double, hrl::kNumEmbodiments> embodiment_fractions = {0.0, 0.0, 0.0};
  ppo::UpdateStats ll_stats;
  ppo::UpdateStats hl_stats;
  bool hl_updated = false;
  int hl_decisions = 0;
  int hl_achieved = 0;
  int hl_timeouts = 0;

  static MetricsRecord from_cycle(const CycleMetrics& c);
  std::string to_json_line() const;
  static MetricsRecord parse_json_line(const std::string& line);
};

// Appends one record as a single line + newline, flushed immediately, so a
// truncated final line never corrupts earlier records.
void append_metrics(const std::string& path, const MetricsRecord& rec);

// Reads a metrics log; a malformed trailing line is ignored, malformed
// interior lines raise ConfigError.
std::vector<MetricsRecord> load_metrics(const std::string& path);

// Aligned-by-update aggregation across seeds: for each tracked metric, one
// (mean, min, max) column triple. CSV with a header row.
void export_curves(const std::vector<std::vector<MetricsRecord>>& seed_logs,
                   const std::string& out_csv);

// Per-cell HL embodiment usage counts from evaluation trajectories.
struct EmbodimentUsageMap {
  int k = 0;
  std::array<std::vector<int>, hrl::kNumEmbodiments> counts;  // k*k, row-major

  static EmbodimentUsageMap build(const std::vector<HlDecision>& decisions, int k);
  int total_at(int x, int y) const;
  // Normalized selection probability at a visited cell; -1 for unvisited.
  double fraction(int x, int y, hrl::Embodiment e) const;
  // CSV: one block per embodiment, k rows of k normalized values (-1 absent).
  void export_csv(const std::string& path) const;
};

}  // namespace hrl4in::harness
