#pragma once

#include "hrl4in/harness/eval.hpp"
#include "hrl4in/harness/metrics.hpp"

namespace hrl4in::harness {

// Aggregates seed_*/metrics.jsonl under in_dir (or in_dir/metrics.jsonl for a
// single run) into a learning-curve CSV with per-update mean/min/max columns.
void analyze_curves(const std::string& in_dir, const std::string& out_csv);

// Parses one hl_decisions.csv produced by a hierarchical run.
std::vector<HlDecision> load_decisions_csv(const std::string& path, int* k_out);

// Merges seed_*/hl_decisions.csv under in_dir (or a single file) into one
// per-cell embodiment usage CSV.
void analyze_heatmap(const std::string& in_dir, const std::string& out_csv);

}  // namespace hrl4in::harness
