// Command line front end: train / eval / analyze / oracle.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrl4in/env/oracle.hpp"
#include "hrl4in/harness/analyze.hpp"
#include "hrl4in/harness/run.hpp"

namespace fs = std::filesystem;
using namespace hrl4in;

namespace {

void print_report(const harness::EvalReport& r) {
  std::cout << "episodes:          " << r.episodes << "\n"
            << "success_rate:      " << r.success_rate << "\n"
            << "mean_length:       " << r.mean_length << "\n"
            << "mean_reward:       " << r.mean_reward << "\n"
            << "mean_energy:       " << r.mean_energy << "\n"
            << "mean_length_ratio: " << r.mean_length_ratio << "\n"
            << "embodiment_fractions (base_only, arm_only, base_arm): "
            << r.embodiment_fractions[0] << ", " << r.embodiment_fractions[1] << ", "
            << r.embodiment_fractions[2] << "\n";
}

int cmd_train(const std::string& config_path, int64_t seed_override,
              const std::string& algo_override, const std::string& out_override) {
  harness::RunConfig cfg = harness::RunConfig::load(config_path);
  if (!algo_override.empty()) cfg.algorithm = algo_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override >= 0) cfg.seeds = {static_cast<uint64_t>(seed_override)};
  cfg.validate();

  for (uint64_t seed : cfg.seeds) {
    std::cout << "training " << cfg.algorithm << " seed " << seed << " -> "
              << cfg.out_dir << "/seed_" << seed << std::endl;
    harness::RunResult res = harness::run_training(cfg, seed, cfg.out_dir);
    std::cout << "seed " << seed << ": " << res.updates_run << " updates, final eval:\n";
    print_report(res.final_eval);
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path, int episodes,
             bool stochastic) {
  std::string cfg_path = config_path;
  if (cfg_path.empty()) {
    // Default to the effective config written next to the checkpoint.
    fs::path p = fs::path(checkpoint).parent_path() / "effective_config.json";
    if (!fs::exists(p))
      throw ConfigError("eval: no --config given and '" + p.string() + "' not found");
    cfg_path = p.string();
  }
  harness::RunConfig cfg = harness::RunConfig::load(cfg_path);
  harness::EvalReport r =
      harness::evaluate_checkpoint(checkpoint, cfg, episodes, !stochastic);
  print_report(r);
  return 0;
}

int cmd_oracle(const std::string& layout_path) {
  env::GridLayout layout = env::GridLayout::load(layout_path);
  std::cout << "layout:             " << layout_path << "\n"
            << "grid:               " << layout.k << "x" << layout.k << "\n"
            << "door:               " << (layout.has_door ? "yes" : "no") << "\n"
            << "goal:               (" << layout.goal_cell.x << "," << layout.goal_cell.y
            << ")\n"
            << "x,y,heading,optimal_steps\n";
  static const char* headings = "NESW";
  for (const auto& cell : layout.left_room_cells)
    for (int h = 0; h < 4; ++h) {
      auto d = env::optimal_steps(layout,
                                  {cell.x, cell.y, static_cast<env::Heading>(h)});
      std::cout << cell.x << "," << cell.y << "," << headings[h] << ","
                << (d ? std::to_string(*d) : "unreachable") << "\n";
    }
  std::cout << "mean_optimal_steps: " << env::mean_optimal_steps(layout) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HRL4IN toy gridworld: training, evaluation and analysis"};
  app.require_subcommand(1);

  std::string config_path, algo, out_dir, checkpoint, in_dir, out_file, layout_path;
  int64_t seed = -1;
  int episodes = 100;
  bool stochastic = false;

  auto* train = app.add_subcommand("train", "train one or more seeds from a config");
  train->add_option("--config", config_path, "run config JSON")->required();
  train->add_option("--seed", seed, "train only this seed (overrides config seeds)");
  train->add_option("--algo", algo, "override algorithm")
      ->check(CLI::IsMember({"flat_ppo", "hrl4in", "hrl4in_no_embodiment"}));
  train->add_option("--out", out_dir, "override output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a stored checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "number of evaluation episodes");
  eval->add_option("--config", config_path,
                   "run config (default: effective_config.json next to the checkpoint)");
  eval->add_flag("--stochastic", stochastic, "sample actions instead of greedy mode");

  auto* analyze = app.add_subcommand("analyze", "aggregate run artifacts");
  analyze->require_subcommand(1);
  auto* curves = analyze->add_subcommand("curves", "learning-curve CSV across seeds");
  curves->add_option("--in", in_dir, "run directory (contains seed_*/)")->required();
  curves->add_option("--out", out_file, "output CSV")->required();
  auto* heatmap = analyze->add_subcommand("heatmap", "embodiment usage CSV");
  heatmap->add_option("--in", in_dir, "run directory (contains seed_*/)")->required();
  heatmap->add_option("--out", out_file, "output CSV")->required();

  auto* oracle = app.add_subcommand("oracle", "shortest-path statistics for a layout");
  oracle->add_option("--layout", layout_path, "layout file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, seed, algo, out_dir);
    if (*eval) return cmd_eval(checkpoint, config_path, episodes, stochastic);
    if (*curves) {
      harness::analyze_curves(in_dir, out_file);
      std::cout << "wrote " << out_file << "\n";
      return 0;
    }
    if (*heatmap) {
      harness::analyze_heatmap(in_dir, out_file);
      std::cout << "wrote " << out_file << "\n";
      return 0;
    }
    if (*oracle) return cmd_oracle(layout_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
