#include "hrl4in/harness/analyze.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hrl4in::harness {

namespace fs = std::filesystem;

namespace {

// seed_*/<leaf> under in_dir, sorted for deterministic output; falls back to
// in_dir/<leaf> or in_dir itself being the file.
std::vector<std::string> collect_inputs(const std::string& in_dir,
                                        const std::string& leaf) {
  std::vector<std::string> found;
  if (fs::is_regular_file(in_dir)) return {in_dir};
  if (!fs::is_directory(in_dir))
    throw ConfigError("analyze: '" + in_dir + "' is not a file or directory");
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (!entry.is_directory()) continue;
    if (entry.path().filename().string().rfind("seed_", 0) != 0) continue;
    fs::path p = entry.path() / leaf;
    if (fs::is_regular_file(p)) found.push_back(p.string());
  }
  if (found.empty() && fs::is_regular_file(fs::path(in_dir) / leaf))
    found.push_back((fs::path(in_dir) / leaf).string());
  if (found.empty())
    throw ConfigError("analyze: no '" + leaf + "' found under '" + in_dir + "'");
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace

void analyze_curves(const std::string& in_dir, const std::string& out_csv) {
  std::vector<std::vector<MetricsRecord>> logs;
  for (const auto& path : collect_inputs(in_dir, "metrics.jsonl")) {
    auto log = load_metrics(path);
    if (log.empty())
      throw ConfigError("analyze: '" + path + "' has no complete records");
    logs.push_back(std::move(log));
  }
  export_curves(logs, out_csv);
}

std::vector<HlDecision> load_decisions_csv(const std::string& path, int* k_out) {
  std::ifstream f(path);
  if (!f) throw ConfigError("analyze: cannot open '" + path + "'");
  std::string line;
  int k = -1;
  std::vector<HlDecision> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line.rfind("# k=", 0) == 0) {
      k = std::stoi(line.substr(4));
      continue;
    }
    if (line.rfind("x,", 0) == 0) continue;  // header
    std::istringstream ss(line);
    HlDecision d;
    int e = 0;
    char c1 = 0, c2 = 0;
    if (!(ss >> d.pos.x >> c1 >> d.pos.y >> c2 >> e) || c1 != ',' || c2 != ',' ||
        e < 0 || e >= hrl::kNumEmbodiments)
      throw ConfigError("analyze: malformed decision line in '" + path + "': " + line);
    d.embodiment = static_cast<hrl::Embodiment>(e);
    out.push_back(d);
  }
  if (k < 1) throw ConfigError("analyze: missing '# k=' header in '" + path + "'");
  if (k_out) *k_out = k;
  return out;
}

void analyze_heatmap(const std::string& in_dir, const std::string& out_csv) {
  std::vector<HlDecision> all;
  int k = -1;
  for (const auto& path : collect_inputs(in_dir, "hl_decisions.csv")) {
    int file_k = -1;
    auto ds = load_decisions_csv(path, &file_k);
    if (k == -1) k = file_k;
    if (file_k != k)
      throw ConfigError("analyze: grid size mismatch across decision files");
    all.insert(all.end(), ds.begin(), ds.end());
  }
  EmbodimentUsageMap::build(all, k).export_csv(out_csv);
}

}  // namespace hrl4in::harness
