#include "hrl4in/harness/metrics.hpp"

#include <fstream>

#include <json.hpp>

namespace hrl4in::harness {

using nlohmann::json;

namespace {

json stats_to_json(const ppo::UpdateStats& s) {
  return {{"policy_loss", s.policy_loss}, {"value_loss", s.value_loss},
          {"entropy", s.entropy},         {"clip_fraction", s.clip_fraction},
          {"approx_kl", s.approx_kl},     {"grad_norm", s.grad_norm},
          {"lr", s.lr}};
}

ppo::UpdateStats stats_from_json(const json& j) {
  ppo::UpdateStats s;
  s.policy_loss = j.at("policy_loss");
  s.value_loss = j.at("value_loss");
  s.entropy = j.at("entropy");
  s.clip_fraction = j.at("clip_fraction");
  s.approx_kl = j.at("approx_kl");
  s.grad_norm = j.at("grad_norm");
  s.lr = j.at("lr");
  return s;
}

}  // namespace

MetricsRecord MetricsRecord::from_cycle(const CycleMetrics& c) {
  MetricsRecord r;
  r.update = c.update;
  r.env_steps = c.env_steps;
  r.episodes = c.episodes;
  r.mean_reward = c.mean_reward;
  r.success_rate = c.success_rate;
  r.mean_length = c.mean_length;
  r.mean_energy = c.mean_energy;
  r.embodiment_fractions = c.embodiment_fractions;
  r.ll_stats = c.ll_stats;
  r.hl_stats = c.hl_stats;
  r.hl_updated = c.hl_updated;
  r.hl_decisions = c.hl_decisions;
  r.hl_achieved = c.hl_achieved;
  r.hl_timeouts = c.hl_timeouts;
  return r;
}

std::string MetricsRecord::to_json_line() const {
  json j{{"update", update},
         {"env_steps", env_steps},
         {"episodes", episodes},
         {"mean_reward", mean_reward},
         {"success_rate", success_rate},
         {"mean_length", mean_length},
         {"mean_energy", mean_energy},
         {"embodiment_fractions", embodiment_fractions},
         {"ll", stats_to_json(ll_stats)},
         {"hl", stats_to_json(hl_stats)},
         {"hl_updated", hl_updated},
         {"hl_decisions", hl_decisions},
         {"hl_achieved", hl_achieved},
         {"hl_timeouts", hl_timeouts}};
  return j.dump();
}

MetricsRecord MetricsRecord::parse_json_line(const std::string& line) {
  json j = json::parse(line);
  MetricsRecord r;
  r.update = j.at("update");
  r.env_steps = j.at("env_steps");
  r.episodes = j.at("episodes");
  r.mean_reward = j.at("mean_reward");
  r.success_rate = j.at("success_rate");
  r.mean_length = j.at("mean_length");
  r.mean_energy = j.at("mean_energy");
  auto ef = j.at("embodiment_fractions");
  for (int i = 0; i < hrl::kNumEmbodiments; ++i) r.embodiment_fractions[i] = ef.at(i);
  r.ll_stats = stats_from_json(j.at("ll"));
  r.hl_stats = stats_from_json(j.at("hl"));
  r.hl_updated = j.at("hl_updated");
  r.hl_decisions = j.at("hl_decisions");
  r.hl_achieved = j.at("hl_achieved");
  r.hl_timeouts = j.at("hl_timeouts");
  return r;
}

void append_metrics(const std::string& path, const MetricsRecord& rec) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw ConfigError("metrics: cannot open '" + path + "' for append");
  f << rec.to_json_line() << "\n";
  f.flush();
  if (!f) throw ConfigError("metrics: write failed for '" + path + "'");
}

std::vector<MetricsRecord> load_metrics(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("metrics: cannot open '" + path + "'");
  std::vector<MetricsRecord> out;
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(f, line))
    if (!line.empty()) lines.push_back(line);
  for (size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(MetricsRecord::parse_json_line(lines[i]));
    } catch (const json::exception& e) {
      if (i + 1 == lines.size()) break;  // truncated tail is tolerated
      throw ConfigError("metrics: malformed record at line " + std::to_string(i + 1) +
                        " of '" + path + "': " + e.what());
    }
  }
  return out;
}

void export_curves(const std::vector<std::vector<MetricsRecord>>& seed_logs,
                   const std::string& out_csv) {
  if (seed_logs.empty()) throw UsageError("export_curves: need at least one seed log");
  size_t n = seed_logs[0].size();
  for (const auto& log : seed_logs) n = std::min(n, log.size());

  std::ofstream f(out_csv);
  if (!f) throw ConfigError("export_curves: cannot write '" + out_csv + "'");
  const char* metrics[] = {"mean_reward", "success_rate", "mean_length", "mean_energy"};
  f << "update,env_steps";
  for (const char* mname : metrics)
    f << "," << mname << "_mean," << mname << "_min," << mname << "_max";
  f << "\n";
  auto get = [](const MetricsRecord& r, int mi) {
    switch (mi) {
      case 0: return r.mean_reward;
      case 1: return r.success_rate;
      case 2: return r.mean_length;
      default: return r.mean_energy;
    }
  };
  for (size_t u = 0; u < n; ++u) {
    long long max_steps = 0;
    for (const auto& log : seed_logs)
      max_steps = std::max(max_steps, log[u].env_steps);
    f << seed_logs[0][u].update << "," << max_steps;
    for (int mi = 0; mi < 4; ++mi) {
      double sum = 0, lo = 0, hi = 0;
      for (size_t s = 0; s < seed_logs.size(); ++s) {
        double v = get(seed_logs[s][u], mi);
        sum += v;
        if (s == 0) {
          lo = hi = v;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      f << "," << sum / seed_logs.size() << "," << lo << "," << hi;
    }
    f << "\n";
  }
  if (!f) throw ConfigError("export_curves: write failed for '" + out_csv + "'");
}

EmbodimentUsageMap EmbodimentUsageMap::build(const std::vector<HlDecision>& decisions,
                                             int k) {
  EmbodimentUsageMap m;
  m.k = k;
  for (auto& c : m.counts) c.assign(static_cast<size_t>(k) * k, 0);
  for (const auto& d : decisions) {
    if (d.pos.x < 0 || d.pos.x >= k || d.pos.y < 0 || d.pos.y >= k)
      throw UsageError("usage map: decision position out of bounds");
    ++m.counts[static_cast<int>(d.embodiment)][static_cast<size_t>(d.pos.y) * k + d.pos.x];
  }
  return m;
}

int EmbodimentUsageMap::total_at(int x, int y) const {
  int t = 0;
  for (const auto& c : counts) t += c[static_cast<size_t>(y) * k + x];
  return t;
}

double EmbodimentUsageMap::fraction(int x, int y, hrl::Embodiment e) const {
  int t = total_at(x, y);
  if (t == 0) return -1.0;
  return static_cast<double>(counts[static_cast<int>(e)][static_cast<size_t>(y) * k + x]) / t;
}

void EmbodimentUsageMap::export_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("usage map: cannot write '" + path + "'");
  const char* names[] = {"base_only", "arm_only", "base_arm"};
  for (int e = 0; e < hrl::kNumEmbodiments; ++e) {
    f << "# " << names[e] << "\n";
    for (int y = 0; y < k; ++y) {
      for (int x = 0; x < k; ++x) {
        if (x) f << ",";
        f << fraction(x, y, static_cast<hrl::Embodiment>(e));
      }
      f << "\n";
    }
  }
  if (!f) throw ConfigError("usage map: write failed for '" + path + "'");
}

}  // namespace hrl4in::harness
