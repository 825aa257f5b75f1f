#include "hrl4in/harness/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hrl4in::harness {

using nlohmann::json;

namespace {

// Read j[key] into v if present; leave the default otherwise.
template <typename T>
void opt_get(const json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

void read_ppo(const json& j, ppo::PpoConfig& c) {
  opt_get(j, "lr", c.lr);
  opt_get(j, "clip", c.clip);
  opt_get(j, "epochs", c.epochs);
  opt_get(j, "minibatches", c.minibatches);
  opt_get(j, "value_coef", c.value_coef);
  opt_get(j, "entropy_coef", c.entropy_coef);
  opt_get(j, "max_grad_norm", c.max_grad_norm);
  opt_get(j, "gamma", c.gamma);
  opt_get(j, "tau", c.tau);
  opt_get(j, "seg_len", c.seg_len);
  opt_get(j, "linear_lr_decay", c.linear_lr_decay);
}

json write_ppo(const ppo::PpoConfig& c) {
  return {{"lr", c.lr},
          {"clip", c.clip},
          {"epochs", c.epochs},
          {"minibatches", c.minibatches},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"gamma", c.gamma},
          {"tau", c.tau},
          {"seg_len", c.seg_len},
          {"linear_lr_decay", c.linear_lr_decay}};
}

void read_hrl(const json& j, hrl::HrlConfig& c) {
  opt_get(j, "T", c.T);
  opt_get(j, "intrinsic_reward_scale", c.intrinsic_reward_scale);
  opt_get(j, "hl_freeze_updates", c.hl_freeze_updates);
  opt_get(j, "hl_lr", c.hl_lr);
  opt_get(j, "ll_lr", c.ll_lr);
  opt_get(j, "gamma_hl", c.gamma_hl);
  opt_get(j, "gamma_ll", c.gamma_ll);
  opt_get(j, "subgoal_init_std", c.subgoal_init_std);
  opt_get(j, "subgoal_min_std", c.subgoal_min_std);
  opt_get(j, "ll_reward_normalization", c.ll_reward_normalization);
  opt_get(j, "hl_subgoal_mean_gain", c.hl_subgoal_mean_gain);
}

json write_hrl(const hrl::HrlConfig& c) {
  return {{"T", c.T},
          {"intrinsic_reward_scale", c.intrinsic_reward_scale},
          {"hl_freeze_updates", c.hl_freeze_updates},
          {"hl_lr", c.hl_lr},
          {"ll_lr", c.ll_lr},
          {"gamma_hl", c.gamma_hl},
          {"gamma_ll", c.gamma_ll},
          {"subgoal_init_std", c.subgoal_init_std},
          {"subgoal_min_std", c.subgoal_min_std},
          {"ll_reward_normalization", c.ll_reward_normalization},
          {"hl_subgoal_mean_gain", c.hl_subgoal_mean_gain}};
}

}  // namespace

void RunConfig::validate() const {
  if (algorithm != "flat_ppo" && algorithm != "hrl4in" &&
      algorithm != "hrl4in_no_embodiment")
    throw ConfigError("config: unknown algorithm '" + algorithm + "'");
  if (layout_path.empty() || !std::filesystem::exists(layout_path))
    throw ConfigError("config: layout file '" + layout_path + "' does not exist");
  if (seeds.empty()) throw ConfigError("config: seed list is empty");
  if (std::set<uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("config: seeds must be distinct");
  if (total_updates < 1 || num_envs < 1 || rollout_steps < 1 || eval_episodes < 1)
    throw ConfigError("config: counts must be positive");
}

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  opt_get(j, "algorithm", c.algorithm);
  opt_get(j, "layout", c.layout_path);
  opt_get(j, "seeds", c.seeds);
  opt_get(j, "total_updates", c.total_updates);
  opt_get(j, "num_envs", c.num_envs);
  opt_get(j, "rollout_steps", c.rollout_steps);
  opt_get(j, "eval_interval", c.eval_interval);
  opt_get(j, "eval_episodes", c.eval_episodes);
  opt_get(j, "checkpoint_interval", c.checkpoint_interval);
  opt_get(j, "early_stop_success", c.early_stop_success);
  opt_get(j, "out_dir", c.out_dir);
  if (j.contains("ppo")) read_ppo(j.at("ppo"), c.ppo);
  if (j.contains("hrl")) read_hrl(j.at("hrl"), c.hrl);
  opt_get(j, "conv_channels", c.conv_channels);
  opt_get(j, "conv_kernel", c.conv_kernel);
  opt_get(j, "conv_fc", c.conv_fc);
  opt_get(j, "vec_fc", c.vec_fc);
  opt_get(j, "hidden", c.hidden);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::serialize() const {
  json j{{"algorithm", algorithm},
         {"layout", layout_path},
         {"seeds", seeds},
         {"total_updates", total_updates},
         {"num_envs", num_envs},
         {"rollout_steps", rollout_steps},
         {"eval_interval", eval_interval},
         {"eval_episodes", eval_episodes},
         {"checkpoint_interval", checkpoint_interval},
         {"early_stop_success", early_stop_success},
         {"out_dir", out_dir},
         {"ppo", write_ppo(ppo)},
         {"hrl", write_hrl(hrl)},
         {"conv_channels", conv_channels},
         {"conv_kernel", conv_kernel},
         {"conv_fc", conv_fc},
         {"vec_fc", vec_fc},
         {"hidden", hidden}};
  return j.dump(2);
}

TrainerOptions RunConfig::trainer_options(
    uint64_t seed, std::shared_ptr<const env::GridLayout> layout) const {
  TrainerOptions t;
  t.layout = std::move(layout);
  t.num_envs = num_envs;
  t.rollout_steps = rollout_steps;
  t.ppo = ppo;
  t.ppo.total_updates = total_updates;
  t.hrl = hrl;
  t.hrl.no_embodiment_selector =
      hrl.no_embodiment_selector || algorithm == "hrl4in_no_embodiment";
  t.conv_channels = conv_channels;
  t.conv_kernel = conv_kernel;
  t.conv_fc = conv_fc;
  t.vec_fc = vec_fc;
  t.hidden = hidden;
  t.seed = seed;
  return t;
}

}  // namespace hrl4in::harness
