#pragma once

#include <optional>

#include "hrl4in/nn/checkpoint.hpp"
#include "hrl4in/nn/heads.hpp"

namespace hrl4in::ppo {

using nn::NodeId;
using nn::Tensor;

// Architecture of one recurrent actor-critic: conv branch over the global map,
// dense branch over the flat observation, GRU trunk, value head plus a
// categorical and/or Gaussian action head.
struct NetConfig {
  int map_channels = 4;
  int map_hw = 11;  // map is map_channels x map_hw x map_hw
  std::vector<int> conv_channels{32, 64, 64};
  int conv_kernel = 3;
  int conv_stride = 1;
  int conv_fc = 128;
  int vec_dim = 0;
  int vec_fc = 64;
  int hidden = 512;

  int categorical_n = 0;  // 0 = no categorical head
  int gaussian_dim = 0;   // 0 = no Gaussian head
  std::vector<double> gaussian_init_std;
  std::vector<double> gaussian_min_std;
  // Init gain for the Gaussian mean layer. The small default keeps the initial
  // mean near zero; a larger gain gives the untrained policy a state-dependent
  // spread of means, which matters when downstream consumers round the action
  // to integers (a near-zero mean would round to zero everywhere).
  double gaussian_mean_gain = 0.01;

  int map_dim() const { return map_channels * map_hw * map_hw; }
};

template <typename T>
class ActorCritic {
 public:
  NetConfig cfg;
  std::vector<nn::Conv2d<T>> convs;
  nn::Dense<T> conv_fc;
  nn::Dense<T> vec_fc;
  nn::GruCell<T> gru;
  nn::Dense<T> value_head;
  std::optional<nn::CategoricalHead<T>> cat;
  std::optional<nn::GaussianHead<T>> gauss;

  ActorCritic(NetConfig config, uint64_t seed) : cfg(std::move(config)) {
    std::mt19937_64 rng(seed);
    const double relu_gain = std::sqrt(2.0);
    int ch = cfg.map_channels;
    int hw = cfg.map_hw;
    for (size_t i = 0; i < cfg.conv_channels.size(); ++i) {
      convs.emplace_back("conv" + std::to_string(i), ch, cfg.conv_channels[i],
                         cfg.conv_kernel, cfg.conv_stride, relu_gain, rng);
      ch = cfg.conv_channels[i];
      hw = convs.back().out_dim(hw);
      if (hw < 1) throw UsageError("ActorCritic: map too small for conv stack");
    }
    conv_flat_ = ch * hw * hw;
    conv_fc = nn::Dense<T>("conv_fc", conv_flat_, cfg.conv_fc, relu_gain, rng);
    vec_fc = nn::Dense<T>("vec_fc", cfg.vec_dim, cfg.vec_fc, relu_gain, rng);
    gru = nn::GruCell<T>("gru", cfg.conv_fc + cfg.vec_fc, cfg.hidden, rng);
    value_head = nn::Dense<T>("value", cfg.hidden, 1, 1.0, rng);
    if (cfg.categorical_n > 0)
      cat.emplace("cat_head", cfg.hidden, cfg.categorical_n, rng);
    if (cfg.gaussian_dim > 0)
      gauss.emplace("gauss_head", cfg.hidden, cfg.gaussian_dim, cfg.gaussian_init_std,
                    cfg.gaussian_min_std, rng, cfg.gaussian_mean_gain);
  }

  struct Forward {
    NodeId features = -1;
    NodeId hidden = -1;  // new GRU state
    NodeId value = -1;   // (B,1)
    NodeId cat_logits = -1;
    NodeId gauss_mean = -1;
  };

  // One recurrent step. map_obs (B, map_dim), vec_obs (B, vec_dim),
  // hidden (B, hidden).
  Forward forward(nn::Tape<T>& t, NodeId map_obs, NodeId vec_obs, NodeId hidden) {
    const Tensor<T>& mv = t.value(map_obs);
    const Tensor<T>& vv = t.value(vec_obs);
    const Tensor<T>& hv = t.value(hidden);
    if (mv.cols != cfg.map_dim())
      throw UsageError("forward: map obs has " + std::to_string(mv.cols) +
                       " cols, expected " + std::to_string(cfg.map_dim()));
    if (vv.cols != cfg.vec_dim)
      throw UsageError("forward: vec obs has " + std::to_string(vv.cols) +
                       " cols, expected " + std::to_string(cfg.vec_dim));
    if (hv.cols != cfg.hidden)
      throw UsageError("forward: hidden has " + std::to_string(hv.cols) +
                       " cols, expected " + std::to_string(cfg.hidden));

    NodeId x = map_obs;
    int hw = cfg.map_hw;
    for (auto& conv : convs) {
      x = t.relu(conv.forward(t, x, hw, hw));
      hw = conv.out_dim(hw);
    }
    NodeId spatial = t.relu(conv_fc.forward(t, x));
    NodeId flat = t.relu(vec_fc.forward(t, vec_obs));
    NodeId features = gru.step(t, t.concat_cols({spatial, flat}), hidden);

    Forward out;
    out.features = features;
    out.hidden = features;
    out.value = value_head.forward(t, features);
    if (cat) out.cat_logits = cat->logits(t, features);
    if (gauss) out.gauss_mean = gauss->mean(t, features);
    return out;
  }

  std::vector<nn::Parameter<T>*> parameters() {
    std::vector<nn::Parameter<T>*> out;
    for (auto& c : convs) c.collect(out);
    conv_fc.collect(out);
    vec_fc.collect(out);
    gru.collect(out);
    value_head.collect(out);
    if (cat) cat->logits_layer.collect(out);
    if (gauss) gauss->collect(out);
    return out;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  Tensor<T> initial_hidden(int batch) const { return Tensor<T>(batch, cfg.hidden); }

  void save(nn::Checkpoint& ck, const std::string& prefix) {
    ck.put_params(prefix, parameters());
  }
  void load(const nn::Checkpoint& ck, const std::string& prefix) {
    auto params = parameters();
    ck.load_params(prefix, params);
  }

 private:
  int conv_flat_ = 0;
};

}  // namespace hrl4in::ppo
