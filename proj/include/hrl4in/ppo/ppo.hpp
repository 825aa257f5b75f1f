#pragma once

#include <algorithm>
#include <numeric>
#include <random>

#include "hrl4in/ppo/policy.hpp"

namespace hrl4in::ppo {

// One transition as seen by a single actor-critic. For the high-level policy
// these are sparse (one record per decision step), for the low-level / flat
// policy one record per env step.
template <typename T>
struct StepRecord {
  std::vector<T> map_obs;
  std::vector<T> vec_obs;
  std::vector<T> hidden;  // GRU state *before* this step
  int cat_action = 0;
  std::vector<T> gauss_sample;  // raw continuous sample (empty without head)
  double log_prob = 0.0;        // behavior joint log-prob
  double value = 0.0;
  double reward = 0.0;
  bool done = false;  // episode boundary after this transition
};

template <typename T>
struct RolloutBuffer {
  std::vector<std::vector<StepRecord<T>>> env_seqs;

  explicit RolloutBuffer(int num_envs = 0) : env_seqs(num_envs) {}
  void clear() {
    for (auto& s : env_seqs) s.clear();
  }
  size_t total_steps() const {
    size_t n = 0;
    for (const auto& s : env_seqs) n += s.size();
    return n;
  }
};

// Running reward normalization: rewards are divided by the standard deviation
// of the discounted return, estimated online per training stream. Keeps value
// targets O(1) regardless of the raw reward scale, so the value-loss gradient
// cannot dominate the shared global gradient-norm clip.
class RewardNormalizer {
 public:
  RewardNormalizer(int num_envs = 0, double gamma = 0.99)
      : gamma_(gamma), returns_(num_envs, 0.0) {}

  // Updates the running return for env `e` with raw reward `r` and returns
  // the normalized reward. `done` resets the env's running return afterward.
  double normalize(int e, double r, bool done) {
    auto& ret = returns_.at(e);
    ret = gamma_ * ret + r;
    ++count_;
    double d = ret - mean_;
    mean_ += d / count_;
    m2_ += d * (ret - mean_);
    if (done) ret = 0.0;
    double stdev = std::sqrt(count_ > 1 ? m2_ / count_ : 0.0);
    if (stdev < 1e-8) return r;
    return std::clamp(r / stdev, -10.0, 10.0);
  }

  // Serialization hooks for checkpoints: [count, mean, m2, ret_0..ret_{N-1}].
  std::vector<double> state() const {
    std::vector<double> s{static_cast<double>(count_), mean_, m2_};
    s.insert(s.end(), returns_.begin(), returns_.end());
    return s;
  }
  void restore(const std::vector<double>& s) {
    if (s.size() != 3 + returns_.size())
      throw UsageError("RewardNormalizer: state size mismatch");
    count_ = static_cast<long long>(s[0]);
    mean_ = s[1];
    m2_ = s[2];
    std::copy(s.begin() + 3, s.end(), returns_.begin());
  }

 private:
  double gamma_ = 0.99;
  std::vector<double> returns_;  // per-env discounted running return
  long long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct GaeResult {
  std::vector<std::vector<double>> adv;
  std::vector<std::vector<double>> ret;  // adv + value
};

// Generalized advantage estimation over per-env sequences. `bootstrap[e]` is
// the value estimate for the state following the last record of env e, used
// only when that record is not terminal.
template <typename T>
GaeResult compute_gae(const RolloutBuffer<T>& buf, const std::vector<double>& bootstrap,
                      double gamma, double tau) {
  if (bootstrap.size() != buf.env_seqs.size())
    throw UsageError("compute_gae: bootstrap size != num envs");
  GaeResult out;
  out.adv.resize(buf.env_seqs.size());
  out.ret.resize(buf.env_seqs.size());
  for (size_t e = 0; e < buf.env_seqs.size(); ++e) {
    const auto& seq = buf.env_seqs[e];
    out.adv[e].assign(seq.size(), 0.0);
    out.ret[e].assign(seq.size(), 0.0);
    double gae = 0.0;
    for (int t = static_cast<int>(seq.size()) - 1; t >= 0; --t) {
      double not_done = seq[t].done ? 0.0 : 1.0;
      double next_v =
          (t + 1 < static_cast<int>(seq.size())) ? seq[t + 1].value : bootstrap[e];
      double delta = seq[t].reward + gamma * next_v * not_done - seq[t].value;
      gae = delta + gamma * tau * not_done * gae;
      out.adv[e][t] = gae;
      out.ret[e][t] = gae + seq[t].value;
    }
  }
  return out;
}

struct PpoConfig {
  double lr = 1e-4;
  double clip = 0.2;
  int epochs = 4;
  int minibatches = 8;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  double gamma = 0.99;
  double tau = 0.95;
  int seg_len = 64;  // recurrent replay segment length
  int total_updates = 1;
  bool linear_lr_decay = true;
  bool adv_center = true;  // subtract batch mean advantage
  bool adv_scale = true;   // divide by batch advantage std
};

// Learning rate for update i (0-based) under linear decay to zero.
inline double lr_schedule(const PpoConfig& cfg, int update_index) {
  if (!cfg.linear_lr_decay) return cfg.lr;
  double frac = 1.0 - static_cast<double>(update_index) / cfg.total_updates;
  return cfg.lr * std::max(0.0, frac);
}

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  double lr = 0.0;
};

struct Segment {
  int env = 0;
  int start = 0;
  int len = 0;
};

namespace detail {

// Per-step node handles from replaying a batch of segments through the net.
template <typename T>
struct Replay {
  std::vector<NodeId> log_prob;  // (B,1) per step
  std::vector<NodeId> value;     // (B,1) per step
  std::vector<NodeId> cat_ent;   // (B,1) per step, empty if no categorical head
  NodeId gauss_ent = -1;         // (1,1), state-independent
  int max_len = 0;
  // valid(b, t): row b of step t corresponds to a real record
  std::vector<std::vector<char>> valid;
};

// Unroll the network over `segs`, recomputing log-probs and values for the
// stored actions. Hidden states start from the recorded segment-start state
// and are zeroed across episode boundaries, matching rollout behavior.
template <typename T>
Replay<T> replay_segments(ActorCritic<T>& net, nn::Tape<T>& t,
                          const RolloutBuffer<T>& buf, const std::vector<Segment>& segs) {
  const int B = static_cast<int>(segs.size());
  const int map_dim = net.cfg.map_dim();
  const int vec_dim = net.cfg.vec_dim;
  Replay<T> out;
  for (const Segment& s : segs) out.max_len = std::max(out.max_len, s.len);
  out.valid.assign(B, std::vector<char>(out.max_len, 0));

  Tensor<T> h0(B, net.cfg.hidden);
  for (int b = 0; b < B; ++b) {
    const auto& rec = buf.env_seqs[segs[b].env][segs[b].start];
    for (int c = 0; c < net.cfg.hidden; ++c) h0(b, c) = rec.hidden[c];
  }
  NodeId h = t.leaf(std::move(h0));

  for (int step = 0; step < out.max_len; ++step) {
    Tensor<T> map_obs(B, map_dim), vec_obs(B, vec_dim);
    std::vector<int> cat_actions(B, 0);
    Tensor<T> gauss_samples(B, net.cfg.gaussian_dim > 0 ? net.cfg.gaussian_dim : 1);
    Tensor<T> carry(B, 1);  // keep hidden into next step?
    for (int b = 0; b < B; ++b) {
      const Segment& s = segs[b];
      if (step >= s.len) continue;
      out.valid[b][step] = 1;
      const auto& rec = buf.env_seqs[s.env][s.start + step];
      std::copy(rec.map_obs.begin(), rec.map_obs.end(), &map_obs.v[b * map_dim]);
      if (vec_dim > 0)
        std::copy(rec.vec_obs.begin(), rec.vec_obs.end(), &vec_obs.v[b * vec_dim]);
      cat_actions[b] = rec.cat_action;
      for (int d = 0; d < net.cfg.gaussian_dim; ++d)
        gauss_samples(b, d) = rec.gauss_sample[d];
      carry(b, 0) = rec.done ? T(0) : T(1);
    }

    auto fwd = net.forward(t, t.leaf(std::move(map_obs)), t.leaf(std::move(vec_obs)), h);
    out.value.push_back(fwd.value);

    NodeId lp = -1;
    if (net.cat) {
      lp = net.cat->log_prob(t, fwd.cat_logits, cat_actions);
      out.cat_ent.push_back(net.cat->entropy(t, fwd.cat_logits));
    }
    if (net.gauss) {
      NodeId glp = net.gauss->log_prob(t, fwd.gauss_mean, gauss_samples);
      lp = (lp >= 0) ? t.add(lp, glp) : glp;
    }
    out.log_prob.push_back(lp);

    if (step + 1 < out.max_len) h = t.scale_rows(fwd.hidden, carry);
  }
  if (net.gauss) out.gauss_ent = net.gauss->entropy(t);
  return out;
}

}  // namespace detail

// Replay every stored step at the network's current parameters; returns
// per-env sequences of (log_prob, value). Used for consistency checks and by
// the update's diagnostics.
template <typename T>
std::vector<std::vector<std::pair<double, double>>> evaluate_actions(
    ActorCritic<T>& net, const RolloutBuffer<T>& buf) {
  std::vector<Segment> segs;
  for (size_t e = 0; e < buf.env_seqs.size(); ++e)
    if (!buf.env_seqs[e].empty())
      segs.push_back({static_cast<int>(e), 0, static_cast<int>(buf.env_seqs[e].size())});
  std::vector<std::vector<std::pair<double, double>>> out(buf.env_seqs.size());
  if (segs.empty()) return out;
  nn::Tape<T> t;
  auto rep = detail::replay_segments(net, t, buf, segs);
  for (size_t b = 0; b < segs.size(); ++b) {
    auto& seq = out[segs[b].env];
    for (int step = 0; step < segs[b].len; ++step)
      seq.emplace_back(static_cast<double>(t.value(rep.log_prob[step])(b, 0)),
                       static_cast<double>(t.value(rep.value[step])(b, 0)));
  }
  return out;
}

// One full PPO update (epochs x minibatches) on the data in `buf`.
// `bootstrap[e]` is the value estimate past the end of env e's sequence.
template <typename T>
UpdateStats ppo_update(ActorCritic<T>& net, nn::Adam<T>& opt, const RolloutBuffer<T>& buf,
                       const std::vector<double>& bootstrap, const PpoConfig& cfg,
                       int update_index, std::mt19937_64& rng) {
  GaeResult gae = compute_gae(buf, bootstrap, cfg.gamma, cfg.tau);

  // Normalize advantages over the whole batch.
  double mean = 0.0, count = 0.0;
  for (const auto& a : gae.adv)
    for (double v : a) {
      mean += v;
      count += 1.0;
    }
  if (count == 0) throw UsageError("ppo_update: empty rollout buffer");
  mean /= count;
  double var = 0.0;
  for (const auto& a : gae.adv)
    for (double v : a) var += (v - mean) * (v - mean);
  double stdev = std::sqrt(var / count);
  double center = cfg.adv_center ? mean : 0.0;
  double scale = cfg.adv_scale ? stdev + 1e-8 : 1.0;
  for (auto& a : gae.adv)
    for (double& v : a) v = (v - center) / scale;

  // Chop each env sequence into replay segments.
  std::vector<Segment> segments;
  for (size_t e = 0; e < buf.env_seqs.size(); ++e) {
    int n = static_cast<int>(buf.env_seqs[e].size());
    for (int s = 0; s < n; s += cfg.seg_len)
      segments.push_back({static_cast<int>(e), s, std::min(cfg.seg_len, n - s)});
  }

  const double lr = lr_schedule(cfg, update_index);
  UpdateStats stats;
  stats.lr = lr;
  int n_batches = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(segments.begin(), segments.end(), rng);
    int mb_count = std::min<int>(cfg.minibatches, static_cast<int>(segments.size()));
    for (int mb = 0; mb < mb_count; ++mb) {
      // Contiguous shards of the shuffled segment list.
      size_t lo = segments.size() * mb / mb_count;
      size_t hi = segments.size() * (mb + 1) / mb_count;
      std::vector<Segment> shard(segments.begin() + lo, segments.begin() + hi);
      if (shard.empty()) continue;

      nn::Tape<T> t;
      auto rep = detail::replay_segments(net, t, buf, shard);

      double n_valid = 0;
      for (const auto& row : rep.valid)
        for (char v : row) n_valid += v;

      std::vector<NodeId> loss_terms;
      double clip_hits = 0, kl_sum = 0;
      double policy_loss_v = 0, value_loss_v = 0, entropy_v = 0;
      const int B = static_cast<int>(shard.size());
      for (int step = 0; step < rep.max_len; ++step) {
        Tensor<T> old_lp(B, 1), adv(B, 1), ret(B, 1), old_v(B, 1), w(B, 1);
        for (int b = 0; b < B; ++b) {
          if (!rep.valid[b][step]) continue;
          const Segment& s = shard[b];
          const auto& rec = buf.env_seqs[s.env][s.start + step];
          old_lp(b, 0) = static_cast<T>(rec.log_prob);
          adv(b, 0) = static_cast<T>(gae.adv[s.env][s.start + step]);
          ret(b, 0) = static_cast<T>(gae.ret[s.env][s.start + step]);
          old_v(b, 0) = static_cast<T>(rec.value);
          w(b, 0) = static_cast<T>(1.0 / n_valid);
        }

        NodeId ratio = t.exp_(t.sub(rep.log_prob[step], t.leaf(old_lp)));
        NodeId adv_leaf = t.leaf(adv);
        NodeId surr1 = t.mul(ratio, adv_leaf);
        NodeId surr2 = t.mul(
            t.clamp_const(ratio, static_cast<T>(1.0 - cfg.clip),
                          static_cast<T>(1.0 + cfg.clip)),
            adv_leaf);
        NodeId policy_term =
            t.scale(t.weighted_sum(t.min_(surr1, surr2), w), T(-1));
        loss_terms.push_back(policy_term);
        policy_loss_v += static_cast<double>(t.value(policy_term)[0]);

        NodeId v = rep.value[step];
        NodeId ret_leaf = t.leaf(ret);
        NodeId v_clip = t.add(t.clamp_const(t.sub(v, t.leaf(old_v)),
                                            static_cast<T>(-cfg.clip),
                                            static_cast<T>(cfg.clip)),
                              t.leaf(old_v));
        NodeId l_unclipped = t.square(t.sub(v, ret_leaf));
        NodeId l_clipped = t.square(t.sub(v_clip, ret_leaf));
        // elementwise max via -min(-a, -b)
        NodeId l_max = t.scale(
            t.min_(t.scale(l_unclipped, T(-1)), t.scale(l_clipped, T(-1))), T(-1));
        NodeId value_term = t.scale(t.weighted_sum(l_max, w),
                                    static_cast<T>(0.5 * cfg.value_coef));
        loss_terms.push_back(value_term);

        // Raw (un-weighted-by-coef) value loss for reporting.
        {
          const Tensor<T>& lm = t.value(l_max);
          const Tensor<T>& wv = w;
          double s = 0;
          for (int b = 0; b < B; ++b) s += static_cast<double>(lm(b, 0) * wv(b, 0));
          value_loss_v += 0.5 * s;
        }

        if (!rep.cat_ent.empty()) {
          NodeId ent_term = t.scale(t.weighted_sum(rep.cat_ent[step], w),
                                    static_cast<T>(-cfg.entropy_coef));
          loss_terms.push_back(ent_term);
          entropy_v += -static_cast<double>(t.value(ent_term)[0]) / cfg.entropy_coef;
        }

        // Diagnostics from plain values.
        const Tensor<T>& rv = t.value(ratio);
        for (int b = 0; b < B; ++b) {
          if (!rep.valid[b][step]) continue;
          double r = static_cast<double>(rv(b, 0));
          if (std::abs(r - 1.0) > cfg.clip) clip_hits += 1;
          kl_sum += static_cast<double>(old_lp(b, 0)) -
                    static_cast<double>(t.value(rep.log_prob[step])(b, 0));
        }
      }
      if (rep.gauss_ent >= 0) {
        loss_terms.push_back(
            t.scale(rep.gauss_ent, static_cast<T>(-cfg.entropy_coef)));
        entropy_v += static_cast<double>(t.value(rep.gauss_ent)[0]);
      }

      NodeId loss = loss_terms[0];
      for (size_t i = 1; i < loss_terms.size(); ++i) loss = t.add(loss, loss_terms[i]);
      double loss_v = static_cast<double>(t.value(loss)[0]);
      if (!std::isfinite(loss_v))
        throw UsageError("ppo_update: non-finite loss at update " +
                         std::to_string(update_index) + ", epoch " +
                         std::to_string(epoch) + ", minibatch " + std::to_string(mb));

      net.zero_grad();
      t.backward(loss);
      auto params = net.parameters();
      double gn = nn::clip_grad_norm(params, cfg.max_grad_norm);
      opt.step(lr);

      stats.policy_loss += policy_loss_v;
      stats.value_loss += value_loss_v;
      stats.entropy += entropy_v;
      stats.clip_fraction += clip_hits / n_valid;
      stats.approx_kl += kl_sum / n_valid;
      stats.grad_norm += gn;
      ++n_batches;
    }
  }
  if (n_batches > 0) {
    stats.policy_loss /= n_batches;
    stats.value_loss /= n_batches;
    stats.entropy /= n_batches;
    stats.clip_fraction /= n_batches;
    stats.approx_kl /= n_batches;
    stats.grad_norm /= n_batches;
  }
  return stats;
}

}  // namespace hrl4in::ppo
