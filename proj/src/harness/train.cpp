#include "hrl4in/harness/trainers.hpp"

#include "hrl4in/nn/checkpoint.hpp"

namespace hrl4in::harness {

namespace {

using nn::Tensor;

ppo::NetConfig make_net_config(const TrainerOptions& opt, int vec_dim, int cat_n,
                               int gauss_d, const hrl::HrlConfig& hc) {
  ppo::NetConfig cfg;
  cfg.map_channels = 4;
  cfg.map_hw = opt.layout->k;
  cfg.conv_channels = opt.conv_channels;
  cfg.conv_kernel = opt.conv_kernel;
  cfg.conv_fc = opt.conv_fc;
  cfg.vec_dim = vec_dim;
  cfg.vec_fc = opt.vec_fc;
  cfg.hidden = opt.hidden;
  cfg.categorical_n = cat_n;
  cfg.gaussian_dim = gauss_d;
  if (gauss_d > 0) {
    cfg.gaussian_init_std.assign(hc.subgoal_init_std.begin(), hc.subgoal_init_std.end());
    cfg.gaussian_min_std.assign(hc.subgoal_min_std.begin(), hc.subgoal_min_std.end());
    cfg.gaussian_mean_gain = hc.hl_subgoal_mean_gain;
  }
  return cfg;
}

void fill_row(Tensor<float>& m, int row, const std::vector<float>& v) {
  std::copy(v.begin(), v.end(), &m.v[static_cast<size_t>(row) * m.cols]);
}

}  // namespace

// ---------------------------------------------------------------------------
// FlatTrainer

FlatTrainer::FlatTrainer(TrainerOptions opt) : opt_(std::move(opt)) {
  auto cfg = make_net_config(opt_, kFlatVecDim, env::kNumJointActions, 0, opt_.hrl);
  net_ = std::make_unique<Net>(cfg, derive_seed(opt_.seed, "net_flat"));
  adam_ = std::make_unique<nn::Adam<float>>(net_->parameters());
  act_rng_.seed(derive_seed(opt_.seed, "act"));
  ppo_rng_.seed(derive_seed(opt_.seed, "ppo"));
  slots_.resize(opt_.num_envs);
  for (int e = 0; e < opt_.num_envs; ++e) {
    slots_[e].hidden = Tensor<float>(1, opt_.hidden);
    reset_env(e);
  }
}

void FlatTrainer::reset_env(int e) {
  Slot& s = slots_[e];
  uint64_t seed = derive_seed(
      opt_.seed, "env/" + std::to_string(e) + "/" + std::to_string(s.episode_index++));
  auto r = env::reset(opt_.layout, seed);
  s.state = std::move(r.state);
  s.obs = std::move(r.obs);
  s.ep_reward = 0.0;
  s.ep_energy = 0.0;
}

CycleMetrics FlatTrainer::run_update_cycle() {
  const int N = opt_.num_envs;
  const int map_dim = net_->cfg.map_dim();
  ppo::RolloutBuffer<float> buf(N);
  CycleMetrics m;
  m.update = update_;

  double sum_reward = 0, sum_length = 0, sum_energy = 0;
  int successes = 0;

  for (int step = 0; step < opt_.rollout_steps; ++step) {
    Tensor<float> map_b(N, map_dim), vec_b(N, kFlatVecDim), h_b(N, opt_.hidden);
    std::vector<std::vector<float>> maps(N), vecs(N);
    for (int e = 0; e < N; ++e) {
      maps[e] = encode_map<float>(slots_[e].obs);
      vecs[e] = encode_flat_vec<float>(slots_[e].obs, *opt_.layout);
      fill_row(map_b, e, maps[e]);
      fill_row(vec_b, e, vecs[e]);
      std::copy(slots_[e].hidden.v.begin(), slots_[e].hidden.v.end(),
                &h_b.v[static_cast<size_t>(e) * opt_.hidden]);
    }
    nn::Tape<float> t;
    auto f = net_->forward(t, t.leaf(std::move(map_b)), t.leaf(std::move(vec_b)),
                           t.leaf(std::move(h_b)));
    const Tensor<float>& logits = t.value(f.cat_logits);
    const Tensor<float>& values = t.value(f.value);
    const Tensor<float>& new_h = t.value(f.hidden);

    for (int e = 0; e < N; ++e) {
      Slot& s = slots_[e];
      ppo::StepRecord<float> rec;
      rec.map_obs = std::move(maps[e]);
      rec.vec_obs = std::move(vecs[e]);
      rec.hidden = s.hidden.v;
      rec.cat_action = nn::CategoricalHead<float>::sample_row(logits, e, act_rng_);
      {
        nn::Tape<float> lt;
        rec.log_prob = static_cast<double>(lt.value(net_->cat->log_prob(
            lt, lt.leaf(Tensor<float>(1, logits.cols,
                                      {logits.v.begin() + e * logits.cols,
                                       logits.v.begin() + (e + 1) * logits.cols})),
            {rec.cat_action}))[0]);
      }
      rec.value = static_cast<double>(values(e, 0));

      auto sr = env::step(s.state, env::joint_action_from_index(rec.cat_action));
      rec.reward = sr.reward.total();
      rec.done = sr.done;
      s.ep_reward += sr.reward.total();
      s.ep_energy += sr.reward.r_energy;
      ++env_steps_;

      for (int c = 0; c < opt_.hidden; ++c) s.hidden.v[c] = new_h(e, c);
      if (sr.done) {
        ++m.episodes;
        sum_reward += s.ep_reward;
        sum_length += sr.state.steps_elapsed;
        sum_energy += s.ep_energy;
        if (sr.reward.r_success) ++successes;
        reset_env(e);
        s.hidden = Tensor<float>(1, opt_.hidden);
      } else {
        s.state = std::move(sr.state);
        s.obs = std::move(sr.obs);
      }
      buf.env_seqs[e].push_back(std::move(rec));
    }
  }

  // Bootstrap values for the truncated sequences.
  std::vector<double> bootstrap(N, 0.0);
  {
    Tensor<float> map_b(N, map_dim), vec_b(N, kFlatVecDim), h_b(N, opt_.hidden);
    for (int e = 0; e < N; ++e) {
      fill_row(map_b, e, encode_map<float>(slots_[e].obs));
      fill_row(vec_b, e, encode_flat_vec<float>(slots_[e].obs, *opt_.layout));
      std::copy(slots_[e].hidden.v.begin(), slots_[e].hidden.v.end(),
                &h_b.v[static_cast<size_t>(e) * opt_.hidden]);
    }
    nn::Tape<float> t;
    auto f = net_->forward(t, t.leaf(std::move(map_b)), t.leaf(std::move(vec_b)),
                           t.leaf(std::move(h_b)));
    for (int e = 0; e < N; ++e)
      bootstrap[e] = static_cast<double>(t.value(f.value)(e, 0));
  }

  m.ll_stats = ppo::ppo_update(*net_, *adam_, buf, bootstrap, opt_.ppo, update_, ppo_rng_);
  ++update_;

  m.env_steps = env_steps_;
  if (m.episodes > 0) {
    m.mean_reward = sum_reward / m.episodes;
    m.success_rate = static_cast<double>(successes) / m.episodes;
    m.mean_length = sum_length / m.episodes;
    m.mean_energy = sum_energy / m.episodes;
  }
  return m;
}

void FlatTrainer::save_checkpoint(const std::string& path) const {
  nn::Checkpoint ck;
  ck.put_params("policy/", const_cast<Net&>(*net_).parameters());
  ck.put_adam("policy/", *adam_);
  ck.put_scalar("meta/update", update_);
  ck.put_scalar("meta/env_steps", static_cast<double>(env_steps_));
  ck.put_scalar("meta/algo", 0.0);
  ck.save(path);
}

void FlatTrainer::load_checkpoint(const std::string& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  auto params = net_->parameters();
  ck.load_params("policy/", params);
  ck.load_adam("policy/", *adam_);
  update_ = static_cast<int>(ck.get_scalar("meta/update"));
  env_steps_ = static_cast<long long>(ck.get_scalar("meta/env_steps"));
}

// ---------------------------------------------------------------------------
// HrlTrainer

HrlTrainer::HrlTrainer(TrainerOptions opt)
    : opt_(std::move(opt)),
      hl_buf_(opt_.num_envs),
      ll_buf_(opt_.num_envs),
      ll_rnorm_(opt_.num_envs, opt_.hrl.gamma_ll) {
  const int ll_vec_dim = kFlatVecDim + kLlExtraDim;
  auto ll_cfg_net = make_net_config(opt_, ll_vec_dim, env::kNumJointActions, 0, opt_.hrl);
  int hl_cat = opt_.hrl.no_embodiment_selector ? 0 : hrl::kNumEmbodiments;
  auto hl_cfg_net = make_net_config(opt_, kFlatVecDim, hl_cat, 4, opt_.hrl);
  ll_ = std::make_unique<Net>(ll_cfg_net, derive_seed(opt_.seed, "net_ll"));
  hl_ = std::make_unique<Net>(hl_cfg_net, derive_seed(opt_.seed, "net_hl"));
  ll_adam_ = std::make_unique<nn::Adam<float>>(ll_->parameters());
  hl_adam_ = std::make_unique<nn::Adam<float>>(hl_->parameters());

  ll_cfg_ = opt_.ppo;
  ll_cfg_.lr = opt_.hrl.ll_lr;
  ll_cfg_.gamma = opt_.hrl.gamma_ll;
  hl_cfg_ = opt_.ppo;
  hl_cfg_.lr = opt_.hrl.hl_lr;
  hl_cfg_.gamma = opt_.hrl.gamma_hl;

  act_rng_.seed(derive_seed(opt_.seed, "act"));
  hl_ppo_rng_.seed(derive_seed(opt_.seed, "ppo_hl"));
  ll_ppo_rng_.seed(derive_seed(opt_.seed, "ppo_ll"));
  slots_.resize(opt_.num_envs);
  for (int e = 0; e < opt_.num_envs; ++e) {
    slots_[e].hl_hidden = Tensor<float>(1, opt_.hidden);
    slots_[e].ll_hidden = Tensor<float>(1, opt_.hidden);
    reset_env(e);
  }
}

void HrlTrainer::reset_env(int e) {
  Slot& s = slots_[e];
  uint64_t seed = derive_seed(
      opt_.seed, "env/" + std::to_string(e) + "/" + std::to_string(s.episode_index++));
  auto r = env::reset(opt_.layout, seed);
  s.state = std::move(r.state);
  s.obs = std::move(r.obs);
  s.ep_reward = 0.0;
  s.ep_energy = 0.0;
  s.needs_decision = true;
  s.tracker = hrl::SubgoalTracker{};
}

void HrlTrainer::decide(int e, CycleMetrics& m) {
  Slot& s = slots_[e];
  ppo::StepRecord<float> rec;
  rec.map_obs = encode_map<float>(s.obs);
  rec.vec_obs = encode_flat_vec<float>(s.obs, *opt_.layout);
  rec.hidden = s.hl_hidden.v;

  nn::Tape<float> t;
  auto f = hl_->forward(t, t.leaf(Tensor<float>(1, hl_->cfg.map_dim(), rec.map_obs)),
                        t.leaf(Tensor<float>(1, kFlatVecDim, rec.vec_obs)),
                        t.leaf(s.hl_hidden));
  rec.value = static_cast<double>(t.value(f.value)[0]);

  double log_prob = 0.0;
  hrl::Embodiment emb = hrl::Embodiment::BaseArm;
  if (hl_->cat) {
    int idx = nn::CategoricalHead<float>::sample_row(t.value(f.cat_logits), 0, act_rng_);
    emb = static_cast<hrl::Embodiment>(idx);
    rec.cat_action = idx;
    log_prob += static_cast<double>(
        t.value(hl_->cat->log_prob(t, f.cat_logits, {idx}))[0]);
  }
  Tensor<float> sample = nn::GaussianHead<float>::sample(t.value(f.gauss_mean),
                                                         hl_->gauss->std_values(), act_rng_);
  rec.gauss_sample = sample.v;
  log_prob += static_cast<double>(
      t.value(hl_->gauss->log_prob(t, f.gauss_mean, sample))[0]);
  rec.log_prob = log_prob;
  rec.reward = 0.0;  // filled when the segment closes
  rec.done = false;

  // The head emits continuous values in subgoal units; round half-away from
  // zero and clamp to the per-dimension bounds.
  auto bounds = hrl::subgoal_bounds(opt_.layout->k, opt_.layout->door_max);
  std::array<double, 4> raw{};
  for (int i = 0; i < 4; ++i) raw[i] = static_cast<double>(sample[i]);
  auto g = hrl::quantize_subgoal(raw, bounds);
  auto x = env::mutable_obs(s.state);

  s.tracker.active = true;
  for (int i = 0; i < 4; ++i) s.tracker.target[i] = x[i] + g[i];
  s.tracker.masks = hrl::get_masks(emb);
  s.tracker.embodiment = emb;
  s.tracker.steps_used = 0;
  s.tracker.extrinsic_sum = 0.0;

  s.pending_hl = std::move(rec);
  s.has_pending_hl = true;
  s.needs_decision = false;
  s.hl_hidden = t.value(f.hidden);
  // Each subgoal segment is an LL episode: fresh recurrent state per segment.
  s.ll_hidden = Tensor<float>(1, opt_.hidden);

  ++m.hl_decisions;
  m.embodiment_fractions[static_cast<int>(emb)] += 1.0;
}

void HrlTrainer::close_pending(int e, bool env_done, CycleMetrics& m) {
  Slot& s = slots_[e];
  if (!s.has_pending_hl) return;
  s.pending_hl.reward = s.tracker.extrinsic_sum;
  s.pending_hl.done = env_done;
  hl_buf_.env_seqs[e].push_back(std::move(s.pending_hl));
  s.has_pending_hl = false;
  m.hl_max_segment_steps = std::max(m.hl_max_segment_steps, s.tracker.steps_used);
}

double HrlTrainer::hl_value(int e) {
  Slot& s = slots_[e];
  nn::Tape<float> t;
  auto f = hl_->forward(
      t, t.leaf(Tensor<float>(1, hl_->cfg.map_dim(), encode_map<float>(s.obs))),
      t.leaf(Tensor<float>(1, kFlatVecDim, encode_flat_vec<float>(s.obs, *opt_.layout))),
      t.leaf(s.hl_hidden));
  return static_cast<double>(t.value(f.value)[0]);
}

CycleMetrics HrlTrainer::run_update_cycle() {
  const int N = opt_.num_envs;
  const int map_dim = ll_->cfg.map_dim();
  const int ll_vec_dim = ll_->cfg.vec_dim;
  hl_buf_.clear();
  ll_buf_.clear();
  CycleMetrics m;
  m.update = update_;

  double sum_reward = 0, sum_length = 0, sum_energy = 0;
  int successes = 0;

  for (int step = 0; step < opt_.rollout_steps; ++step) {
    for (int e = 0; e < N; ++e)
      if (slots_[e].needs_decision) decide(e, m);

    Tensor<float> map_b(N, map_dim), vec_b(N, ll_vec_dim), h_b(N, opt_.hidden);
    std::vector<std::vector<float>> maps(N), vecs(N);
    std::vector<double> d_before(N);
    for (int e = 0; e < N; ++e) {
      Slot& s = slots_[e];
      auto x = env::mutable_obs(s.state);
      d_before[e] = hrl::subgoal_distance(x, s.tracker.target, s.tracker.masks.subgoal);
      auto rel = hrl::retarget_subgoal(s.tracker.target, x);
      maps[e] = encode_map<float>(s.obs);
      vecs[e] = encode_ll_vec<float>(s.obs, *opt_.layout, rel, s.tracker.masks,
                                     s.tracker.embodiment);
      fill_row(map_b, e, maps[e]);
      fill_row(vec_b, e, vecs[e]);
      std::copy(s.ll_hidden.v.begin(), s.ll_hidden.v.end(),
                &h_b.v[static_cast<size_t>(e) * opt_.hidden]);
    }
    nn::Tape<float> t;
    auto f = ll_->forward(t, t.leaf(std::move(map_b)), t.leaf(std::move(vec_b)),
                          t.leaf(std::move(h_b)));
    const Tensor<float>& logits = t.value(f.cat_logits);
    const Tensor<float>& values = t.value(f.value);
    const Tensor<float>& new_h = t.value(f.hidden);

    for (int e = 0; e < N; ++e) {
      Slot& s = slots_[e];
      ppo::StepRecord<float> rec;
      rec.map_obs = std::move(maps[e]);
      rec.vec_obs = std::move(vecs[e]);
      rec.hidden = s.ll_hidden.v;
      rec.cat_action = nn::CategoricalHead<float>::sample_row(logits, e, act_rng_);
      {
        nn::Tape<float> lt;
        rec.log_prob = static_cast<double>(lt.value(ll_->cat->log_prob(
            lt, lt.leaf(Tensor<float>(1, logits.cols,
                                      {logits.v.begin() + e * logits.cols,
                                       logits.v.begin() + (e + 1) * logits.cols})),
            {rec.cat_action}))[0]);
      }
      rec.value = static_cast<double>(values(e, 0));

      env::ToyAction a = hrl::apply_action_mask(
          env::joint_action_from_index(rec.cat_action), s.tracker.masks);
      auto sr = env::step(s.state, a);
      double d_after = hrl::subgoal_distance(env::mutable_obs(sr.state), s.tracker.target,
                                             s.tracker.masks.subgoal);
      double intrinsic =
          hrl::intrinsic_reward(d_before[e], d_after, opt_.hrl.intrinsic_reward_scale);
      ++env_steps_;

      ++s.tracker.steps_used;
      // The LL's episode is one subgoal segment: closing it (achievement,
      // timeout, or env termination) is terminal for LL credit assignment.
      bool seg_achieved = hrl::subgoal_achieved(d_after);
      bool seg_timeout = s.tracker.steps_used >= opt_.hrl.T;
      rec.done = sr.done || seg_achieved || seg_timeout;
      rec.reward = opt_.hrl.ll_reward_normalization
                       ? ll_rnorm_.normalize(e, intrinsic, rec.done)
                       : intrinsic;
      s.tracker.extrinsic_sum += sr.reward.total();
      s.ep_reward += sr.reward.total();
      s.ep_energy += sr.reward.r_energy;

      for (int c = 0; c < opt_.hidden; ++c) s.ll_hidden.v[c] = new_h(e, c);

      if (sr.done) {
        ++m.episodes;
        sum_reward += s.ep_reward;
        sum_length += sr.state.steps_elapsed;
        sum_energy += s.ep_energy;
        if (sr.reward.r_success) ++successes;
        close_pending(e, true, m);
        reset_env(e);
        s.hl_hidden = Tensor<float>(1, opt_.hidden);
        s.ll_hidden = Tensor<float>(1, opt_.hidden);
      } else {
        s.state = std::move(sr.state);
        s.obs = std::move(sr.obs);
        if (seg_achieved || seg_timeout) {
          close_pending(e, false, m);
          s.needs_decision = true;
          if (seg_achieved)
            ++m.hl_achieved;
          else
            ++m.hl_timeouts;
        }
      }
      ll_buf_.env_seqs[e].push_back(std::move(rec));
    }
  }

  // Bootstraps and force-close of still-pending HL segments at truncation.
  std::vector<double> ll_bootstrap(N, 0.0), hl_bootstrap(N, 0.0);
  {
    Tensor<float> map_b(N, map_dim), vec_b(N, ll_vec_dim), h_b(N, opt_.hidden);
    for (int e = 0; e < N; ++e) {
      Slot& s = slots_[e];
      auto x = env::mutable_obs(s.state);
      auto rel = hrl::retarget_subgoal(s.tracker.target, x);
      fill_row(map_b, e, encode_map<float>(s.obs));
      fill_row(vec_b, e,
               encode_ll_vec<float>(s.obs, *opt_.layout, rel, s.tracker.masks,
                                    s.tracker.embodiment));
      std::copy(s.ll_hidden.v.begin(), s.ll_hidden.v.end(),
                &h_b.v[static_cast<size_t>(e) * opt_.hidden]);
    }
    nn::Tape<float> t;
    auto f = ll_->forward(t, t.leaf(std::move(map_b)), t.leaf(std::move(vec_b)),
                          t.leaf(std::move(h_b)));
    for (int e = 0; e < N; ++e)
      ll_bootstrap[e] = static_cast<double>(t.value(f.value)(e, 0));
  }
  for (int e = 0; e < N; ++e) {
    hl_bootstrap[e] = hl_value(e);
    if (slots_[e].has_pending_hl) {
      close_pending(e, false, m);
      slots_[e].needs_decision = true;  // fresh decision next cycle
    }
  }

  ll_cfg_.total_updates = opt_.ppo.total_updates;
  hl_cfg_.total_updates = opt_.ppo.total_updates;
  m.ll_stats =
      ppo::ppo_update(*ll_, *ll_adam_, ll_buf_, ll_bootstrap, ll_cfg_, update_, ll_ppo_rng_);
  if (update_ >= opt_.hrl.hl_freeze_updates) {
    m.hl_stats = ppo::ppo_update(*hl_, *hl_adam_, hl_buf_, hl_bootstrap, hl_cfg_, update_,
                                 hl_ppo_rng_);
    m.hl_updated = true;
  }
  ++update_;

  m.env_steps = env_steps_;
  if (m.episodes > 0) {
    m.mean_reward = sum_reward / m.episodes;
    m.success_rate = static_cast<double>(successes) / m.episodes;
    m.mean_length = sum_length / m.episodes;
    m.mean_energy = sum_energy / m.episodes;
  }
  if (m.hl_decisions > 0)
    for (auto& fr : m.embodiment_fractions) fr /= m.hl_decisions;
  return m;
}

void HrlTrainer::save_checkpoint(const std::string& path) const {
  nn::Checkpoint ck;
  ck.put_params("hl/", const_cast<Net&>(*hl_).parameters());
  ck.put_params("ll/", const_cast<Net&>(*ll_).parameters());
  ck.put_adam("hl/", *hl_adam_);
  ck.put_adam("ll/", *ll_adam_);
  ck.put_scalar("meta/update", update_);
  ck.put_scalar("meta/env_steps", static_cast<double>(env_steps_));
  ck.put_scalar("meta/algo", opt_.hrl.no_embodiment_selector ? 2.0 : 1.0);
  ck.put_scalar("meta/T", opt_.hrl.T);
  ck.put_scalar("meta/intrinsic_scale", opt_.hrl.intrinsic_reward_scale);
  {
    auto s = ll_rnorm_.state();
    Tensor<double> t(1, static_cast<int>(s.size()), s);
    ck.put("meta/ll_rnorm", t);
  }
  ck.save(path);
}

void HrlTrainer::load_checkpoint(const std::string& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  auto hp = hl_->parameters();
  auto lp = ll_->parameters();
  ck.load_params("hl/", hp);
  ck.load_params("ll/", lp);
  ck.load_adam("hl/", *hl_adam_);
  ck.load_adam("ll/", *ll_adam_);
  update_ = static_cast<int>(ck.get_scalar("meta/update"));
  env_steps_ = static_cast<long long>(ck.get_scalar("meta/env_steps"));
  if (ck.contains("meta/ll_rnorm")) {
    auto t = ck.get<double>("meta/ll_rnorm");
    ll_rnorm_.restore(t.v);
  }
}

}  // namespace hrl4in::harness
