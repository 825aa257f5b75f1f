#include "hrl4in/harness/eval.hpp"

namespace hrl4in::harness {

namespace {

using nn::Tensor;

// Shared episode loop: `act` maps the current state/obs to a ToyAction.
template <typename ActFn, typename OnReset>
EvalReport run_episodes(std::shared_ptr<const env::GridLayout> layout, int n_episodes,
                        uint64_t seed, ActFn&& act, OnReset&& on_reset) {
  if (n_episodes < 1) throw UsageError("evaluate: n_episodes must be >= 1");
  EvalReport rep;
  rep.episodes = n_episodes;
  double sum_len = 0, sum_rew = 0, sum_energy = 0, sum_ratio = 0;
  int successes = 0;
  for (int i = 0; i < n_episodes; ++i) {
    auto r = env::reset(layout, derive_seed(seed, "eval/" + std::to_string(i)));
    EvalEpisode ep;
    auto opt = env::optimal_steps(*layout, r.state.pose);
    if (!opt) throw ConfigError("evaluate: start pose cannot reach the goal");
    ep.optimal = *opt;
    on_reset();
    env::EnvState state = std::move(r.state);
    env::Observation obs = std::move(r.obs);
    while (!state.done) {
      env::ToyAction a = act(state, obs);
      auto sr = env::step(state, a);
      ep.reward += sr.reward.total();
      ep.energy += sr.reward.r_energy;
      if (sr.done && sr.reward.r_success) ep.success = true;
      state = std::move(sr.state);
      obs = std::move(sr.obs);
    }
    ep.length = state.steps_elapsed;
    ep.length_ratio = ep.optimal > 0 ? static_cast<double>(ep.length) / ep.optimal : 1.0;
    sum_len += ep.length;
    sum_rew += ep.reward;
    sum_energy += ep.energy;
    sum_ratio += ep.length_ratio;
    if (ep.success) ++successes;
    rep.per_episode.push_back(ep);
  }
  rep.success_rate = static_cast<double>(successes) / n_episodes;
  rep.mean_length = sum_len / n_episodes;
  rep.mean_reward = sum_rew / n_episodes;
  rep.mean_energy = sum_energy / n_episodes;
  rep.mean_length_ratio = sum_ratio / n_episodes;
  return rep;
}

int pick_action(const Tensor<float>& logits, bool deterministic, std::mt19937_64& rng) {
  return deterministic ? nn::CategoricalHead<float>::mode_row(logits, 0)
                       : nn::CategoricalHead<float>::sample_row(logits, 0, rng);
}

}  // namespace

EvalReport evaluate_flat(Net& policy, std::shared_ptr<const env::GridLayout> layout,
                         int n_episodes, uint64_t seed, bool deterministic) {
  std::mt19937_64 rng(derive_seed(seed, "eval_act"));
  Tensor<float> h;
  auto act = [&](const env::EnvState&, const env::Observation& obs) {
    nn::Tape<float> t;
    auto f = policy.forward(
        t, t.leaf(Tensor<float>(1, policy.cfg.map_dim(), encode_map<float>(obs))),
        t.leaf(Tensor<float>(1, kFlatVecDim, encode_flat_vec<float>(obs, *layout))),
        t.leaf(h));
    h = t.value(f.hidden);
    return env::joint_action_from_index(pick_action(t.value(f.cat_logits), deterministic, rng));
  };
  auto on_reset = [&] { h = Tensor<float>(1, policy.cfg.hidden); };
  return run_episodes(layout, n_episodes, seed, act, on_reset);
}

EvalReport evaluate_hrl(Net& hl, Net& ll, const hrl::HrlConfig& cfg,
                        std::shared_ptr<const env::GridLayout> layout, int n_episodes,
                        uint64_t seed, bool deterministic) {
  std::mt19937_64 rng(derive_seed(seed, "eval_act"));
  Tensor<float> hl_h, ll_h;
  hrl::SubgoalTracker tracker;
  bool needs_decision = true;
  std::vector<HlDecision> decisions;
  std::array<double, hrl::kNumEmbodiments> emb_counts = {0, 0, 0};

  auto act = [&](const env::EnvState& state, const env::Observation& obs) {
    auto x = env::mutable_obs(state);
    if (needs_decision) {
      nn::Tape<float> t;
      auto f = hl.forward(
          t, t.leaf(Tensor<float>(1, hl.cfg.map_dim(), encode_map<float>(obs))),
          t.leaf(Tensor<float>(1, kFlatVecDim, encode_flat_vec<float>(obs, *layout))),
          t.leaf(hl_h));
      hl_h = t.value(f.hidden);
      hrl::Embodiment emb = hrl::Embodiment::BaseArm;
      if (hl.cat)
        emb = static_cast<hrl::Embodiment>(
            pick_action(t.value(f.cat_logits), deterministic, rng));
      Tensor<float> sample =
          deterministic ? t.value(f.gauss_mean)
                        : nn::GaussianHead<float>::sample(t.value(f.gauss_mean),
                                                          hl.gauss->std_values(), rng);
      auto bounds = hrl::subgoal_bounds(layout->k, layout->door_max);
      std::array<double, 4> raw{};
      for (int i = 0; i < 4; ++i) raw[i] = static_cast<double>(sample[i]);
      auto g = hrl::quantize_subgoal(raw, bounds);
      tracker.active = true;
      for (int i = 0; i < 4; ++i) tracker.target[i] = x[i] + g[i];
      tracker.masks = hrl::get_masks(emb);
      tracker.embodiment = emb;
      tracker.steps_used = 0;
      needs_decision = false;
      // Each subgoal segment is an LL episode: fresh recurrent state.
      ll_h = Tensor<float>(1, ll.cfg.hidden);
      decisions.push_back({{state.pose.x, state.pose.y}, emb});
      emb_counts[static_cast<int>(emb)] += 1.0;
    }
    auto rel = hrl::retarget_subgoal(tracker.target, x);
    nn::Tape<float> t;
    auto f = ll.forward(
        t, t.leaf(Tensor<float>(1, ll.cfg.map_dim(), encode_map<float>(obs))),
        t.leaf(Tensor<float>(1, ll.cfg.vec_dim,
                             encode_ll_vec<float>(obs, *layout, rel, tracker.masks,
                                                  tracker.embodiment))),
        t.leaf(ll_h));
    ll_h = t.value(f.hidden);
    env::ToyAction a = hrl::apply_action_mask(
        env::joint_action_from_index(pick_action(t.value(f.cat_logits), deterministic, rng)),
        tracker.masks);
    ++tracker.steps_used;
    return a;
  };
  // The achievement/timeout check runs on the post-step state; the episode
  // loop only hands us pre-step states, so evaluate it lazily here instead.
  auto act_with_bookkeeping = [&](const env::EnvState& state, const env::Observation& obs) {
    if (!needs_decision && tracker.active) {
      double d = hrl::subgoal_distance(env::mutable_obs(state), tracker.target,
                                       tracker.masks.subgoal);
      if (hrl::subgoal_achieved(d) || tracker.steps_used >= cfg.T) needs_decision = true;
    }
    return act(state, obs);
  };
  auto on_reset = [&] {
    hl_h = Tensor<float>(1, hl.cfg.hidden);
    ll_h = Tensor<float>(1, ll.cfg.hidden);
    tracker = hrl::SubgoalTracker{};
    needs_decision = true;
  };
  EvalReport rep = run_episodes(layout, n_episodes, seed, act_with_bookkeeping, on_reset);
  rep.hl_decisions = std::move(decisions);
  double total = emb_counts[0] + emb_counts[1] + emb_counts[2];
  if (total > 0)
    for (int i = 0; i < hrl::kNumEmbodiments; ++i)
      rep.embodiment_fractions[i] = emb_counts[i] / total;
  return rep;
}

EvalReport evaluate_scripted_oracle(std::shared_ptr<const env::GridLayout> layout,
                                    int n_episodes, uint64_t seed) {
  auto act = [&](const env::EnvState& state, const env::Observation&) {
    auto a = env::optimal_action(*layout, state.pose, state.door);
    if (!a) throw ConfigError("scripted oracle: no action available");
    return *a;
  };
  return run_episodes(layout, n_episodes, seed, act, [] {});
}

EvalReport evaluate_random(std::shared_ptr<const env::GridLayout> layout, int n_episodes,
                           uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, "eval_act"));
  auto act = [&](const env::EnvState&, const env::Observation&) {
    return env::joint_action_from_index(
        static_cast<int>(rng() % env::kNumJointActions));
  };
  return run_episodes(layout, n_episodes, seed, act, [] {});
}

}  // namespace hrl4in::harness
