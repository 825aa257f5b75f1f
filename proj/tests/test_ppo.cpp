#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hrl4in/ppo/ppo.hpp"

using namespace hrl4in;
using nn::Tensor;

namespace {

// Reference advantage: brute-force double loop over the exponentially
// weighted k-step errors, independent of the recursive implementation.
std::vector<double> gae_bruteforce(const std::vector<double>& r,
                                   const std::vector<double>& v,
                                   const std::vector<char>& done, double bootstrap,
                                   double gamma, double tau) {
  int n = static_cast<int>(r.size());
  auto value_at = [&](int t) { return t < n ? v[t] : bootstrap; };
  std::vector<double> delta(n);
  for (int t = 0; t < n; ++t)
    delta[t] = r[t] + (done[t] ? 0.0 : gamma * value_at(t + 1)) - v[t];
  std::vector<double> adv(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double w = 1.0;
    for (int k = t; k < n; ++k) {
      adv[t] += w * delta[k];
      if (done[k]) break;
      w *= gamma * tau;
    }
  }
  return adv;
}

ppo::NetConfig tiny_config(int cat_n, int gauss_d) {
  ppo::NetConfig cfg;
  cfg.map_channels = 1;
  cfg.map_hw = 3;
  cfg.conv_channels = {2};
  cfg.conv_kernel = 2;
  cfg.conv_fc = 4;
  cfg.vec_dim = 2;
  cfg.vec_fc = 3;
  cfg.hidden = 6;
  cfg.categorical_n = cat_n;
  cfg.gaussian_dim = gauss_d;
  if (gauss_d > 0) {
    cfg.gaussian_init_std.assign(gauss_d, 0.5);
    cfg.gaussian_min_std.assign(gauss_d, 0.1);
  }
  return cfg;
}

// Collect a rollout by acting with the net on random observations; episode
// boundaries are injected at fixed points. Returns the buffer plus bootstrap
// values, exactly as a training loop would produce them.
template <typename T>
std::pair<ppo::RolloutBuffer<T>, std::vector<double>> collect_random_rollout(
    ppo::ActorCritic<T>& net, int num_envs, int steps, std::mt19937_64& rng) {
  ppo::RolloutBuffer<T> buf(num_envs);
  std::vector<double> bootstrap(num_envs, 0.0);
  std::normal_distribution<double> obs_dist(0.0, 1.0);
  std::uniform_real_distribution<double> rew(-1.0, 1.0);

  auto rand_vec = [&](int n) {
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(obs_dist(rng));
    return v;
  };

  for (int e = 0; e < num_envs; ++e) {
    Tensor<T> h(1, net.cfg.hidden);
    for (int s = 0; s < steps; ++s) {
      ppo::StepRecord<T> rec;
      rec.map_obs = rand_vec(net.cfg.map_dim());
      rec.vec_obs = rand_vec(net.cfg.vec_dim);
      rec.hidden = h.v;

      nn::Tape<T> t;
      Tensor<T> mo(1, net.cfg.map_dim(), rec.map_obs);
      Tensor<T> vo(1, net.cfg.vec_dim, rec.vec_obs);
      auto f = net.forward(t, t.leaf(mo), t.leaf(vo), t.leaf(h));
      rec.value = static_cast<double>(t.value(f.value)[0]);

      double lp = 0.0;
      if (net.cat) {
        rec.cat_action = nn::CategoricalHead<T>::sample_row(t.value(f.cat_logits), 0, rng);
        lp += static_cast<double>(
            t.value(net.cat->log_prob(t, f.cat_logits, {rec.cat_action}))[0]);
      }
      if (net.gauss) {
        Tensor<T> sample = nn::GaussianHead<T>::sample(t.value(f.gauss_mean),
                                                       net.gauss->std_values(), rng);
        rec.gauss_sample = sample.v;
        lp += static_cast<double>(t.value(net.gauss->log_prob(t, f.gauss_mean, sample))[0]);
      }
      rec.log_prob = lp;
      rec.reward = rew(rng);
      rec.done = ((s + 1) % 7 == 0);  // fixed episode boundaries
      buf.env_seqs[e].push_back(std::move(rec));

      h = t.value(f.hidden);
      if (buf.env_seqs[e].back().done)
        h = Tensor<T>(1, net.cfg.hidden);  // reset across episodes
    }
    // bootstrap from the state after the last step
    nn::Tape<T> t;
    Tensor<T> mo(1, net.cfg.map_dim(), rand_vec(net.cfg.map_dim()));
    Tensor<T> vo(1, net.cfg.vec_dim, rand_vec(net.cfg.vec_dim));
    auto f = net.forward(t, t.leaf(mo), t.leaf(vo), t.leaf(h));
    bootstrap[e] = static_cast<double>(t.value(f.value)[0]);
  }
  return {std::move(buf), std::move(bootstrap)};
}

}  // namespace

TEST_CASE("gae: recursive form matches brute-force k-step expansion") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution d(0.15);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 1 + static_cast<int>(rng() % 40);
    ppo::RolloutBuffer<float> buf(1);
    std::vector<double> r(n), v(n);
    std::vector<char> done(n);
    for (int t = 0; t < n; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
      done[t] = d(rng);
      ppo::StepRecord<float> rec;
      rec.reward = r[t];
      rec.value = v[t];
      rec.done = done[t];
      buf.env_seqs[0].push_back(rec);
    }
    double bootstrap = u(rng);
    double gamma = 0.99, tau = 0.95;
    auto gae = ppo::compute_gae(buf, {bootstrap}, gamma, tau);
    auto expect = gae_bruteforce(r, v, done, bootstrap, gamma, tau);
    for (int t = 0; t < n; ++t) {
      CHECK(gae.adv[0][t] == doctest::Approx(expect[t]).epsilon(1e-10));
      CHECK(gae.ret[0][t] == doctest::Approx(expect[t] + v[t]).epsilon(1e-10));
    }
  }
}

TEST_CASE("gae: tau=1 gives discounted-return residual, tau=0 gives one-step TD") {
  ppo::RolloutBuffer<float> buf(1);
  std::vector<double> r{1.0, -0.5, 2.0, 0.25};
  std::vector<double> v{0.3, -0.1, 0.7, 0.2};
  for (int t = 0; t < 4; ++t) {
    ppo::StepRecord<float> rec;
    rec.reward = r[t];
    rec.value = v[t];
    rec.done = (t == 3);
    buf.env_seqs[0].push_back(rec);
  }
  double gamma = 0.9;

  auto mc = ppo::compute_gae(buf, {0.0}, gamma, 1.0);
  for (int t = 0; t < 4; ++t) {
    double ret = 0.0, g = 1.0;
    for (int k = t; k < 4; ++k) {
      ret += g * r[k];
      g *= gamma;
    }
    CHECK(mc.adv[0][t] == doctest::Approx(ret - v[t]).epsilon(1e-12));
  }

  auto td = ppo::compute_gae(buf, {0.0}, gamma, 0.0);
  for (int t = 0; t < 4; ++t) {
    double next_v = (t == 3) ? 0.0 : gamma * v[t + 1];
    CHECK(td.adv[0][t] == doctest::Approx(r[t] + next_v - v[t]).epsilon(1e-12));
  }
}

TEST_CASE("lr schedule: linear decay to zero") {
  ppo::PpoConfig cfg;
  cfg.lr = 1e-3;
  cfg.total_updates = 100;
  CHECK(ppo::lr_schedule(cfg, 0) == doctest::Approx(1e-3));
  CHECK(ppo::lr_schedule(cfg, 50) == doctest::Approx(5e-4));
  CHECK(ppo::lr_schedule(cfg, 99) == doctest::Approx(1e-5));
  cfg.linear_lr_decay = false;
  CHECK(ppo::lr_schedule(cfg, 99) == doctest::Approx(1e-3));
}

TEST_CASE("replay: recomputed log-probs and values match behavior values") {
  std::mt19937_64 rng(7);
  for (auto [cat_n, gauss_d] : {std::pair{4, 0}, std::pair{0, 3}, std::pair{3, 2}}) {
    ppo::ActorCritic<double> net(tiny_config(cat_n, gauss_d), 11);
    auto [buf, bootstrap] = collect_random_rollout(net, 2, 20, rng);
    auto eval = ppo::evaluate_actions(net, buf);
    for (size_t e = 0; e < buf.env_seqs.size(); ++e) {
      REQUIRE(eval[e].size() == buf.env_seqs[e].size());
      for (size_t s = 0; s < eval[e].size(); ++s) {
        CHECK(eval[e][s].first ==
              doctest::Approx(buf.env_seqs[e][s].log_prob).epsilon(1e-5));
        CHECK(eval[e][s].second ==
              doctest::Approx(buf.env_seqs[e][s].value).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("replay: segmented replay equals full-sequence replay") {
  // Chopping sequences into segments must not change the recomputed values,
  // because segment-start hidden states are stored in the buffer.
  std::mt19937_64 rng(19);
  ppo::ActorCritic<double> net(tiny_config(3, 0), 23);
  auto [buf, bootstrap] = collect_random_rollout(net, 1, 21, rng);

  std::vector<ppo::Segment> full{{0, 0, 21}};
  std::vector<ppo::Segment> segs{{0, 0, 8}, {0, 8, 8}, {0, 16, 5}};
  nn::Tape<double> t1, t2;
  auto r1 = ppo::detail::replay_segments(net, t1, buf, full);
  auto r2 = ppo::detail::replay_segments(net, t2, buf, segs);
  for (int s = 0; s < 21; ++s) {
    double lp_full = t1.value(r1.log_prob[s])(0, 0);
    int seg = s / 8, off = s % 8;
    double lp_seg = t2.value(r2.log_prob[off])(seg, 0);
    CHECK(lp_full == doctest::Approx(lp_seg).epsilon(1e-9));
  }
}

TEST_CASE("ppo_update: runs, produces finite stats, and changes parameters") {
  std::mt19937_64 rng(5);
  ppo::ActorCritic<float> net(tiny_config(3, 2), 31);
  auto [buf, bootstrap] = collect_random_rollout(net, 2, 30, rng);

  std::vector<float> before;
  for (auto* p : net.parameters())
    before.insert(before.end(), p->value.v.begin(), p->value.v.end());

  nn::Adam<float> opt(net.parameters());
  ppo::PpoConfig cfg;
  cfg.lr = 1e-3;
  cfg.seg_len = 8;
  cfg.minibatches = 4;
  cfg.total_updates = 10;
  auto stats = ppo::ppo_update(net, opt, buf, bootstrap, cfg, 0, rng);

  CHECK(std::isfinite(stats.policy_loss));
  CHECK(std::isfinite(stats.value_loss));
  CHECK(std::isfinite(stats.entropy));
  CHECK(stats.entropy > 0.0);
  CHECK(stats.grad_norm > 0.0);
  CHECK(stats.lr == doctest::Approx(1e-3));
  CHECK(stats.clip_fraction >= 0.0);
  CHECK(stats.clip_fraction <= 1.0);

  std::vector<float> after;
  for (auto* p : net.parameters())
    after.insert(after.end(), p->value.v.begin(), p->value.v.end());
  CHECK(before != after);
}

TEST_CASE("ppo_update: empty buffer is rejected") {
  std::mt19937_64 rng(5);
  ppo::ActorCritic<float> net(tiny_config(2, 0), 3);
  nn::Adam<float> opt(net.parameters());
  ppo::RolloutBuffer<float> buf(2);
  ppo::PpoConfig cfg;
  CHECK_THROWS_AS(ppo::ppo_update(net, opt, buf, {0.0, 0.0}, cfg, 0, rng), UsageError);
}

TEST_CASE("ppo_update: learns a two-armed bandit") {
  // One-step episodes, constant observation; arm 1 pays 1, arm 0 pays 0.
  // After a few dozen updates the policy should strongly prefer arm 1.
  std::mt19937_64 rng(17);
  ppo::ActorCritic<float> net(tiny_config(2, 0), 9);
  nn::Adam<float> opt(net.parameters());
  ppo::PpoConfig cfg;
  cfg.lr = 3e-3;
  cfg.linear_lr_decay = false;
  cfg.epochs = 4;
  cfg.minibatches = 2;
  cfg.seg_len = 8;
  cfg.entropy_coef = 0.001;

  std::vector<float> obs_map(net.cfg.map_dim(), 0.5f);
  std::vector<float> obs_vec(net.cfg.vec_dim, 0.5f);

  double final_prob = 0.0;
  for (int update = 0; update < 40; ++update) {
    ppo::RolloutBuffer<float> buf(1);
    Tensor<float> h(1, net.cfg.hidden);
    for (int s = 0; s < 64; ++s) {
      ppo::StepRecord<float> rec;
      rec.map_obs = obs_map;
      rec.vec_obs = obs_vec;
      rec.hidden = h.v;
      nn::Tape<float> t;
      auto f = net.forward(t, t.leaf(Tensor<float>(1, net.cfg.map_dim(), obs_map)),
                           t.leaf(Tensor<float>(1, net.cfg.vec_dim, obs_vec)), t.leaf(h));
      rec.cat_action = nn::CategoricalHead<float>::sample_row(t.value(f.cat_logits), 0, rng);
      rec.log_prob = static_cast<double>(
          t.value(net.cat->log_prob(t, f.cat_logits, {rec.cat_action}))[0]);
      rec.value = static_cast<double>(t.value(f.value)[0]);
      rec.reward = (rec.cat_action == 1) ? 1.0 : 0.0;
      rec.done = true;  // one-step episodes: hidden stays zero
      buf.env_seqs[0].push_back(std::move(rec));
    }
    ppo::ppo_update(net, opt, buf, {0.0}, cfg, update, rng);

    nn::Tape<float> t;
    auto f = net.forward(t, t.leaf(Tensor<float>(1, net.cfg.map_dim(), obs_map)),
                         t.leaf(Tensor<float>(1, net.cfg.vec_dim, obs_vec)),
                         t.leaf(Tensor<float>(1, net.cfg.hidden)));
    auto lp = net.cat->log_prob(t, f.cat_logits, {1});
    final_prob = std::exp(static_cast<double>(t.value(lp)[0]));
  }
  CHECK(final_prob > 0.9);
}

TEST_CASE("reward normalizer: scales iid rewards by the running return std") {
  // gamma=0 makes the discounted return equal the reward itself, so the
  // normalizer converges to dividing by the reward's std.
  ppo::RewardNormalizer rn(1, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 25.0);
  double last = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double r = dist(rng);
    last = rn.normalize(0, r, false) / (r == 0.0 ? 1.0 : r);  // 1/std estimate
  }
  CHECK(last == doctest::Approx(1.0 / 25.0).epsilon(0.05));
}

TEST_CASE("reward normalizer: scale invariance and clipping") {
  ppo::RewardNormalizer a(1, 0.99), b(1, 0.99);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double max_abs = 0.0;
  for (int i = 0; i < 5000; ++i) {
    double r = dist(rng);
    bool done = (i % 7 == 6);
    double na = a.normalize(0, r, done);
    double nb = b.normalize(0, 1000.0 * r, done);
    if (i > 10) CHECK(na == doctest::Approx(nb).epsilon(1e-9));
    max_abs = std::max(max_abs, std::abs(nb));
  }
  CHECK(max_abs <= 10.0);
}

TEST_CASE("reward normalizer: state round trip") {
  ppo::RewardNormalizer a(2, 0.99);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    a.normalize(0, dist(rng), i % 11 == 0);
    a.normalize(1, dist(rng), i % 13 == 0);
  }
  ppo::RewardNormalizer b(2, 0.99);
  b.restore(a.state());
  for (int i = 0; i < 50; ++i) {
    double r = dist(rng);
    CHECK(a.normalize(0, r, false) == b.normalize(0, r, false));
  }
  CHECK_THROWS_AS(b.restore(std::vector<double>(2)), hrl4in::UsageError);
}
