#include <cmath>
#include <random>
#include <sstream>

#include "acceptance_util.hpp"
#include "hrl4in/ppo/ppo.hpp"

using namespace hrl4in;
using nn::Tensor;

namespace {

using Net = ppo::ActorCritic<double>;

ppo::NetConfig tiny_cfg() {
  ppo::NetConfig cfg;
  cfg.map_channels = 2;
  cfg.map_hw = 5;
  cfg.conv_channels = {3, 3};
  cfg.conv_kernel = 2;
  cfg.conv_fc = 6;
  cfg.vec_dim = 3;
  cfg.vec_fc = 4;
  cfg.hidden = 8;
  cfg.categorical_n = 5;
  cfg.gaussian_dim = 2;
  cfg.gaussian_init_std = {0.4, 0.7};
  cfg.gaussian_min_std = {0.05, 0.05};
  return cfg;
}

Tensor<double> random_tensor(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor<double> t(rows, cols);
  for (auto& v : t.v) v = u(rng);
  return t;
}

// Scalar loss touching every layer and both heads: a two-step recurrent
// unroll of value + categorical log-prob + Gaussian log-prob + entropies.
double net_loss(Net& net, const Tensor<double>& map1, const Tensor<double>& vec1,
                const Tensor<double>& map2, const Tensor<double>& vec2,
                const Tensor<double>& gauss_sample, nn::Tape<double>* grad_tape) {
  nn::Tape<double> local;
  nn::Tape<double>& t = grad_tape ? *grad_tape : local;
  auto f1 = net.forward(t, t.leaf(map1), t.leaf(vec1), t.leaf(net.initial_hidden(1)));
  auto f2 = net.forward(t, t.leaf(map2), t.leaf(vec2), f1.hidden);
  nn::NodeId loss = t.add(t.sum_all(f1.value), t.sum_all(f2.value));
  loss = t.add(loss, t.sum_all(net.cat->log_prob(t, f2.cat_logits, {2})));
  loss = t.add(loss, t.sum_all(net.cat->entropy(t, f1.cat_logits)));
  loss = t.add(loss, t.sum_all(net.gauss->log_prob(t, f2.gauss_mean, gauss_sample)));
  loss = t.add(loss, t.sum_all(net.gauss->entropy(t)));
  double out = t.value(loss)[0];
  if (grad_tape) grad_tape->backward(loss);
  return out;
}

}  // namespace

int run_numerics() {
  Criterion c(3, "autodiff and estimator numerics");
  std::mt19937_64 rng(123);

  // Central finite differences vs reverse-mode gradients, every parameter of
  // every layer and head, 64-bit.
  Net net(tiny_cfg(), 42);
  auto map1 = random_tensor(1, net.cfg.map_dim(), rng);
  auto map2 = random_tensor(1, net.cfg.map_dim(), rng);
  auto vec1 = random_tensor(1, 3, rng);
  auto vec2 = random_tensor(1, 3, rng);
  auto sample = random_tensor(1, 2, rng);

  net.zero_grad();
  {
    nn::Tape<double> t;
    net_loss(net, map1, vec1, map2, vec2, sample, &t);
  }
  double max_err = 0.0;
  int checked = 0;
  const double h = 1e-5;
  for (auto* p : net.parameters()) {
    for (size_t i = 0; i < p->value.v.size(); ++i) {
      double keep = p->value.v[i];
      p->value.v[i] = keep + h;
      double up = net_loss(net, map1, vec1, map2, vec2, sample, nullptr);
      p->value.v[i] = keep - h;
      double down = net_loss(net, map1, vec1, map2, vec2, sample, nullptr);
      p->value.v[i] = keep;
      double fd = (up - down) / (2 * h);
      double an = p->grad.v[i];
      double err = std::abs(fd - an) /
                   std::max({std::abs(fd), std::abs(an), 1e-4});
      max_err = std::max(max_err, err);
      ++checked;
    }
  }
  {
    std::ostringstream os;
    os << "gradient elements checked: " << checked << ", max relative error: " << max_err;
    c.note(os.str());
  }
  c.check(max_err < 1e-4, "all layer/head gradients match finite differences");

  // GAE vs the brute-force double sum on 100 random single-env rollouts.
  double max_gae_err = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 3 + static_cast<int>(rng() % 20);
    double gamma = 0.8 + 0.19 * prob(rng);
    double tau = prob(rng);
    std::vector<double> rew(n), val(n);
    std::vector<bool> done(n);
    for (int i = 0; i < n; ++i) {
      rew[i] = u(rng);
      val[i] = u(rng);
      done[i] = prob(rng) < 0.2;
    }
    double bootstrap = u(rng);

    ppo::RolloutBuffer<float> buf;
    buf.env_seqs.resize(1);
    for (int i = 0; i < n; ++i) {
      ppo::StepRecord<float> r;
      r.value = static_cast<float>(val[i]);
      r.reward = static_cast<float>(rew[i]);
      r.done = done[i];
      buf.env_seqs[0].push_back(std::move(r));
    }
    auto res = ppo::compute_gae(buf, {bootstrap}, gamma, tau);

    // Brute force: A_t = sum_l (gamma*tau)^l * delta_{t+l} within the episode.
    for (int t = 0; t < n; ++t) {
      double acc = 0.0, w = 1.0;
      for (int l = t; l < n; ++l) {
        double next_v = done[l] ? 0.0 : (l + 1 < n ? val[l + 1] : bootstrap);
        acc += w * (rew[l] + gamma * next_v - val[l]);
        if (done[l]) break;
        w *= gamma * tau;
      }
      max_gae_err = std::max(
          max_gae_err, std::abs(acc - static_cast<double>(res.adv[0][t])));
    }
  }
  {
    std::ostringstream os;
    os << "max GAE deviation from the double-sum oracle: " << max_gae_err;
    c.note(os.str());
  }
  c.check(max_gae_err < 1e-6, "GAE matches brute force within 1e-6 on 100 rollouts");

  // Closed-form distribution identities, 64-bit, within 1e-9.
  {
    nn::Tape<double> t;
    nn::CategoricalHead<double> head;
    head.n = 3;
    nn::NodeId logits = t.leaf(Tensor<double>(1, 3, {0.7, 0.7, 0.7}));
    double ent = t.value(head.entropy(t, logits))[0];
    c.check(std::abs(ent - std::log(3.0)) < 1e-9, "uniform-3 entropy = log 3");
    double lp = t.value(head.log_prob(t, logits, {1}))[0];
    c.check(std::abs(lp - std::log(1.0 / 3.0)) < 1e-9, "uniform-3 log-prob = -log 3");
  }
  {
    std::mt19937_64 r2(7);
    nn::GaussianHead<double> head("g", 4, 1, {1.0}, {0.01}, r2);
    nn::Tape<double> t;
    Tensor<double> mean(1, 1, {0.3});
    double lp = t.value(head.log_prob(t, t.leaf(mean), mean))[0];
    c.check(std::abs(lp + nn::kHalfLog2Pi) < 1e-9,
            "Gaussian log-prob at the mean (sigma=1) = -0.5 log 2pi");
    double ent = t.value(head.entropy(t))[0];
    c.check(std::abs(ent - (0.5 + nn::kHalfLog2Pi)) < 1e-9,
            "Gaussian entropy (sigma=1) = 0.5 + 0.5 log 2pi");
  }

  return c.finish();
}
