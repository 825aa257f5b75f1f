#include <sstream>

#include "acceptance_util.hpp"
#include "hrl4in/harness/run.hpp"

using namespace hrl4in;
using namespace hrl4in::harness;

// Flat PPO on the door-free 7x7 layout: >= 95% greedy success within 1500
// update cycles for at least 2 of 3 seeds.
int main() {
  Criterion c(5, "flat PPO sanity on the door-free 7x7 layout");

  RunConfig cfg =
      RunConfig::load(acceptance_data_path("configs/flat_ppo_toy7_free.json"));
  cfg.layout_path = acceptance_data_path("layouts/toy7_free.layout");
  cfg.out_dir = "acceptance_out/flat_ppo";

  int passed = 0;
  for (uint64_t seed : cfg.seeds) {
    RunResult res = run_training(cfg, seed, cfg.out_dir);
    bool ok = res.final_eval.success_rate >= 0.95;
    std::ostringstream os;
    os << "seed " << seed << ": success " << res.final_eval.success_rate << " after "
       << res.updates_run << " updates" << (ok ? "" : " (below 0.95)");
    c.note(os.str());
    if (ok) ++passed;
    if (passed >= 2) break;  // criterion met; skip remaining seeds
  }
  c.check(passed >= 2, ">= 95% greedy success for >= 2 of 3 seeds within 1500 cycles");
  return c.finish();
}
