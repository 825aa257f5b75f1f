#include <sstream>

#include "acceptance_util.hpp"
#include "hrl4in/env/oracle.hpp"

using namespace hrl4in;
using namespace hrl4in::env;

namespace {

bool cell_walkable(const GridLayout& l, int x, int y, int door) {
  CellKind k = l.at(x, y);
  if (k == CellKind::Wall) return false;
  if (k == CellKind::Door) return door == l.door_max;
  return true;
}

}  // namespace

int run_oracle() {
  Criterion c(2, "shortest-path oracle");

  // Bellman consistency, exhaustive over the full 5x5 product state space:
  // for every reachable non-goal state, some action decreases the distance
  // by exactly one and none decreases it by more.
  auto small = acceptance_layout("toy5_door.layout");
  int states_checked = 0;
  for (int door = 1; door <= small->door_max; ++door)
    for (int y = 0; y < small->k; ++y)
      for (int x = 0; x < small->k; ++x) {
        if (!cell_walkable(*small, x, y, door)) continue;
        for (int h = 0; h < 4; ++h) {
          AgentPose pose{x, y, static_cast<Heading>(h)};
          auto d = optimal_steps(*small, pose, DoorState{door});
          if (Vec2i{x, y} == small->goal_cell) {
            c.check(d && *d == 0, "distance zero exactly at the goal");
            continue;
          }
          if (!d) continue;  // unreachable states have no Bellman condition
          ++states_checked;
          int best_next = *d;
          for (int a = 0; a < kNumJointActions; ++a) {
            AgentPose np = pose;
            DoorState nd{door};
            apply_action(*small, np, nd, joint_action_from_index(a));
            auto dn = optimal_steps(*small, np, nd);
            if (dn) best_next = std::min(best_next, *dn);
          }
          if (best_next != *d - 1)
            c.check(false, "Bellman gap at (" + std::to_string(x) + "," +
                               std::to_string(y) + ",h" + std::to_string(h) + ",door" +
                               std::to_string(door) + ")");
        }
      }
  c.check(states_checked >= 50, "exhaustive sweep covered the product space");
  c.note("Bellman-checked states: " + std::to_string(states_checked));

  // Canonical 11x11 layout: mean over all left-room start poses in 14 +/- 2.
  auto big = acceptance_layout("toy11.layout");
  double mean = mean_optimal_steps(*big);
  std::ostringstream os;
  os << "mean optimal steps on 11x11: " << mean;
  c.note(os.str());
  c.check(mean >= 12.0 && mean <= 16.0, "mean within 14 +/- 2");

  return c.finish();
}
