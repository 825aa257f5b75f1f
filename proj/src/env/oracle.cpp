#include "hrl4in/env/oracle.hpp"

#include <limits>
#include <queue>
#include <vector>

namespace hrl4in::env {

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max();

struct ProductSpace {
  const GridLayout& layout;
  int door_levels;

  explicit ProductSpace(const GridLayout& l) : layout(l), door_levels(l.door_max) {}

  int size() const { return layout.k * layout.k * 4 * door_levels; }
  int index(const AgentPose& p, const DoorState& d) const {
    return (((p.y * layout.k + p.x) * 4) + static_cast<int>(p.heading)) * door_levels +
           (d.value - 1);
  }
  void decode(int idx, AgentPose& p, DoorState& d) const {
    d.value = idx % door_levels + 1;
    idx /= door_levels;
    p.heading = static_cast<Heading>(idx % 4);
    idx /= 4;
    p.x = idx % layout.k;
    p.y = idx / layout.k;
  }
};

// Distance-to-goal over the whole product space, via BFS on the reversed
// transition graph. All joint actions cost one step.
std::vector<int> distance_to_goal(const GridLayout& layout, bool allow_manip) {
  ProductSpace space(layout);
  std::vector<std::vector<int>> reverse_edges(space.size());
  for (int s = 0; s < space.size(); ++s) {
    AgentPose p;
    DoorState d;
    space.decode(s, p, d);
    if (layout.at(p.x, p.y) == CellKind::Wall) continue;
    if (layout.at(p.x, p.y) == CellKind::Door && d.value != layout.door_max) continue;
    for (int a = 0; a < kNumJointActions; ++a) {
      ToyAction act = joint_action_from_index(a);
      if (!allow_manip && act.manip != ManipAction::NoOp) continue;
      AgentPose np = p;
      DoorState nd = d;
      apply_action(layout, np, nd, act);
      reverse_edges[space.index(np, nd)].push_back(s);
    }
  }

  std::vector<int> dist(space.size(), kUnreachable);
  std::queue<int> frontier;
  for (int h = 0; h < 4; ++h)
    for (int dv = 1; dv <= layout.door_max; ++dv) {
      AgentPose p{layout.goal_cell.x, layout.goal_cell.y, static_cast<Heading>(h)};
      int idx = space.index(p, DoorState{dv});
      dist[idx] = 0;
      frontier.push(idx);
    }
  while (!frontier.empty()) {
    int s = frontier.front();
    frontier.pop();
    for (int prev : reverse_edges[s]) {
      if (dist[prev] == kUnreachable) {
        dist[prev] = dist[s] + 1;
        frontier.push(prev);
      }
    }
  }
  return dist;
}

}  // namespace

std::optional<int> optimal_steps(const GridLayout& layout, AgentPose start,
                                 DoorState door) {
  ProductSpace space(layout);
  auto dist = distance_to_goal(layout, /*allow_manip=*/true);
  int d = dist[space.index(start, door)];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::optional<int> optimal_steps_nav_only(const GridLayout& layout, AgentPose start,
                                          DoorState door) {
  ProductSpace space(layout);
  auto dist = distance_to_goal(layout, /*allow_manip=*/false);
  int d = dist[space.index(start, door)];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

double mean_optimal_steps(const GridLayout& layout) {
  ProductSpace space(layout);
  auto dist = distance_to_goal(layout, /*allow_manip=*/true);
  long total = 0;
  long count = 0;
  for (const Vec2i& c : layout.left_room_cells) {
    for (int h = 0; h < 4; ++h) {
      AgentPose p{c.x, c.y, static_cast<Heading>(h)};
      int d = dist[space.index(p, DoorState{1})];
      if (d == kUnreachable)
        throw ConfigError("mean_optimal_steps: goal unreachable from a left-room pose");
      total += d;
      ++count;
    }
  }
  return static_cast<double>(total) / count;
}

std::optional<ToyAction> optimal_action(const GridLayout& layout, AgentPose pose,
                                        DoorState door) {
  ProductSpace space(layout);
  auto dist = distance_to_goal(layout, /*allow_manip=*/true);
  int here = dist[space.index(pose, door)];
  if (here == kUnreachable || here == 0) return std::nullopt;
  for (int a = 0; a < kNumJointActions; ++a) {
    ToyAction act = joint_action_from_index(a);
    AgentPose np = pose;
    DoorState nd = door;
    apply_action(layout, np, nd, act);
    if (dist[space.index(np, nd)] == here - 1) return act;
  }
  return std::nullopt;
}

}  // namespace hrl4in::env
