#include "hrl4in/env/toyenv.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hrl4in::env {

namespace {

// yaw 0 -> 0 deg (North), 1 -> 90 (East), ... Cos/sin on the unit circle with
// North as angle 0.
void yaw_trig(int yaw_index, double& c, double& s) {
  static const double cs[4] = {1.0, 0.0, -1.0, 0.0};
  static const double sn[4] = {0.0, 1.0, 0.0, -1.0};
  c = cs[yaw_index];
  s = sn[yaw_index];
}

bool at_door_front(const GridLayout& layout, const AgentPose& pose) {
  return layout.has_door && pose.x == layout.door_front_cell.x &&
         pose.y == layout.door_front_cell.y && pose.heading == layout.door_facing;
}

}  // namespace

ResetResult reset(std::shared_ptr<const GridLayout> layout, uint64_t rng_seed) {
  layout->validate();
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<size_t> cell_dist(0, layout->left_room_cells.size() - 1);
  std::uniform_int_distribution<int> heading_dist(0, 3);

  EnvState state;
  state.layout = std::move(layout);
  Vec2i c = state.layout->left_room_cells[cell_dist(rng)];
  state.pose = {c.x, c.y, static_cast<Heading>(heading_dist(rng))};
  state.door = DoorState{1};
  state.steps_elapsed = 0;
  state.done = false;
  return {state, observe(state)};
}

void apply_action(const GridLayout& layout, AgentPose& pose, DoorState& door,
                  ToyAction action) {
  // Manipulation first, then navigation.
  if (action.manip != ManipAction::NoOp && at_door_front(layout, pose)) {
    int delta = action.manip == ManipAction::SlideUp ? 1 : -1;
    door.value = std::clamp(door.value + delta, 1, layout.door_max);
  }
  switch (action.nav) {
    case NavAction::TurnLeft: pose.heading = turn_left(pose.heading); break;
    case NavAction::TurnRight: pose.heading = turn_right(pose.heading); break;
    case NavAction::GoForward: {
      Vec2i d = heading_delta(pose.heading);
      int nx = pose.x + d.x, ny = pose.y + d.y;
      if (layout.in_bounds(nx, ny)) {
        CellKind ck = layout.at(nx, ny);
        bool passable = ck == CellKind::Free ||
                        (ck == CellKind::Door && door.value == layout.door_max);
        if (passable) {
          pose.x = nx;
          pose.y = ny;
        }
      }
      break;
    }
    case NavAction::NoOp: break;
  }
}

StepResult step(const EnvState& state, ToyAction action) {
  if (state.done) throw UsageError("step: episode is done");
  const GridLayout& layout = *state.layout;

  EnvState next = state;
  apply_action(layout, next.pose, next.door, action);
  next.steps_elapsed = state.steps_elapsed + 1;

  RewardBreakdown reward;
  reward.r_energy = (action.nav != NavAction::NoOp ? 1 : 0) +
                    (action.manip != ManipAction::NoOp ? 1 : 0);
  bool at_goal = next.pose.x == layout.goal_cell.x && next.pose.y == layout.goal_cell.y;
  reward.r_success = at_goal ? 1 : 0;
  next.done = at_goal || next.steps_elapsed >= layout.max_episode_steps;

  return {next, observe(next), reward, next.done};
}

Observation observe(const EnvState& state) {
  const GridLayout& layout = *state.layout;
  Observation obs;
  obs.agent_position = {state.pose.x, state.pose.y};
  obs.agent_yaw = static_cast<int>(state.pose.heading);
  obs.door_state = state.door.value;
  yaw_trig(obs.agent_yaw, obs.cos_yaw, obs.sin_yaw);
  obs.goal_position = layout.goal_cell;
  obs.next_to_door = at_door_front(layout, state.pose);
  obs.k = layout.k;
  obs.global_map.assign(static_cast<size_t>(4) * layout.k * layout.k, 0.0);
  auto map = [&](int ch, int x, int y) -> double& {
    return obs.global_map[(static_cast<size_t>(ch) * layout.k + y) * layout.k + x];
  };
  for (int y = 0; y < layout.k; ++y)
    for (int x = 0; x < layout.k; ++x)
      if (layout.at(x, y) == CellKind::Wall) map(0, x, y) = 1.0;
  map(1, state.pose.x, state.pose.y) = (obs.agent_yaw + 1) / 4.0;
  map(2, layout.goal_cell.x, layout.goal_cell.y) = 1.0;
  if (layout.has_door)
    map(3, layout.door_cell.x, layout.door_cell.y) =
        static_cast<double>(state.door.value) / layout.door_max;
  return obs;
}

MutableObs mutable_obs(const EnvState& state) {
  return {state.pose.x, state.pose.y, static_cast<int>(state.pose.heading),
          state.door.value};
}

std::string render_text(const EnvState& state) {
  const GridLayout& layout = *state.layout;
  static const char agent_glyph[4] = {'^', '>', 'v', '<'};
  std::ostringstream out;
  for (int y = 0; y < layout.k; ++y) {
    for (int x = 0; x < layout.k; ++x) {
      char g;
      if (x == state.pose.x && y == state.pose.y)
        g = agent_glyph[static_cast<int>(state.pose.heading)];
      else if (layout.at(x, y) == CellKind::Door)
        g = static_cast<char>('0' + std::min(state.door.value, 9));
      else if (layout.at(x, y) == CellKind::Wall)
        g = '#';
      else if (Vec2i{x, y} == layout.goal_cell)
        g = 'G';
      else
        g = '.';
      out << g;
    }
    out << "\n";
  }
  out << "steps " << state.steps_elapsed << " door " << state.door.value << " done "
      << (state.done ? 1 : 0) << "\n";
  return out.str();
}

EnvState parse_render(const std::string& text, std::shared_ptr<const GridLayout> layout) {
  std::istringstream in(text);
  std::string line;
  EnvState state;
  state.layout = layout;
  bool have_agent = false;
  for (int y = 0; y < layout->k; ++y) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) != layout->k)
      throw ConfigError("parse_render: bad grid row");
    for (int x = 0; x < layout->k; ++x) {
      char g = line[x];
      int h = -1;
      if (g == '^') h = 0;
      else if (g == '>') h = 1;
      else if (g == 'v') h = 2;
      else if (g == '<') h = 3;
      if (h >= 0) {
        state.pose = {x, y, static_cast<Heading>(h)};
        have_agent = true;
      }
    }
  }
  if (!have_agent) throw ConfigError("parse_render: no agent glyph");
  std::string key;
  int steps, door, done;
  std::istringstream status;
  if (!std::getline(in, line)) throw ConfigError("parse_render: missing status line");
  status.str(line);
  std::string k2, k3;
  if (!(status >> key >> steps >> k2 >> door >> k3 >> done) || key != "steps" ||
      k2 != "door" || k3 != "done")
    throw ConfigError("parse_render: bad status line");
  state.steps_elapsed = steps;
  state.door = DoorState{door};
  state.done = done != 0;
  return state;
}

}  // namespace hrl4in::env
