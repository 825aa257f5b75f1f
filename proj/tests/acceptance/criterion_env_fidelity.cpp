#include <random>

#include "acceptance_util.hpp"
#include "hrl4in/env/toyenv.hpp"

using namespace hrl4in;
using namespace hrl4in::env;

namespace {

EnvState make_state(std::shared_ptr<const GridLayout> layout, AgentPose pose, int door) {
  EnvState s;
  s.layout = std::move(layout);
  s.pose = pose;
  s.door = DoorState{door};
  return s;
}

}  // namespace

int run_env_fidelity() {
  Criterion c(1, "environment fidelity");
  auto layout = acceptance_layout("toy11.layout");
  AgentPose front{layout->door_front_cell.x, layout->door_front_cell.y,
                  layout->door_facing};

  // Door opens after exactly door_max-1 consecutive slide-ups at the front
  // pose, one increment per step.
  EnvState s = make_state(layout, front, 1);
  for (int i = 1; i < layout->door_max; ++i) {
    auto r = step(s, {NavAction::NoOp, ManipAction::SlideUp});
    s = r.state;
    c.check(s.door.value == 1 + i,
            "door value after " + std::to_string(i) + " slide-ups");
  }
  c.check(s.door.value == layout->door_max, "door fully open after door_max-1 ups");
  c.check(step(s, {NavAction::NoOp, ManipAction::SlideUp}).state.door.value ==
              layout->door_max,
          "slide-up saturates at door_max");
  c.check(step(s, {NavAction::NoOp, ManipAction::SlideDown}).state.door.value ==
              layout->door_max - 1,
          "slide-down decrements");
  c.check(step(make_state(layout, front, 1), {NavAction::NoOp, ManipAction::SlideDown})
                  .state.door.value == 1,
          "slide-down saturates at 1");

  // Manipulation is a no-op anywhere except (door_front_cell, door_facing).
  for (const auto& cell : layout->left_room_cells) {
    for (int h = 0; h < 4; ++h) {
      AgentPose p{cell.x, cell.y, static_cast<Heading>(h)};
      if (p == front) continue;
      auto r = step(make_state(layout, p, 2), {NavAction::NoOp, ManipAction::SlideUp});
      c.check(r.state.door.value == 2,
              "slide-up inert at (" + std::to_string(cell.x) + "," +
                  std::to_string(cell.y) + ") heading " + std::to_string(h));
    }
  }

  // The door cell is traversable only when fully open.
  for (int d = 1; d < layout->door_max; ++d) {
    auto r = step(make_state(layout, front, d), {NavAction::GoForward, ManipAction::NoOp});
    c.check(r.state.pose == front, "traversal blocked at door value " + std::to_string(d));
  }
  auto r = step(make_state(layout, front, layout->door_max),
                {NavAction::GoForward, ManipAction::NoOp});
  c.check(r.state.pose.x == layout->door_cell.x && r.state.pose.y == layout->door_cell.y,
          "traversal allowed when fully open");

  // r_energy counts actuated subsystems; total = 10*r_success - 0.001*r_energy.
  EnvState mid = make_state(layout, front, 1);
  c.check(step(mid, {NavAction::NoOp, ManipAction::NoOp}).reward.r_energy == 0,
          "energy 0 for double no-op");
  c.check(step(mid, {NavAction::TurnLeft, ManipAction::NoOp}).reward.r_energy == 1,
          "energy 1 for nav only");
  c.check(step(mid, {NavAction::NoOp, ManipAction::SlideUp}).reward.r_energy == 1,
          "energy 1 for manip only");
  auto both = step(mid, {NavAction::GoForward, ManipAction::SlideUp});
  c.check(both.reward.r_energy == 2, "energy 2 for both subsystems");
  c.check(both.reward.total() == 10.0 * both.reward.r_success - 0.001 * 2,
          "reward weights (10.0, -0.001)");

  // Stepping onto the goal pays the success reward and ends the episode.
  AgentPose near_goal{layout->goal_cell.x - 1, layout->goal_cell.y, Heading::East};
  auto win = step(make_state(layout, near_goal, 1), {NavAction::GoForward, ManipAction::NoOp});
  c.check(win.reward.r_success == 1, "success flag at goal");
  c.check(win.reward.total() == 10.0 - 0.001, "success reward value");
  c.check(win.done, "episode ends on success");

  // Timeout at max_episode_steps.
  std::mt19937_64 rng(1);
  auto rr = reset(layout, rng());
  EnvState t = rr.state;
  int steps = 0;
  while (!t.done) {
    t = step(t, {NavAction::NoOp, ManipAction::NoOp}).state;
    ++steps;
  }
  c.check(steps == layout->max_episode_steps, "episode caps at max_episode_steps");
  c.check(layout->max_episode_steps == 500, "canonical cap is 500");

  return c.finish();
}
