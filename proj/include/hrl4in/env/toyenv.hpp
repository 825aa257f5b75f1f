#pragma once

#include <array>
#include <memory>
#include <vector>

#include "hrl4in/env/layout.hpp"

namespace hrl4in::env {

enum class NavAction : uint8_t { TurnLeft = 0, TurnRight = 1, GoForward = 2, NoOp = 3 };
enum class ManipAction : uint8_t { SlideUp = 0, SlideDown = 1, NoOp = 2 };

// Joint action: both subsystems act in the same step (possibly NoOp).
struct ToyAction {
  NavAction nav = NavAction::NoOp;
  ManipAction manip = ManipAction::NoOp;
  friend bool operator==(const ToyAction&, const ToyAction&) = default;
};

inline constexpr int kNumNavActions = 4;
inline constexpr int kNumManipActions = 3;
inline constexpr int kNumJointActions = kNumNavActions * kNumManipActions;

inline int joint_action_index(ToyAction a) {
  return static_cast<int>(a.nav) * kNumManipActions + static_cast<int>(a.manip);
}
inline ToyAction joint_action_from_index(int idx) {
  return {static_cast<NavAction>(idx / kNumManipActions),
          static_cast<ManipAction>(idx % kNumManipActions)};
}

struct AgentPose {
  int x = 0;
  int y = 0;
  Heading heading = Heading::North;
  friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

// Door state: 1 = closed, door_max = fully open.
struct DoorState {
  int value = 1;
  friend bool operator==(const DoorState&, const DoorState&) = default;
};

struct EnvState {
  std::shared_ptr<const GridLayout> layout;
  AgentPose pose;
  DoorState door;
  int steps_elapsed = 0;
  bool done = false;
};

inline constexpr double kRewardWeightSuccess = 10.0;
inline constexpr double kRewardWeightEnergy = -0.001;

struct RewardBreakdown {
  int r_success = 0;  // 1 iff agent position equals the goal cell
  int r_energy = 0;   // number of actuated subsystems this step (0, 1, 2)
  double total() const {
    return kRewardWeightSuccess * r_success + kRewardWeightEnergy * r_energy;
  }
};

// Agent-visible observation: scalar fields plus a 4-channel k x k map.
// Map channels: 0 static walls (1) / free (0); 1 agent cell, value
// (yaw_index + 1) / 4; 2 goal cell (1); 3 door cell, value door / door_max.
struct Observation {
  Vec2i agent_position;
  int agent_yaw = 0;  // yaw index 0..3
  int door_state = 1;
  double cos_yaw = 1.0;
  double sin_yaw = 0.0;
  Vec2i goal_position;
  bool next_to_door = false;  // pose == (door_front_cell, door_facing)
  int k = 0;
  std::vector<double> global_map;  // 4 * k * k, channel-major

  double map_at(int channel, int x, int y) const {
    return global_map[(static_cast<size_t>(channel) * k + y) * k + x];
  }
};

// The mutable observation x_t = (x, y, yaw_index, door_state): the components
// the high level can target with subgoals.
using MutableObs = std::array<int, 4>;

struct ResetResult {
  EnvState state;
  Observation obs;
};

struct StepResult {
  EnvState state;
  Observation obs;
  RewardBreakdown reward;
  bool done = false;
};

// Start pose uniform over left_room_cells x 4 headings; door closed.
// Deterministic in (layout, rng_seed).
ResetResult reset(std::shared_ptr<const GridLayout> layout, uint64_t rng_seed);

// Deterministic transition. Manipulation applies before navigation within the
// step. Manipulation only changes the door when the agent stands at
// door_front_cell facing door_facing; the door cell is traversable only when
// fully open. Throws UsageError if state.done.
StepResult step(const EnvState& state, ToyAction action);

// Pose/door part of the transition, shared with the BFS oracle. No episode
// bookkeeping, no done handling.
void apply_action(const GridLayout& layout, AgentPose& pose, DoorState& door,
                  ToyAction action);

Observation observe(const EnvState& state);
MutableObs mutable_obs(const EnvState& state);

// One glyph per cell plus a status line. Agent: ^ > v < by heading; door:
// digit of its state; goal: G. parse_render inverts it for debugging/tests.
std::string render_text(const EnvState& state);
EnvState parse_render(const std::string& text, std::shared_ptr<const GridLayout> layout);

}  // namespace hrl4in::env
