#pragma once

#include <optional>

#include "hrl4in/env/toyenv.hpp"

namespace hrl4in::env {

// Exact minimum number of env steps from `start` (door closed unless given)
// to the goal cell, by BFS over (x, y, heading, door) with the full 12-action
// joint action set and the step() transition rules. nullopt if unreachable.
std::optional<int> optimal_steps(const GridLayout& layout, AgentPose start,
                                 DoorState door = DoorState{1});

// Mean of optimal_steps over all left-room start poses (all 4 headings),
// door closed. Throws ConfigError if any start pose cannot reach the goal.
double mean_optimal_steps(const GridLayout& layout);

// Same BFS with manipulation actions disabled; used to check the door gates
// reachability.
std::optional<int> optimal_steps_nav_only(const GridLayout& layout, AgentPose start,
                                          DoorState door = DoorState{1});

// First action of some shortest path, for the scripted oracle-driven agent.
// nullopt when already at the goal or the goal is unreachable.
std::optional<ToyAction> optimal_action(const GridLayout& layout, AgentPose pose,
                                        DoorState door);

}  // namespace hrl4in::env
