#pragma once

#include <string>
#include <vector>

#include "hrl4in/common.hpp"

namespace hrl4in::env {

enum class CellKind : uint8_t { Free, Wall, Door };

// Yaw index 0..3; North is -y so that turning right from North faces East.
enum class Heading : uint8_t { North = 0, East = 1, South = 2, West = 3 };

inline Vec2i heading_delta(Heading h) {
  switch (h) {
    case Heading::North: return {0, -1};
    case Heading::East: return {1, 0};
    case Heading::South: return {0, 1};
    case Heading::West: return {-1, 0};
  }
  return {0, 0};
}

inline Heading turn_left(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 3) % 4);
}
inline Heading turn_right(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 1) % 4);
}

// Two-room grid world with a sliding door in the dividing wall.
//
// Layout file format (version header + glyph grid, see docs/formats.md):
//   TOYENV-LAYOUT v1
//   k 11
//   door_max 5
//   max_episode_steps 500
//   door_facing E
//   grid
//   ###########
//   #L...#....#
//   ...
// Glyphs: '#' wall, '.' free, 'D' door, 'G' goal, 'L' left-room free cell.
// door_front_cell is derived: the cell one step behind the door along
// door_facing (the agent stands there facing the door).
struct GridLayout {
  int k = 0;
  std::vector<CellKind> cells;  // row-major, index = y * k + x
  // Door-free layouts (pure navigation) omit the 'D' glyph; door fields are
  // then ignored and the door observation channel stays zero.
  bool has_door = true;
  Vec2i door_cell;
  Vec2i door_front_cell;
  Heading door_facing = Heading::East;
  std::vector<Vec2i> left_room_cells;
  Vec2i goal_cell;
  int door_max = 5;
  int max_episode_steps = 500;

  bool in_bounds(int x, int y) const { return x >= 0 && x < k && y >= 0 && y < k; }
  CellKind at(int x, int y) const { return cells[static_cast<size_t>(y) * k + x]; }
  CellKind& at(int x, int y) { return cells[static_cast<size_t>(y) * k + x]; }

  // Checks every structural invariant (door uniqueness, reachability gating,
  // left-room/goal placement). Throws ConfigError with a description.
  void validate() const;

  static GridLayout parse(const std::string& text);
  static GridLayout load(const std::string& path);
  std::string serialize() const;
};

}  // namespace hrl4in::env
