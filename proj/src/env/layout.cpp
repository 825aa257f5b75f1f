#include "hrl4in/env/layout.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "hrl4in/env/oracle.hpp"

namespace hrl4in::env {

namespace {

char heading_char(Heading h) {
  switch (h) {
    case Heading::North: return 'N';
    case Heading::East: return 'E';
    case Heading::South: return 'S';
    case Heading::West: return 'W';
  }
  return '?';
}

Heading heading_from_char(char c) {
  switch (c) {
    case 'N': return Heading::North;
    case 'E': return Heading::East;
    case 'S': return Heading::South;
    case 'W': return Heading::West;
  }
  throw ConfigError(std::string("bad heading glyph '") + c + "'");
}

}  // namespace

void GridLayout::validate() const {
  if (k < 3) throw ConfigError("layout: k must be >= 3");
  if (cells.size() != static_cast<size_t>(k) * k)
    throw ConfigError("layout: cell count does not match k*k");
  if (door_max < 2) throw ConfigError("layout: door_max must be >= 2");
  if (max_episode_steps < 1) throw ConfigError("layout: max_episode_steps must be >= 1");

  int doors = 0;
  for (CellKind c : cells)
    if (c == CellKind::Door) ++doors;
  if (doors != (has_door ? 1 : 0))
    throw ConfigError("layout: door glyph count inconsistent with has_door");
  if (has_door) {
    if (!in_bounds(door_cell.x, door_cell.y) ||
        at(door_cell.x, door_cell.y) != CellKind::Door)
      throw ConfigError("layout: door_cell does not point at the Door cell");

    Vec2i d = heading_delta(door_facing);
    Vec2i front{door_cell.x - d.x, door_cell.y - d.y};
    if (!(front == door_front_cell))
      throw ConfigError("layout: door_front_cell inconsistent with door_facing");
    if (!in_bounds(front.x, front.y) || at(front.x, front.y) != CellKind::Free)
      throw ConfigError("layout: door_front_cell must be a free cell");
  }

  if (!in_bounds(goal_cell.x, goal_cell.y) || at(goal_cell.x, goal_cell.y) != CellKind::Free)
    throw ConfigError("layout: goal_cell must be a free cell");
  if (left_room_cells.empty()) throw ConfigError("layout: no left-room cells");
  for (const Vec2i& c : left_room_cells) {
    if (!in_bounds(c.x, c.y) || at(c.x, c.y) != CellKind::Free)
      throw ConfigError("layout: left-room cell is not free");
    if (c == goal_cell) throw ConfigError("layout: goal cell must not be in the left room");
  }

  // Door gating: with a door present, the closed door must separate the left
  // room from the goal and opening it must connect them. Without a door, plain
  // navigation must reach the goal.
  for (const Vec2i& c : left_room_cells) {
    AgentPose p{c.x, c.y, Heading::North};
    if (has_door && optimal_steps_nav_only(*this, p, DoorState{1}).has_value())
      throw ConfigError("layout: goal reachable from left room with the door closed");
    if (!optimal_steps_nav_only(*this, p, DoorState{door_max}).has_value())
      throw ConfigError("layout: goal unreachable from left room");
  }
}

GridLayout GridLayout::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "TOYENV-LAYOUT v1")
    throw ConfigError("layout: missing 'TOYENV-LAYOUT v1' header");

  GridLayout out;
  bool have_k = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == ';') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "grid") break;
    if (key == "k") {
      ls >> out.k;
      have_k = true;
    } else if (key == "door_max") {
      ls >> out.door_max;
    } else if (key == "max_episode_steps") {
      ls >> out.max_episode_steps;
    } else if (key == "door_facing") {
      std::string v;
      ls >> v;
      if (v.size() != 1) throw ConfigError("layout: bad door_facing");
      out.door_facing = heading_from_char(v[0]);
    } else {
      throw ConfigError("layout: unknown key '" + key + "'");
    }
    if (!ls) throw ConfigError("layout: bad value for key '" + key + "'");
  }
  if (!have_k) throw ConfigError("layout: missing k");

  out.cells.assign(static_cast<size_t>(out.k) * out.k, CellKind::Free);
  bool have_door = false, have_goal = false;
  for (int y = 0; y < out.k; ++y) {
    if (!std::getline(in, line)) throw ConfigError("layout: grid has too few rows");
    if (static_cast<int>(line.size()) != out.k)
      throw ConfigError("layout: grid row length != k");
    for (int x = 0; x < out.k; ++x) {
      switch (line[x]) {
        case '#': out.at(x, y) = CellKind::Wall; break;
        case '.': break;
        case 'D':
          out.at(x, y) = CellKind::Door;
          out.door_cell = {x, y};
          have_door = true;
          break;
        case 'G':
          out.goal_cell = {x, y};
          have_goal = true;
          break;
        case 'L': out.left_room_cells.push_back({x, y}); break;
        default:
          throw ConfigError(std::string("layout: unknown glyph '") + line[x] + "'");
      }
    }
  }
  if (!have_goal) throw ConfigError("layout: no goal glyph");
  out.has_door = have_door;
  if (have_door) {
    Vec2i d = heading_delta(out.door_facing);
    out.door_front_cell = {out.door_cell.x - d.x, out.door_cell.y - d.y};
  } else {
    out.door_cell = out.door_front_cell = {-1, -1};
  }
  out.validate();
  return out;
}

GridLayout GridLayout::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("layout: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string GridLayout::serialize() const {
  std::ostringstream out;
  out << "TOYENV-LAYOUT v1\n";
  out << "k " << k << "\n";
  out << "door_max " << door_max << "\n";
  out << "max_episode_steps " << max_episode_steps << "\n";
  out << "door_facing " << heading_char(door_facing) << "\n";
  out << "grid\n";
  for (int y = 0; y < k; ++y) {
    for (int x = 0; x < k; ++x) {
      Vec2i c{x, y};
      char g = '.';
      if (at(x, y) == CellKind::Wall) g = '#';
      else if (at(x, y) == CellKind::Door) g = 'D';
      else if (c == goal_cell) g = 'G';
      else if (std::find(left_room_cells.begin(), left_room_cells.end(), c) !=
               left_room_cells.end())
        g = 'L';
      out << g;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace hrl4in::env
