#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "hrl4in/env/layout.hpp"
#include "hrl4in/env/oracle.hpp"
#include "hrl4in/env/toyenv.hpp"

using namespace hrl4in;
using namespace hrl4in::env;

namespace {

std::shared_ptr<const GridLayout> load_toy11() {
  return std::make_shared<GridLayout>(
      GridLayout::load(std::string(HRL4IN_DATA_DIR) + "/layouts/toy11.layout"));
}

// 5x5 two-room layout used for exhaustive checks.
const char* kTiny5 =
    "TOYENV-LAYOUT v1\n"
    "k 5\n"
    "door_max 3\n"
    "max_episode_steps 100\n"
    "door_facing E\n"
    "grid\n"
    "#####\n"
    "#L#.#\n"
    "#LDG#\n"
    "#L#.#\n"
    "#####\n";

std::shared_ptr<const GridLayout> tiny5() {
  return std::make_shared<GridLayout>(GridLayout::parse(kTiny5));
}

EnvState state_at(std::shared_ptr<const GridLayout> l, int x, int y, Heading h,
                  int door = 1) {
  EnvState s;
  s.layout = std::move(l);
  s.pose = {x, y, h};
  s.door = DoorState{door};
  return s;
}

ToyAction act(NavAction n, ManipAction m) { return ToyAction{n, m}; }

}  // namespace

TEST_CASE("layout parse/serialize round trip") {
  auto l = load_toy11();
  CHECK(l->k == 11);
  CHECK(l->door_max == 5);
  CHECK(l->max_episode_steps == 500);
  CHECK(l->door_cell == Vec2i{5, 5});
  CHECK(l->door_front_cell == Vec2i{4, 5});
  CHECK(l->left_room_cells.size() == 36);
  GridLayout reparsed = GridLayout::parse(l->serialize());
  CHECK(reparsed.serialize() == l->serialize());
}

TEST_CASE("layout validation rejects broken maps") {
  CHECK_THROWS_AS(GridLayout::parse("nonsense"), ConfigError);
  // No goal.
  CHECK_THROWS_AS(GridLayout::parse("TOYENV-LAYOUT v1\nk 3\ngrid\n###\n#L#\n###\n"),
                  ConfigError);
  // Goal reachable with the door closed (gap in the dividing wall).
  const char* leaky =
      "TOYENV-LAYOUT v1\nk 5\ndoor_max 3\ndoor_facing E\ngrid\n"
      "#####\n"
      "#L..#\n"
      "#LDG#\n"
      "#L#.#\n"
      "#####\n";
  CHECK_THROWS_AS(GridLayout::parse(leaky), ConfigError);
  // door_max below 2.
  std::string low = kTiny5;
  low.replace(low.find("door_max 3"), 10, "door_max 1");
  CHECK_THROWS_AS(GridLayout::parse(low), ConfigError);
}

TEST_CASE("reset is deterministic and starts with a closed door") {
  auto l = load_toy11();
  for (uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
    auto a = reset(l, seed);
    auto b = reset(l, seed);
    CHECK(a.state.pose == b.state.pose);
    CHECK(a.state.door.value == 1);
    CHECK(a.state.steps_elapsed == 0);
    CHECK_FALSE(a.state.done);
    // Start cell is in the left room.
    bool in_left = false;
    for (const Vec2i& c : l->left_room_cells)
      if (c == Vec2i{a.state.pose.x, a.state.pose.y}) in_left = true;
    CHECK(in_left);
  }
}

TEST_CASE("reset start distribution is uniform (chi-squared, p > 0.01)") {
  auto l = load_toy11();
  const int n = 10000;
  std::map<std::tuple<int, int, int>, int> counts;
  for (int i = 0; i < n; ++i) {
    auto r = reset(l, 777000ULL + i);
    counts[{r.state.pose.x, r.state.pose.y, static_cast<int>(r.state.pose.heading)}]++;
  }
  const int bins = static_cast<int>(l->left_room_cells.size()) * 4;
  const double expected = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  int seen = 0;
  for (const auto& [k, v] : counts) {
    chi2 += (v - expected) * (v - expected) / expected;
    ++seen;
  }
  chi2 += (bins - seen) * expected;  // unseen bins
  // Wilson-Hilferty upper 1% critical value for df = bins - 1.
  const double df = bins - 1;
  const double z = 2.3263;
  const double crit = df * std::pow(1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df)), 3.0);
  CHECK(chi2 < crit);
}

TEST_CASE("no-op step only advances the clock") {
  auto l = load_toy11();
  auto s = state_at(l, 2, 2, Heading::North);
  auto r = step(s, act(NavAction::NoOp, ManipAction::NoOp));
  CHECK(r.state.pose == s.pose);
  CHECK(r.state.door.value == 1);
  CHECK(r.state.steps_elapsed == 1);
  CHECK(r.reward.r_energy == 0);
  CHECK(r.reward.total() == doctest::Approx(0.0));
}

TEST_CASE("consecutive slide-ups open the door from the door front") {
  auto l = load_toy11();
  auto s = state_at(l, 4, 5, Heading::East);
  for (int i = 0; i < 5; ++i) {
    auto r = step(s, act(NavAction::NoOp, ManipAction::SlideUp));
    s = r.state;
    CHECK(r.reward.r_energy == 1);
  }
  CHECK(s.door.value == 5);  // clamped at door_max
}

TEST_CASE("manipulation is ineffective away from the door front") {
  auto l = load_toy11();
  // Wrong cell.
  auto r1 = step(state_at(l, 2, 2, Heading::East), act(NavAction::NoOp, ManipAction::SlideUp));
  CHECK(r1.state.door.value == 1);
  CHECK(r1.reward.r_energy == 1);
  // Right cell, wrong facing.
  auto r2 = step(state_at(l, 4, 5, Heading::North), act(NavAction::NoOp, ManipAction::SlideUp));
  CHECK(r2.state.door.value == 1);
  CHECK(r2.reward.r_energy == 1);
}

TEST_CASE("joint actuation costs two energy units") {
  auto l = load_toy11();
  auto r = step(state_at(l, 2, 2, Heading::East), act(NavAction::GoForward, ManipAction::SlideUp));
  CHECK(r.reward.r_energy == 2);
  CHECK(r.reward.total() == doctest::Approx(-0.002));
}

TEST_CASE("forward into a wall leaves the pose unchanged but costs energy") {
  auto l = load_toy11();
  auto s = state_at(l, 1, 1, Heading::West);
  auto r = step(s, act(NavAction::GoForward, ManipAction::NoOp));
  CHECK(r.state.pose == s.pose);
  CHECK(r.reward.r_energy == 1);
}

TEST_CASE("door cell blocks until fully open; manipulation applies before movement") {
  auto l = load_toy11();
  for (int door = 1; door < 5; ++door) {
    auto r = step(state_at(l, 4, 5, Heading::East, door), act(NavAction::GoForward, ManipAction::NoOp));
    CHECK(r.state.pose.x == 4);  // partially open still blocks
  }
  auto open = step(state_at(l, 4, 5, Heading::East, 5), act(NavAction::GoForward, ManipAction::NoOp));
  CHECK(open.state.pose.x == 5);
  // At door value 4, slide-up + forward enters in the same step.
  auto combo = step(state_at(l, 4, 5, Heading::East, 4), act(NavAction::GoForward, ManipAction::SlideUp));
  CHECK(combo.state.door.value == 5);
  CHECK(combo.state.pose.x == 5);
}

TEST_CASE("stepping a done episode is a usage error") {
  auto l = load_toy11();
  auto s = state_at(l, 2, 2, Heading::North);
  s.done = true;
  CHECK_THROWS_AS(step(s, act(NavAction::NoOp, ManipAction::NoOp)), UsageError);
}

TEST_CASE("reaching the goal pays the success reward and ends the episode") {
  auto l = load_toy11();
  auto s = state_at(l, 8, 5, Heading::East, 5);
  auto r = step(s, act(NavAction::GoForward, ManipAction::NoOp));
  CHECK(r.state.pose.x == 9);
  CHECK(r.reward.r_success == 1);
  CHECK(r.reward.total() == doctest::Approx(10.0 - 0.001));
  CHECK(r.done);
}

TEST_CASE("observation invariants and purity") {
  auto l = load_toy11();
  auto s = state_at(l, 3, 4, Heading::East, 3);
  Observation a = observe(s);
  Observation b = observe(s);
  CHECK(a.global_map == b.global_map);
  int nonzero1 = 0, nonzero2 = 0, nonzero3 = 0;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      if (a.map_at(1, x, y) != 0.0) ++nonzero1;
      if (a.map_at(2, x, y) != 0.0) ++nonzero2;
      if (a.map_at(3, x, y) != 0.0) ++nonzero3;
    }
  CHECK(nonzero1 == 1);
  CHECK(nonzero2 == 1);
  CHECK(nonzero3 == 1);
  CHECK(a.map_at(1, 3, 4) == doctest::Approx((1 + 1) / 4.0));  // East = yaw 1
  CHECK(a.map_at(3, 5, 5) == doctest::Approx(3.0 / 5.0));
  CHECK(a.cos_yaw * a.cos_yaw + a.sin_yaw * a.sin_yaw == doctest::Approx(1.0));
  CHECK_FALSE(a.next_to_door);
  CHECK(observe(state_at(l, 4, 5, Heading::East)).next_to_door);
  // Door state decodes back from channel 3.
  CHECK(static_cast<int>(std::lround(a.map_at(3, 5, 5) * l->door_max)) == 3);
}

TEST_CASE("mutable observation projects (x, y, yaw, door)") {
  auto l = load_toy11();
  auto s = state_at(l, 2, 5, Heading::North);
  CHECK(mutable_obs(s) == MutableObs{2, 5, 0, 1});
  auto r = step(s, act(NavAction::TurnRight, ManipAction::NoOp));
  CHECK(mutable_obs(r.state) == MutableObs{2, 5, 1, 1});
}

TEST_CASE("episode replay matches an independent transition recomputation") {
  auto l = load_toy11();
  std::mt19937_64 rng(99);
  auto r = reset(l, 4242);
  EnvState s = r.state;
  // Independent model of the rules, kept deliberately separate from step().
  int x = s.pose.x, y = s.pose.y, yaw = static_cast<int>(s.pose.heading), door = 1;
  for (int t = 0; t < 400 && !s.done; ++t) {
    ToyAction a = joint_action_from_index(static_cast<int>(rng() % kNumJointActions));
    s = step(s, a).state;

    if (a.manip != ManipAction::NoOp && x == 4 && y == 5 && yaw == 1)
      door = std::clamp(door + (a.manip == ManipAction::SlideUp ? 1 : -1), 1, 5);
    if (a.nav == NavAction::TurnLeft) yaw = (yaw + 3) % 4;
    if (a.nav == NavAction::TurnRight) yaw = (yaw + 1) % 4;
    if (a.nav == NavAction::GoForward) {
      static const int dx[4] = {0, 1, 0, -1};
      static const int dy[4] = {-1, 0, 1, 0};
      int nx = x + dx[yaw], ny = y + dy[yaw];
      CellKind ck = l->at(nx, ny);
      if (ck == CellKind::Free || (ck == CellKind::Door && door == 5)) {
        x = nx;
        y = ny;
      }
    }
    CHECK(mutable_obs(s) == MutableObs{x, y, yaw, door});
  }
}

TEST_CASE("door value stays clamped under random action sequences") {
  auto l = tiny5();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = reset(l, trial).state;
    while (!s.done) {
      auto a = joint_action_from_index(static_cast<int>(rng() % kNumJointActions));
      s = step(s, a).state;
      CHECK(s.door.value >= 1);
      CHECK(s.door.value <= l->door_max);
    }
    CHECK(s.steps_elapsed <= l->max_episode_steps);
  }
}

TEST_CASE("render round-trips through the debug parser") {
  auto l = load_toy11();
  auto s = state_at(l, 4, 5, Heading::East, 3);
  s.steps_elapsed = 17;
  std::string text = render_text(s);
  // 11 rows of 11 glyphs plus one status line.
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 12);
  EnvState back = parse_render(text, l);
  CHECK(render_text(back) == text);
  CHECK(back.pose == s.pose);
  CHECK(back.door.value == 3);
  CHECK(back.steps_elapsed == 17);
  // Closed and open doors render differently.
  auto closed = render_text(state_at(l, 2, 2, Heading::North, 1));
  auto open = render_text(state_at(l, 2, 2, Heading::North, 5));
  CHECK(closed != open);
}

// ---------------------------------------------------------------------------
// Shortest-path oracle

TEST_CASE("oracle: zero steps at the goal") {
  auto l = load_toy11();
  CHECK(optimal_steps(*l, {9, 5, Heading::East}) == 0);
}

TEST_CASE("oracle: door-front start composes opening and walking") {
  auto l = load_toy11();
  // (door_max - 1) slide-ups, the last shared with go-forward, then the walk.
  auto d = optimal_steps(*l, {4, 5, Heading::East});
  REQUIRE(d.has_value());
  CHECK(*d == (l->door_max - 1) + 4);  // 8 on the canonical layout
}

TEST_CASE("oracle: unreachable is reported distinctly") {
  auto l = tiny5();
  // Nav-only from the left room with a closed door cannot reach the goal.
  CHECK_FALSE(optimal_steps_nav_only(*l, {1, 2, Heading::East}, DoorState{1}).has_value());
  CHECK(optimal_steps_nav_only(*l, {1, 2, Heading::East}, DoorState{3}).has_value());
}

TEST_CASE("oracle: Bellman consistency on the 5x5 layout") {
  auto l = tiny5();
  for (int y = 0; y < l->k; ++y)
    for (int x = 0; x < l->k; ++x) {
      if (l->at(x, y) == CellKind::Wall) continue;
      for (int h = 0; h < 4; ++h)
        for (int door = 1; door <= l->door_max; ++door) {
          if (l->at(x, y) == CellKind::Door && door != l->door_max) continue;
          AgentPose p{x, y, static_cast<Heading>(h)};
          auto d0 = optimal_steps(*l, p, DoorState{door});
          REQUIRE(d0.has_value());
          if (*d0 == 0) continue;
          int best = std::numeric_limits<int>::max();
          for (int a = 0; a < kNumJointActions; ++a) {
            AgentPose np = p;
            DoorState nd{door};
            apply_action(*l, np, nd, joint_action_from_index(a));
            auto dn = optimal_steps(*l, np, nd);
            REQUIRE(dn.has_value());
            CHECK(*d0 <= 1 + *dn);
            best = std::min(best, 1 + *dn);
          }
          CHECK(*d0 == best);
        }
    }
}

TEST_CASE("oracle: mean over left-room starts is near the reported average") {
  auto l = load_toy11();
  double mean = mean_optimal_steps(*l);
  MESSAGE("mean optimal steps on toy11: ", mean);
  CHECK(mean > 12.0);
  CHECK(mean < 16.0);
}

TEST_CASE("oracle: greedy optimal actions solve every left-room start at optimal length") {
  auto l = tiny5();
  for (const Vec2i& c : l->left_room_cells)
    for (int h = 0; h < 4; ++h) {
      EnvState s = state_at(l, c.x, c.y, static_cast<Heading>(h));
      int expect = *optimal_steps(*l, s.pose, s.door);
      int taken = 0;
      while (!s.done) {
        auto a = optimal_action(*l, s.pose, s.door);
        REQUIRE(a.has_value());
        s = step(s, *a).state;
        ++taken;
      }
      CHECK(Vec2i{s.pose.x, s.pose.y} == l->goal_cell);
      CHECK(taken == expect);
    }
}
