#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "rasim/errors.hpp"
#include "rasim/world.hpp"

using namespace rasim;

namespace {

World left_world() { return build_scenario(ScenarioConfig{}); }
World right_world() { return build_scenario(with_side(ScenarioConfig{}, Side::Right)); }

/// Lanes whose centreline at x is clear of the works polygon and at least half a lane from every cone.
std::vector<int> open_lanes_by_geometry(const World& w, double x) {
  std::vector<int> out;
  const std::vector<Vec2> poly = w.works_polygon();
  for (int lane = 0; lane < 3; ++lane) {
    const Vec2 p{x, (lane - 1) * 3.5};
    bool clear = !point_in_polygon(p, poly);
    for (const Disc& c : w.obstacles) {
      if (oracle::len({c.center.x - p.x, c.center.y - p.y}) < 1.75) clear = false;
    }
    if (clear) out.push_back(lane);
  }
  return out;
}

}  // namespace

TEST(Scenario, DefaultDistances) {
  const World w = left_world();
  EXPECT_EQ(w.view_range_m, 200.0);
  EXPECT_EQ(w.resolution_distance_m, 600.0);
  EXPECT_EQ(w.initial_path_m, 200.0);
  EXPECT_EQ(w.lanes.size(), 3u);
  EXPECT_EQ(w.lane_width(), 3.5);
}

TEST(Scenario, LeftSideBlocksTheTwoLeftLanes) {
  const World w = left_world();
  EXPECT_EQ(w.works.blocked_lanes, (std::vector<int>{1, 2}));
  EXPECT_EQ(open_lanes_by_geometry(w, 350.0), (std::vector<int>{0}));
  EXPECT_EQ(w.passable_lanes_at(350.0), (std::vector<int>{0}));
  EXPECT_EQ(open_lanes_by_geometry(w, 100.0), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(w.passable_lanes_at(100.0), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(open_lanes_by_geometry(w, 500.0), (std::vector<int>{0, 1, 2}));
}

TEST(Scenario, RightSideBlocksTheTwoRightLanes) {
  const World w = right_world();
  EXPECT_EQ(w.works.blocked_lanes, (std::vector<int>{0, 1}));
  EXPECT_EQ(open_lanes_by_geometry(w, 350.0), (std::vector<int>{2}));
  EXPECT_EQ(w.passable_lanes_at(350.0), (std::vector<int>{2}));
}

TEST(Scenario, OneLaneClosureLeavesTwoOpen) {
  ScenarioConfig c;
  c.blocked_lanes = {2};
  const World w = build_scenario(c);
  EXPECT_EQ(open_lanes_by_geometry(w, 350.0), (std::vector<int>{0, 1}));
  EXPECT_EQ(w.passable_lanes_at(350.0), (std::vector<int>{0, 1}));
}

TEST(Scenario, ConeDiscsLieInsideTheClosedArea) {
  for (const World& w : {left_world(), right_world()}) {
    ASSERT_FALSE(w.obstacles.empty());
    const std::vector<Vec2> poly = w.works_polygon();
    for (const Disc& c : w.obstacles) {
      EXPECT_TRUE(point_in_polygon(c.center, poly)) << c.center.x << "," << c.center.y;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const SegmentFoot f = closest_on_segment(c.center, poly[i], poly[(i + 1) % poly.size()]);
        EXPECT_GE(f.distance, c.radius - 1e-9) << c.center.x << "," << c.center.y;
      }
    }
    for (std::size_t i = 1; i < w.obstacles.size(); ++i) {
      EXPECT_LE(distance(w.obstacles[i - 1].center, w.obstacles[i].center), w.config.cone_spacing_m + 1e-9);
    }
  }
}

TEST(Scenario, MirrorProperty) {
  const World l = left_world();
  const World r = right_world();
  ASSERT_EQ(l.obstacles.size(), r.obstacles.size());
  for (std::size_t i = 0; i < l.obstacles.size(); ++i) {
    const Vec2 m = mirror(l.obstacles[i].center);
    const bool found = std::any_of(r.obstacles.begin(), r.obstacles.end(), [&](const Disc& d) {
      return std::abs(d.center.x - m.x) < 1e-9 && std::abs(d.center.y - m.y) < 1e-9;
    });
    EXPECT_TRUE(found) << "cone " << i;
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-200.0, 900.0), y(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p{x(rng), y(rng)};
    EXPECT_DOUBLE_EQ(progress_along(l, 10.0, p), progress_along(r, 10.0, mirror(p)));
  }
}

TEST(Scenario, InvalidConfigs) {
  ScenarioConfig c;
  c.lane_count = 2;
  EXPECT_THROW(build_scenario(c), ConfigError);
  c = {};
  c.works_end_m = c.works_start_m;
  EXPECT_THROW(build_scenario(c), ConfigError);
  c = {};
  c.blocked_lanes = {0, 1};  // left works must touch the left edge
  EXPECT_THROW(build_scenario(c), ConfigError);
  c = {};
  c.blocked_lanes = {0, 1, 2};
  EXPECT_THROW(build_scenario(c), ConfigError);
}

TEST(NearestLane, Examples) {
  const World w = left_world();
  const LaneMatch on = nearest_lane_center(w, {100.0, 0.0});
  EXPECT_EQ(on.lane_id, 1);
  EXPECT_EQ(on.foot, (Vec2{100.0, 0.0}));
  EXPECT_EQ(on.deviation, 0.0);
  EXPECT_NEAR(nearest_lane_center(w, {50.0, -1.75}).deviation, 1.75, 1e-12);
  const LaneMatch off = nearest_lane_center(w, {80.0, 3.5 - 0.4});
  EXPECT_EQ(off.lane_id, 2);
  EXPECT_NEAR(off.deviation, 0.4, 1e-12);
}

TEST(NearestLane, MatchesAnalyticOracle) {
  const World w = left_world();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(-300.0, 1200.0), y(-8.75, 8.75);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{x(rng), y(rng)};
    EXPECT_NEAR(nearest_lane_center(w, p).deviation, oracle::lane_deviation(p.y, 3, 3.5), 1e-6);
  }
}

TEST(NearestLane, OutOfRoadThrows) {
  const World w = left_world();
  EXPECT_THROW(nearest_lane_center(w, {0.0, 9.0}), OutOfRoad);
  EXPECT_THROW(nearest_lane_center(w, {-400.0, 0.0}), OutOfRoad);
}

TEST(Progress, Examples) {
  const World w = left_world();
  EXPECT_EQ(progress_along(w, 0.0, {0.0, -3.5}), 0.0);
  EXPECT_EQ(progress_along(w, 0.0, {600.0, -3.5}), 600.0);
  // 50 m forward, then 10 m in reverse.
  Progress p;
  for (int k = 0; k <= 50; ++k) p.update(progress_along(w, 0.0, {static_cast<double>(k), 0.0}));
  for (int k = 49; k >= 40; --k) p.update(progress_along(w, 0.0, {static_cast<double>(k), 0.0}));
  EXPECT_EQ(p.max, 50.0);
  EXPECT_EQ(p.raw, 40.0);
}

TEST(ConfigFile, ParsesAndRoundTrips) {
  const ScenarioConfig c = parse_scenario_config(
      "# scenario\nworks_side = right\nworks_start_m = 250\nworks_end_m = 480  # comment\nview_range_m = 150\n");
  EXPECT_EQ(c.works_side, Side::Right);
  EXPECT_EQ(c.works_start_m, 250.0);
  EXPECT_EQ(c.works_end_m, 480.0);
  EXPECT_EQ(c.view_range_m, 150.0);
  EXPECT_EQ(c.blocked_lanes, (std::vector<int>{0, 1}));
  EXPECT_EQ(parse_scenario_config(format_scenario_config(c)), c);
  EXPECT_EQ(parse_scenario_config(format_scenario_config(ScenarioConfig{})), ScenarioConfig{});
}

TEST(ConfigFile, ErrorsNameTheKey) {
  try {
    parse_scenario_config("view_range_m = 200\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    parse_scenario_config("works_start_m = soon\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("works_start_m"), std::string::npos);
  }
  EXPECT_THROW(load_scenario_config("/nonexistent/scenario.cfg"), ConfigError);
}
