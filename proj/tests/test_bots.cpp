#include <gtest/gtest.h>

#include "rasim/bots.hpp"
#include "rasim/errors.hpp"

using namespace rasim;

namespace {

EpisodeConfig config_n(int n, std::uint64_t seed = 1, Side side = Side::Left) {
  EpisodeConfig c;
  c.n_requests = n;
  c.seed = seed;
  c.scenario = with_side(c.scenario, side);
  return c;
}

}  // namespace

TEST(Bots, PathPlanNeedsThreeSelections) {
  const RunResult r = run_bot(config_n(1), BotKind::PathPlan);
  EXPECT_EQ(r.summary.resolved, 1);
  EXPECT_EQ(r.summary.requests[0].path_inputs, 3);
}

TEST(Bots, WaypointNeedsSevenPlacements) {
  const RunResult r = run_bot(config_n(1), BotKind::Waypoint);
  EXPECT_EQ(r.summary.resolved, 1);
  EXPECT_EQ(r.summary.requests[0].path_inputs, 7);
}

TEST(Bots, TrajectoryNeedsTenStrokes) {
  const RunResult r = run_bot(config_n(1), BotKind::Trajectory);
  EXPECT_EQ(r.summary.resolved, 1);
  EXPECT_EQ(r.summary.requests[0].path_inputs, 10);
}

TEST(Bots, MirroredSideNeedsTheSameCounts) {
  EXPECT_EQ(run_bot(config_n(1, 1, Side::Right), BotKind::PathPlan).summary.requests[0].path_inputs, 3);
  EXPECT_EQ(run_bot(config_n(1, 1, Side::Right), BotKind::Waypoint).summary.requests[0].path_inputs, 7);
  EXPECT_EQ(run_bot(config_n(1, 1, Side::Right), BotKind::Trajectory).summary.requests[0].path_inputs, 10);
}

TEST(Bots, PathPlanResolvesTwoRequests) {
  for (Side side : {Side::Left, Side::Right}) {
    const RunResult r = run_bot(config_n(2, 3, side), BotKind::PathPlan);
    EXPECT_EQ(r.summary.resolved, 2);
    EXPECT_EQ(r.summary.missed, 0);
    for (const RequestSummary& q : r.summary.requests) EXPECT_LE(*q.resolved_at, 120.0);
  }
}

TEST(Bots, IdleMissesEverything) {
  const RunResult r = run_bot(config_n(3), BotKind::Idle);
  EXPECT_EQ(r.summary.missed, 3);
  for (const RequestSummary& q : r.summary.requests) EXPECT_EQ(q.path_inputs, 0);
}

TEST(Bots, SameSeedSameSummary) {
  for (BotKind k : {BotKind::PathPlan, BotKind::Waypoint, BotKind::Trajectory}) {
    const RunResult a = run_bot(config_n(2, 11), k);
    const RunResult b = run_bot(config_n(2, 11), k);
    EXPECT_EQ(summary_to_json(a.summary), summary_to_json(b.summary));
    EXPECT_EQ(a.log.to_jsonl(false), b.log.to_jsonl(false));
  }
}

TEST(Bots, ConceptFollowsTheBot) {
  EXPECT_EQ(concept_for(BotKind::PathPlan), Concept::PathPlan);
  EXPECT_EQ(concept_for(BotKind::Waypoint), Concept::Waypoint);
  EXPECT_EQ(concept_for(BotKind::Trajectory), Concept::Trajectory);
  EXPECT_EQ(concept_for(BotKind::Idle), Concept::Any);
  const RunResult r = run_bot(config_n(1), BotKind::Waypoint);
  EXPECT_EQ(r.recording.config.interaction, Concept::Waypoint);
}

TEST(Bots, KindNames) {
  for (BotKind k : {BotKind::Idle, BotKind::PathPlan, BotKind::Waypoint, BotKind::Trajectory}) {
    EXPECT_EQ(bot_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(bot_kind_from_string("teleport"), ConfigError);
}

TEST(Bots, ReactionDelayStillResolves) {
  BotParams p;
  p.reaction_delay_s = 0.5;
  const RunResult r = run_bot(config_n(1), BotKind::PathPlan, p);
  EXPECT_EQ(r.summary.resolved, 1);
  EXPECT_GT(*r.summary.requests[0].resolved_at, *run_bot(config_n(1), BotKind::PathPlan).summary.requests[0].resolved_at);
}

TEST(Bots, OnlyTalkThroughTheProtocol) {
  // The pointer and gaze traffic a bot emits lands in the log exactly as a console's would.
  const RunResult r = run_bot(config_n(2), BotKind::PathPlan);
  std::size_t pointers = 0;
  std::size_t aoi = 0;
  for (const LogRecord& rec : r.log.records()) {
    pointers += std::holds_alternative<PointerRecord>(rec);
    aoi += std::holds_alternative<AoiRecord>(rec);
  }
  EXPECT_GT(pointers, 0u);
  EXPECT_GT(aoi, 0u);
  const Report rep = compute_report(r.log.records());
  EXPECT_GT(rep.mouse_travel_cm, 0.0);
  EXPECT_GT(rep.aoi_shares[3], 25.0);
}
