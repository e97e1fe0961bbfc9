#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rasim/cli.hpp"
#include "rasim/metrics.hpp"
#include "rasim/protocol.hpp"

using namespace rasim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rasim_cli");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rasim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  /// A path-planning bot run with its recording, log and report on disk.
  void bot_run() {
    const Outcome o = cli({"bot", "--bot", "pathplan", "--requests", "1", "--record", path("rec.jsonl"), "--log",
                           path("log.jsonl"), "--report", path("report.json")});
    ASSERT_EQ(o.code, kExitOk) << o.err;
  }

private:
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, BotPrintsASummaryRowAndWritesArtifacts) {
  const Outcome o = cli({"bot", "--bot", "pathplan", "--requests", "2", "--repeats", "2", "--log", path("log.jsonl")});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("resolved"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("log.1.jsonl")));
  EXPECT_TRUE(fs::exists(path("log.2.jsonl")));
  EXPECT_FALSE(fs::exists(path("log.jsonl")));
  bot_run();
  EXPECT_TRUE(fs::exists(path("rec.jsonl")));
  EXPECT_EQ(read_report(path("report.json")).missed_count, 0);
}

TEST_F(CliTest, ReplayMatches) {
  bot_run();
  const Outcome o = cli({"replay", path("rec.jsonl"), "--expect-log", path("log.jsonl")});
  EXPECT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("replay matches"), std::string::npos);
}

TEST_F(CliTest, ReplayMismatchHasItsOwnExitCode) {
  bot_run();
  SessionRecording rec = read_recording(path("rec.jsonl"));
  ASSERT_TRUE(rec.summary.has_value());
  rec.summary->resolved = 0;
  rec.summary->missed = 1;
  write_recording(path("tampered.jsonl"), rec);
  const Outcome o = cli({"replay", path("tampered.jsonl")});
  EXPECT_EQ(o.code, kExitReplayMismatch);
  EXPECT_NE(o.err.find("differs"), std::string::npos);
  std::ifstream in(path("log.jsonl"));
  std::string line, shorter;
  for (int k = 0; std::getline(in, line); ++k) {
    if (k != 5) shorter += line + "\n";
  }
  write("shorter.jsonl", shorter);
  EXPECT_EQ(cli({"replay", path("rec.jsonl"), "--expect-log", path("shorter.jsonl")}).code, kExitReplayMismatch);
}

TEST_F(CliTest, BrokenRecordingsAreProtocolErrors) {
  bot_run();
  std::ifstream in(path("rec.jsonl"));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto pos = text.find("\"protocol_version\":\"1\"");
  ASSERT_NE(pos, std::string::npos);
  std::string other = text;
  other.replace(pos, 22, "\"protocol_version\":\"9\"");
  write("v9.jsonl", other);
  const Outcome v = cli({"replay", path("v9.jsonl")});
  EXPECT_EQ(v.code, kExitProtocol);
  EXPECT_NE(v.err.find('9'), std::string::npos);
  write("junk.jsonl", text.substr(0, text.size() / 2) + "\n{oops\n");
  EXPECT_EQ(cli({"replay", path("junk.jsonl")}).code, kExitProtocol);
}

TEST_F(CliTest, ReportOnABotLog) {
  bot_run();
  const Outcome o = cli({"report", path("log.jsonl"), "--report", path("again.json")});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  for (const char* key : {"missed_count", "deviation_time_sum_m", "deviation_progress_sum_m", "neglected_avg_s",
                          "mouse_travel_cm", "aoi_shares"}) {
    EXPECT_NE(o.out.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(read_report(path("again.json")), read_report(path("report.json")));
}

TEST_F(CliTest, ReportOnAnEmptyLogIsZeros) {
  write("empty.jsonl", "");
  const Outcome o = cli({"report", path("empty.jsonl"), "--report", path("zeros.json")});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const Report r = read_report(path("zeros.json"));
  EXPECT_EQ(r.missed_count, 0);
  EXPECT_EQ(r.deviation_time_sum_m, 0.0);
  EXPECT_EQ(r.neglected_avg_s, 0.0);
  write("bad.jsonl", "{\"type\":\"sample\",\n");
  const Outcome bad = cli({"report", path("bad.jsonl")});
  EXPECT_EQ(bad.code, kExitProtocol);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos) << bad.err;
}

TEST_F(CliTest, ConfigErrors) {
  write("bad.cfg", "view_range_m = 200\nspeed_of_light = 3\n");
  const Outcome o = cli({"bot", "--bot", "idle", "--config", path("bad.cfg")});
  EXPECT_EQ(o.code, kExitConfig);
  EXPECT_NE(o.err.find("speed_of_light"), std::string::npos);
  EXPECT_EQ(cli({"bot", "--requests", "8"}).code, kExitConfig);
  EXPECT_EQ(cli({"bot", "--bot", "teleport"}).code, kExitConfig);
  EXPECT_EQ(cli({"bot", "--side", "up"}).code, kExitConfig);
  EXPECT_EQ(cli({"bot", "--no-such-flag"}).code, kExitConfig);
  EXPECT_EQ(cli({"bot", "--delay", "-1"}).code, kExitConfig);
  EXPECT_EQ(cli({"run", "--listen", "nowhere"}).code, kExitConfig);
}

TEST_F(CliTest, ConfigFileShapesTheScenario) {
  write("right.cfg", "works_side = right\n");
  const Outcome o = cli({"bot", "--bot", "pathplan", "--config", path("right.cfg"), "--record", path("r.jsonl")});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(read_recording(path("r.jsonl")).config.scenario.works_side, Side::Right);
}

TEST_F(CliTest, RunServesHeadlessAndWritesArtifacts) {
  const Outcome o = cli({"run", "--listen", "127.0.0.1:0", "--budget", "3", "--speed", "0", "--record",
                         path("live.jsonl"), "--log", path("live.log")});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("listening on 127.0.0.1:"), std::string::npos);
  const SessionRecording rec = read_recording(path("live.jsonl"));
  ASSERT_TRUE(rec.summary.has_value());
  EXPECT_EQ(rec.summary->missed, 1);
  EXPECT_EQ(cli({"replay", path("live.jsonl"), "--expect-log", path("live.log")}).code, kExitOk);
}

TEST_F(CliTest, BusyPortIsARuntimeError) {
  boost::asio::io_context io;
  boost::asio::ip::tcp::acceptor taken(io, {boost::asio::ip::make_address("127.0.0.1"), 0});
  const std::string listen = "127.0.0.1:" + std::to_string(taken.local_endpoint().port());
  const Outcome o = cli({"run", "--listen", listen, "--budget", "1", "--speed", "0"});
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_NE(o.err.find("listen"), std::string::npos);
}

TEST_F(CliTest, HelpIsSuccess) { EXPECT_EQ(cli({"--help"}).code, kExitOk); }
