#include "rasim/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rasim/bots.hpp"
#include "rasim/errors.hpp"
#include "rasim/metrics.hpp"
#include "rasim/protocol.hpp"
#include "rasim/server.hpp"
#include "rasim/session.hpp"
#include "rasim/world.hpp"

namespace rasim {

namespace {

struct EpisodeFlags {
  std::string config_path;
  int requests = 1;
  std::string side;
  std::vector<std::string> sides;
  std::uint64_t seed = 1;
  double budget_s = 120.0;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "Scenario config file (key = value lines)");
    app.add_option("--requests", requests, "Parallel assistance requests (1-7)");
    app.add_option("--side", side, "Works side for every request: left or right");
    app.add_option("--sides", sides, "Works side per request, e.g. --sides left right")->delimiter(',');
    app.add_option("--seed", seed, "Traffic seed");
    app.add_option("--budget", budget_s, "Episode time budget in seconds");
  }

  EpisodeConfig build() const {
    EpisodeConfig c;
    if (!config_path.empty()) c.scenario = load_scenario_config(config_path);
    if (!side.empty()) c.scenario.works_side = side_from_string(side);
    c.n_requests = requests;
    for (const std::string& s : sides) c.sides.push_back(side_from_string(s));
    c.seed = seed;
    c.time_budget_s = budget_s;
    validate(c);
    return c;
  }
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// "out.jsonl" with index 2 of several becomes "out.2.jsonl".
std::string indexed_path(const std::string& path, int index, int count) {
  if (count <= 1 || path.empty()) return path;
  const std::size_t dot = path.rfind('.');
  const std::size_t slash = path.rfind('/');
  const std::string tag = "." + std::to_string(index);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

void write_outputs(const RunResult& r, const std::string& record, const std::string& log, const std::string& report) {
  if (!record.empty()) write_recording(record, r.recording);
  if (!log.empty()) write_log(log, r.log);
  if (!report.empty()) write_report(report, compute_report(r.log.records()));
}

std::string inputs_column(const EpisodeSummary& s) {
  std::string out;
  for (const RequestSummary& r : s.requests) {
    if (!out.empty()) out += ',';
    out += std::to_string(r.path_inputs);
  }
  return out;
}

void print_summary_row(std::ostream& out, int run, std::uint64_t seed, const EpisodeSummary& s) {
  out << std::left << std::setw(5) << run << std::setw(8) << seed << std::setw(10) << s.resolved << std::setw(8)
      << s.missed << std::setw(9) << std::fixed << std::setprecision(2) << s.end_clock << inputs_column(s) << '\n';
  out.unsetf(std::ios::floatfield);
}

void print_summary_header(std::ostream& out) {
  out << std::left << std::setw(5) << "run" << std::setw(8) << "seed" << std::setw(10) << "resolved" << std::setw(8)
      << "missed" << std::setw(9) << "end_s" << "inputs" << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Remote-assistance road-works simulation"};
  app.require_subcommand(1);

  EpisodeFlags run_flags;
  std::string listen = "127.0.0.1:7878";
  std::string run_record = "session.rec.jsonl";
  std::string run_log = "session.log.jsonl";
  std::string run_report;
  std::string interaction = "any";
  double speed = 1.0;
  double wait_s = 0.0;
  CLI::App* run = app.add_subcommand("run", "Serve a live session to one operator client");
  run_flags.add_to(*run);
  run->add_option("--listen", listen, "HOST:PORT to listen on");
  run->add_option("--record", run_record, "Recording written on exit");
  run->add_option("--log", run_log, "Metrics log written on exit");
  run->add_option("--report", run_report, "Metrics report written on exit");
  run->add_option("--interaction", interaction, "Input concept: any, waypoint, trajectory or pathplan");
  run->add_option("--speed", speed, "Simulated seconds per wall second; 0 runs unpaced");
  run->add_option("--wait", wait_s, "Seconds to wait for a client before the clock starts");

  EpisodeFlags bot_flags;
  std::string bot_kind = "pathplan";
  int repeats = 1;
  BotParams params;
  std::string bot_record;
  std::string bot_log;
  std::string bot_report;
  CLI::App* bot = app.add_subcommand("bot", "Run headless episodes with a scripted operator");
  bot_flags.add_to(*bot);
  bot->add_option("--bot", bot_kind, "pathplan, waypoint, trajectory or idle");
  bot->add_option("--repeats", repeats, "Episodes to run; seeds count up from --seed");
  bot->add_option("--delay", params.reaction_delay_s, "Reaction delay in seconds");
  bot->add_option("--dwell", params.dwell_s, "Seconds a request stays Main before rotation");
  bot->add_option("--max-inputs", params.max_inputs, "Path inputs per request; negative means unlimited");
  bot->add_option("--record", bot_record, "Recording path");
  bot->add_option("--log", bot_log, "Metrics log path");
  bot->add_option("--report", bot_report, "Metrics report path");

  std::string recording_path;
  std::string replay_log;
  std::string replay_report;
  std::string expect_log;
  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a recording and check it against the recorded run");
  replay_cmd->add_option("recording", recording_path, "Recording file")->required();
  replay_cmd->add_option("--log", replay_log, "Write the replayed metrics log here");
  replay_cmd->add_option("--report", replay_report, "Write the replayed metrics report here");
  replay_cmd->add_option("--expect-log", expect_log, "Metrics log of the live run to compare against");

  std::string log_path;
  std::string report_path;
  CLI::App* report = app.add_subcommand("report", "Compute the metrics report of a log");
  report->add_option("log", log_path, "Metrics log file")->required();
  report->add_option("--report", report_path, "Also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      EpisodeConfig cfg = run_flags.build();
      cfg.interaction = concept_from_string(interaction);
      ServeOptions opts;
      opts.endpoint = parse_endpoint(listen);
      if (speed < 0.0) throw ConfigError("speed must not be negative");
      opts.speed = speed;
      opts.connect_wait_s = wait_s;
      opts.on_listening = [&](std::uint16_t port) {
        out << "listening on " << opts.endpoint.host << ':' << port << std::endl;
      };
      const RunResult r = serve(cfg, opts, utc_now());
      write_outputs(r, run_record, run_log, run_report);
      print_summary_header(out);
      print_summary_row(out, 1, cfg.seed, r.summary);
      return kExitOk;
    }
    if (*bot) {
      const BotKind kind = bot_kind_from_string(bot_kind);
      if (repeats < 1) throw ConfigError("repeats must be at least 1");
      if (params.reaction_delay_s < 0.0) throw ConfigError("delay must not be negative");
      if (params.dwell_s <= 0.0) throw ConfigError("dwell must be positive");
      const EpisodeConfig base = bot_flags.build();
      print_summary_header(out);
      for (int k = 0; k < repeats; ++k) {
        EpisodeConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(k);
        const RunResult r = run_bot(cfg, kind, params, utc_now());
        write_outputs(r, indexed_path(bot_record, k + 1, repeats), indexed_path(bot_log, k + 1, repeats),
                      indexed_path(bot_report, k + 1, repeats));
        print_summary_row(out, k + 1, cfg.seed, r.summary);
      }
      return kExitOk;
    }
    if (*replay_cmd) {
      const SessionRecording rec = read_recording(recording_path);
      const RunResult r = replay(rec);
      write_outputs(r, {}, replay_log, replay_report);
      print_summary_header(out);
      print_summary_row(out, 1, rec.config.seed, r.summary);
      bool ok = true;
      if (rec.summary && summary_to_json(*rec.summary) != summary_to_json(r.summary)) {
        err << "replay summary differs from the recorded run\n  recorded: " << summary_to_json(*rec.summary)
            << "\n  replayed: " << summary_to_json(r.summary) << '\n';
        ok = false;
      }
      if (!expect_log.empty() && normalize_log(slurp(expect_log)) != r.log.to_jsonl(false)) {
        err << "replayed metrics log differs from " << expect_log << '\n';
        ok = false;
      }
      if (!ok) return kExitReplayMismatch;
      out << (rec.summary ? "replay matches the recorded run\n" : "recording has no summary to compare\n");
      return kExitOk;
    }
    if (*report) {
      const Report rep = compute_report(read_log(log_path));
      out << report_to_json(rep);
      if (!report_path.empty()) write_report(report_path, rep);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rasim
