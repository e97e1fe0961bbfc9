#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rasim/messages.hpp"

namespace rasim {

struct HeaderRecord {
  std::string protocol_version = kProtocolVersion;
  std::uint64_t seed = 0;
  std::string config_json = "{}";
  std::string wall_clock;  // excluded from determinism comparisons
  bool operator==(const HeaderRecord&) const = default;
};

/// One 10 Hz row per non-terminal request.
struct SampleRecord {
  double t = 0.0;
  std::int64_t tick = 0;
  int request_id = 0;
  double lane_deviation = 0.0;
  std::int64_t progress = 0;  // floor of the running maximum progress
  double progress_raw = 0.0;
  RequestState slot = RequestState::Queued;
  double speed = 0.0;
  bool operator==(const SampleRecord&) const = default;
};

struct PointerRecord {
  double t = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double px_per_cm = 37.8;
  bool operator==(const PointerRecord&) const = default;
};

struct AoiRecord {
  double t = 0.0;
  Aoi area = Aoi::MainPanel;
  bool enter = true;
  bool operator==(const AoiRecord&) const = default;
};

/// Discrete episode events: neglect (start/end), resolved, missed, input, slot, focus, view, episode_end.
struct EventRecord {
  double t = 0.0;
  std::string kind;
  std::optional<int> request_id;
  std::optional<double> start;
  std::optional<double> end;
  std::string detail;
  bool operator==(const EventRecord&) const = default;
};

using LogRecord = std::variant<HeaderRecord, SampleRecord, PointerRecord, AoiRecord, EventRecord>;

/// Append-only episode log. Owned by the tick thread.
class MetricsLog {
public:
  void append(LogRecord r) { records_.push_back(std::move(r)); }
  const std::vector<LogRecord>& records() const noexcept { return records_; }
  /// One JSON object per line. With `with_wall_clock` false the header's wall_clock is blanked.
  std::string to_jsonl(bool with_wall_clock = true) const;

private:
  std::vector<LogRecord> records_;
};

std::string encode_record(const LogRecord& r);
/// Throws ParseError naming `line_no` for malformed input.
LogRecord decode_record(std::string_view line, std::size_t line_no);
std::vector<LogRecord> parse_log(std::string_view text);
std::vector<LogRecord> read_log(const std::string& path);
/// Re-encodes a log with the header wall clock blanked, for byte comparison across runs.
std::string normalize_log(std::string_view text);
void write_log(const std::string& path, const MetricsLog& log);

/// Sum of lane deviation over every sample.
double deviation_time_sum(std::span<const SampleRecord> samples);

/// Per request: mean deviation per floored progress metre. Those means are averaged across requests metre by
/// metre and the per-metre averages summed.
double deviation_progress_sum(std::span<const SampleRecord> samples);

/// Total neglected duration divided by the number of intervals; 0 without intervals.
double neglected_avg(std::span<const std::pair<double, double>> intervals);

/// Pointer path length in centimetres.
double mouse_travel(std::span<const PointerRecord> events);

/// Dwell share per area in percent, ordered RequestPanel, InfoPanel, MainPanel, SecondaryPanel. Areas still
/// entered at `episode_end` are closed there. All zero when nothing was attributed.
std::array<double, 4> aoi_shares(std::span<const AoiRecord> events, double episode_end);

struct Report {
  int missed_count = 0;
  double deviation_time_sum_m = 0.0;
  double deviation_progress_sum_m = 0.0;
  double neglected_avg_s = 0.0;
  double mouse_travel_cm = 0.0;
  std::array<double, 4> aoi_shares{};
  std::string config_json = "{}";
  bool operator==(const Report&) const = default;
};

Report compute_report(std::span<const LogRecord> records);
std::string report_to_json(const Report& r);
Report report_from_json(std::string_view text);
void write_report(const std::string& path, const Report& r);
Report read_report(const std::string& path);

}  // namespace rasim
