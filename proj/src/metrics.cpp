#include "rasim/metrics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json_io.hpp"
#include "rasim/errors.hpp"

namespace rasim {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

json record_json(const LogRecord& r, bool with_wall_clock) {
  return std::visit(
      Overloaded{
          [&](const HeaderRecord& h) {
            return json{{"type", "header"},
                        {"protocol_version", h.protocol_version},
                        {"seed", h.seed},
                        {"config", json::parse(h.config_json)},
                        {"wall_clock", with_wall_clock ? h.wall_clock : std::string()}};
          },
          [](const SampleRecord& s) {
            return json{{"type", "sample"},           {"t", s.t},
                        {"tick", s.tick},             {"request_id", s.request_id},
                        {"lane_deviation", s.lane_deviation}, {"progress", s.progress},
                        {"progress_raw", s.progress_raw},     {"slot", s.slot},
                        {"speed", s.speed}};
          },
          [](const PointerRecord& p) {
            return json{{"type", "pointer"}, {"t", p.t}, {"dx", p.dx}, {"dy", p.dy}, {"px_per_cm", p.px_per_cm}};
          },
          [](const AoiRecord& a) { return json{{"type", "aoi"}, {"t", a.t}, {"area", a.area}, {"enter", a.enter}}; },
          [](const EventRecord& e) {
            json j{{"type", "event"}, {"t", e.t}, {"kind", e.kind}};
            if (e.request_id) j["request_id"] = *e.request_id;
            if (e.start) j["start"] = *e.start;
            if (e.end) j["end"] = *e.end;
            if (!e.detail.empty()) j["detail"] = e.detail;
            return j;
          },
      },
      r);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

constexpr const char* kAoiKeys[4] = {"request_panel", "info_panel", "main_panel", "secondary_panel"};

}  // namespace

std::string encode_record(const LogRecord& r) { return record_json(r, true).dump(); }

std::string MetricsLog::to_jsonl(bool with_wall_clock) const {
  std::string out;
  for (const LogRecord& r : records_) {
    out += record_json(r, with_wall_clock).dump();
    out += '\n';
  }
  return out;
}

LogRecord decode_record(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed record: ") + e.what());
  }
  try {
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      return HeaderRecord{j.at("protocol_version").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                          j.at("config").dump(), j.value("wall_clock", std::string())};
    }
    if (type == "sample") {
      return SampleRecord{j.at("t").get<double>(),           j.at("tick").get<std::int64_t>(),
                          j.at("request_id").get<int>(),     j.at("lane_deviation").get<double>(),
                          j.at("progress").get<std::int64_t>(), j.at("progress_raw").get<double>(),
                          j.at("slot").get<RequestState>(),  j.at("speed").get<double>()};
    }
    if (type == "pointer") {
      return PointerRecord{j.at("t").get<double>(), j.at("dx").get<double>(), j.at("dy").get<double>(),
                           j.at("px_per_cm").get<double>()};
    }
    if (type == "aoi") {
      return AoiRecord{j.at("t").get<double>(), j.at("area").get<Aoi>(), j.at("enter").get<bool>()};
    }
    if (type == "event") {
      EventRecord e;
      e.t = j.at("t").get<double>();
      e.kind = j.at("kind").get<std::string>();
      if (j.contains("request_id")) e.request_id = j.at("request_id").get<int>();
      if (j.contains("start")) e.start = j.at("start").get<double>();
      if (j.contains("end")) e.end = j.at("end").get<double>();
      e.detail = j.value("detail", std::string());
      return e;
    }
    throw ParseError(line_no, "unknown record type '" + type + "'");
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("bad record: ") + e.what());
  }
}

std::vector<LogRecord> parse_log(std::string_view text) {
  std::vector<LogRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(decode_record(line, line_no));
  }
  return out;
}

std::vector<LogRecord> read_log(const std::string& path) { return parse_log(slurp(path)); }

std::string normalize_log(std::string_view text) {
  MetricsLog log;
  for (LogRecord& r : parse_log(text)) log.append(std::move(r));
  return log.to_jsonl(false);
}

void write_log(const std::string& path, const MetricsLog& log) { spill(path, log.to_jsonl()); }

double deviation_time_sum(std::span<const SampleRecord> samples) {
  double sum = 0.0;
  for (const SampleRecord& s : samples) sum += s.lane_deviation;
  return sum;
}

double deviation_progress_sum(std::span<const SampleRecord> samples) {
  // request -> metre -> (sum, count)
  std::map<int, std::map<std::int64_t, std::pair<double, int>>> buckets;
  for (const SampleRecord& s : samples) {
    auto& b = buckets[s.request_id][s.progress];
    b.first += s.lane_deviation;
    b.second += 1;
  }
  std::map<std::int64_t, std::pair<double, int>> joined;
  for (const auto& [id, per_metre] : buckets) {
    for (const auto& [metre, acc] : per_metre) {
      auto& j = joined[metre];
      j.first += acc.first / acc.second;
      j.second += 1;
    }
  }
  double sum = 0.0;
  for (const auto& [metre, acc] : joined) sum += acc.first / acc.second;
  return sum;
}

double neglected_avg(std::span<const std::pair<double, double>> intervals) {
  if (intervals.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [start, end] : intervals) total += end - start;
  return total / static_cast<double>(intervals.size());
}

double mouse_travel(std::span<const PointerRecord> events) {
  double cm = 0.0;
  for (const PointerRecord& p : events) cm += std::hypot(p.dx, p.dy) / p.px_per_cm;
  return cm;
}

std::array<double, 4> aoi_shares(std::span<const AoiRecord> events, double episode_end) {
  std::array<double, 4> dwell{};
  std::array<std::optional<double>, 4> open{};
  for (const AoiRecord& e : events) {
    const auto k = static_cast<std::size_t>(e.area);
    if (e.enter) {
      if (!open[k]) open[k] = e.t;
    } else if (open[k]) {
      dwell[k] += e.t - *open[k];
      open[k].reset();
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (open[k]) dwell[k] += std::max(0.0, episode_end - *open[k]);
  }
  double total = 0.0;
  for (double d : dwell) total += d;
  std::array<double, 4> shares{};
  if (total <= 0.0) return shares;
  for (std::size_t k = 0; k < 4; ++k) shares[k] = dwell[k] / total * 100.0;
  return shares;
}

Report compute_report(std::span<const LogRecord> records) {
  Report rep;
  std::vector<SampleRecord> samples;
  std::vector<PointerRecord> pointer;
  std::vector<AoiRecord> aoi;
  std::vector<std::pair<double, double>> neglect;
  std::optional<double> end;
  double last_t = 0.0;
  for (const LogRecord& r : records) {
    std::visit(Overloaded{
                   [&](const HeaderRecord& h) { rep.config_json = h.config_json; },
                   [&](const SampleRecord& s) {
                     samples.push_back(s);
                     last_t = std::max(last_t, s.t);
                   },
                   [&](const PointerRecord& p) {
                     pointer.push_back(p);
                     last_t = std::max(last_t, p.t);
                   },
                   [&](const AoiRecord& a) {
                     aoi.push_back(a);
                     last_t = std::max(last_t, a.t);
                   },
                   [&](const EventRecord& e) {
                     last_t = std::max(last_t, e.t);
                     if (e.kind == "missed") ++rep.missed_count;
                     if (e.kind == "neglect" && e.start && e.end) neglect.emplace_back(*e.start, *e.end);
                     if (e.kind == "episode_end") end = e.t;
                   },
               },
               r);
  }
  rep.deviation_time_sum_m = deviation_time_sum(samples);
  rep.deviation_progress_sum_m = deviation_progress_sum(samples);
  rep.neglected_avg_s = neglected_avg(neglect);
  rep.mouse_travel_cm = mouse_travel(pointer);
  rep.aoi_shares = aoi_shares(aoi, end.value_or(last_t));
  return rep;
}

std::string report_to_json(const Report& r) {
  json shares;
  for (std::size_t k = 0; k < 4; ++k) shares[kAoiKeys[k]] = r.aoi_shares[k];
  const json j{{"missed_count", r.missed_count},
               {"deviation_time_sum_m", r.deviation_time_sum_m},
               {"deviation_progress_sum_m", r.deviation_progress_sum_m},
               {"neglected_avg_s", r.neglected_avg_s},
               {"mouse_travel_cm", r.mouse_travel_cm},
               {"aoi_shares", shares},
               {"config", r.config_json.empty() ? json::object() : json::parse(r.config_json)}};
  return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte == 0 ? 1 : static_cast<std::size_t>(
                                           std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n') + 1),
                     std::string("malformed report: ") + e.what());
  }
  try {
    Report r;
    r.missed_count = j.at("missed_count").get<int>();
    r.deviation_time_sum_m = j.at("deviation_time_sum_m").get<double>();
    r.deviation_progress_sum_m = j.at("deviation_progress_sum_m").get<double>();
    r.neglected_avg_s = j.at("neglected_avg_s").get<double>();
    r.mouse_travel_cm = j.at("mouse_travel_cm").get<double>();
    for (std::size_t k = 0; k < 4; ++k) r.aoi_shares[k] = j.at("aoi_shares").at(kAoiKeys[k]).get<double>();
    r.config_json = j.at("config").dump();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("bad report: ") + e.what());
  }
}

void write_report(const std::string& path, const Report& r) { spill(path, report_to_json(r)); }

Report read_report(const std::string& path) { return report_from_json(slurp(path)); }

}  // namespace rasim
