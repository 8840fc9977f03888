#include "readcx/gaze.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "json.hpp"

#include "readcx/error.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::Schema, "missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!text::trim(line).empty()) return true;
    }
    return false;
  };
  if (!next()) throw Error(ErrorKind::Schema, "CSV input has no header");
  for (auto f : text::split(line, ',')) t.header.emplace_back(text::trim(f));
  while (next()) {
    std::vector<std::string> row;
    for (auto f : text::split(line, ',')) row.emplace_back(text::trim(f));
    if (row.size() != t.header.size())
      throw ParseError(line_no, "expected " + std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  return t;
}

double number_at(const CsvTable& t, std::size_t row, std::size_t col) {
  double v = 0.0;
  if (!text::parse_double(t.rows[row][col], v))
    throw ParseError(t.line_numbers[row], "non-numeric value in column '" + t.header[col] + "'");
  return v;
}

}  // namespace

std::string_view to_string(GazeMetric m) {
  switch (m) {
    case GazeMetric::FixationCount: return "fixation_count";
    case GazeMetric::TotalFixationDuration: return "total_fixation_duration";
    case GazeMetric::FirstPassDuration: return "first_pass_duration";
    case GazeMetric::RegressionDuration: return "regression_duration";
  }
  return "";
}

std::string_view short_name(GazeMetric m) {
  switch (m) {
    case GazeMetric::FixationCount: return "FC";
    case GazeMetric::TotalFixationDuration: return "TFD";
    case GazeMetric::FirstPassDuration: return "FPD";
    case GazeMetric::RegressionDuration: return "RD";
  }
  return "";
}

GazeMetric parse_gaze_metric(std::string_view name) {
  for (auto m : kGazeMetrics) {
    if (name == to_string(m) || name == short_name(m)) return m;
  }
  throw Error(ErrorKind::Argument, "unknown eye-tracking metric '" + std::string(name) + "'");
}

double GazeMetrics::get(GazeMetric m) const {
  switch (m) {
    case GazeMetric::FixationCount: return fixation_count;
    case GazeMetric::TotalFixationDuration: return total_fixation_duration;
    case GazeMetric::FirstPassDuration: return first_pass_duration;
    case GazeMetric::RegressionDuration: return regression_duration;
  }
  return 0.0;
}

void GazeMetrics::set(GazeMetric m, double v) {
  switch (m) {
    case GazeMetric::FixationCount: fixation_count = v; break;
    case GazeMetric::TotalFixationDuration: total_fixation_duration = v; break;
    case GazeMetric::FirstPassDuration: first_pass_duration = v; break;
    case GazeMetric::RegressionDuration: regression_duration = v; break;
  }
}

std::vector<ParticipantMetrics> aggregate_fixations(const std::vector<Fixation>& fixations,
                                                    const SentenceBounds& bounds) {
  // Group by participant, keeping first-appearance order.
  std::vector<std::string> participants;
  std::unordered_map<std::string, std::vector<const Fixation*>> by_participant;
  for (const auto& f : fixations) {
    auto [it, inserted] = by_participant.try_emplace(f.participant_id);
    if (inserted) participants.push_back(f.participant_id);
    it->second.push_back(&f);
  }

  std::vector<ParticipantMetrics> out;
  for (const auto& pid : participants) {
    struct State {
      GazeMetrics m;
      int max_token = 0;
      bool first_pass_open = true;
    };
    std::map<std::string, State> per_sentence;
    const std::string* current = nullptr;
    long long last_seq = 0;
    bool first = true;

    for (const Fixation* f : by_participant[pid]) {
      if (!first && f->seq <= last_seq)
        throw Error(ErrorKind::Ordering, "participant '" + pid + "': seq " + std::to_string(f->seq) +
                                             " does not follow " + std::to_string(last_seq));
      first = false;
      last_seq = f->seq;
      if (!(f->duration_ms > 0.0))
        throw Error(ErrorKind::Range, "participant '" + pid + "': fixation duration must be positive");
      const auto b = bounds.find(f->sentence_id);
      if (b == bounds.end())
        throw Error(ErrorKind::Mapping, "fixation on unknown sentence '" + f->sentence_id + "'");
      if (f->token_index < 1 || f->token_index > b->second)
        throw Error(ErrorKind::Mapping, "token index " + std::to_string(f->token_index) +
                                            " outside sentence '" + f->sentence_id + "'");

      if (current && *current != f->sentence_id) per_sentence[*current].first_pass_open = false;
      current = &f->sentence_id;

      auto& st = per_sentence[f->sentence_id];
      st.m.sentence_id = f->sentence_id;
      st.m.fixation_count += 1.0;
      st.m.total_fixation_duration += f->duration_ms;
      if (st.first_pass_open) st.m.first_pass_duration += f->duration_ms;
      if (f->token_index < st.max_token) st.m.regression_duration += f->duration_ms;
      st.max_token = std::max(st.max_token, f->token_index);
    }
    for (auto& [sid, st] : per_sentence) out.push_back({pid, st.m});
  }
  return out;
}

GazeMetrics participant_metrics(const std::vector<ParticipantMetrics>& metrics, const std::string& participant_id,
                                const std::string& sentence_id) {
  for (const auto& pm : metrics) {
    if (pm.participant_id == participant_id && pm.metrics.sentence_id == sentence_id) return pm.metrics;
  }
  GazeMetrics none;
  none.sentence_id = sentence_id;
  return none;
}

GazeMetrics average_participants(const std::vector<ParticipantMetrics>& metrics,
                                 const std::string& sentence_id) {
  GazeMetrics avg;
  avg.sentence_id = sentence_id;
  int n = 0;
  for (const auto& pm : metrics) {
    if (pm.metrics.sentence_id != sentence_id || pm.metrics.fixation_count <= 0.0) continue;
    ++n;
    for (auto m : kGazeMetrics) avg.set(m, avg.get(m) + pm.metrics.get(m));
  }
  if (n == 0) throw Error(ErrorKind::MissingData, "no participant read sentence '" + sentence_id + "'");
  for (auto m : kGazeMetrics) avg.set(m, avg.get(m) / n);
  return avg;
}

std::vector<GazeMetrics> average_all(const std::vector<ParticipantMetrics>& metrics) {
  std::map<std::string, std::pair<GazeMetrics, int>> acc;
  for (const auto& pm : metrics) {
    if (pm.metrics.fixation_count <= 0.0) continue;
    auto& [sum, n] = acc[pm.metrics.sentence_id];
    sum.sentence_id = pm.metrics.sentence_id;
    for (auto m : kGazeMetrics) sum.set(m, sum.get(m) + pm.metrics.get(m));
    ++n;
  }
  std::vector<GazeMetrics> out;
  for (auto& [sid, entry] : acc) {
    auto& [sum, n] = entry;
    for (auto m : kGazeMetrics) sum.set(m, sum.get(m) / n);
    out.push_back(sum);
  }
  return out;
}

ScaledDataset scale_metrics(const std::vector<GazeMetrics>& dataset) {
  if (dataset.size() < 2)
    throw Error(ErrorKind::DegenerateScale, "scaling needs at least two sentences");
  ScaledDataset out;
  for (std::size_t k = 0; k < kNumGazeMetrics; ++k) {
    const auto m = kGazeMetrics[k];
    auto [lo, hi] = std::minmax_element(dataset.begin(), dataset.end(),
                                        [m](const auto& a, const auto& b) { return a.get(m) < b.get(m); });
    out.ranges[k] = {lo->get(m), hi->get(m)};
    if (!(out.ranges[k].max > out.ranges[k].min))
      throw Error(ErrorKind::DegenerateScale, "metric '" + std::string(to_string(m)) + "' is constant");
  }
  out.rows.reserve(dataset.size());
  for (const auto& row : dataset) {
    GazeMetrics s;
    s.sentence_id = row.sentence_id;
    for (std::size_t k = 0; k < kNumGazeMetrics; ++k) {
      const auto m = kGazeMetrics[k];
      const auto& r = out.ranges[k];
      s.set(m, 100.0 * (row.get(m) - r.min) / (r.max - r.min));
    }
    out.rows.push_back(std::move(s));
  }
  return out;
}

std::vector<Fixation> read_fixations_csv(std::istream& in) {
  const auto t = read_csv(in);
  const auto c_pid = t.column("participant_id");
  const auto c_sid = t.column("sentence_id");
  const auto c_seq = t.column("seq");
  const auto c_tok = t.column("token_index");
  const auto c_dur = t.column("duration_ms");
  std::vector<Fixation> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Fixation f;
    f.participant_id = t.rows[r][c_pid];
    f.sentence_id = t.rows[r][c_sid];
    long long tok = 0;
    if (!text::parse_int(t.rows[r][c_seq], f.seq) || !text::parse_int(t.rows[r][c_tok], tok))
      throw ParseError(t.line_numbers[r], "seq and token_index must be integers");
    f.token_index = static_cast<int>(tok);
    f.duration_ms = number_at(t, r, c_dur);
    if (!(f.duration_ms > 0.0)) throw Error(ErrorKind::Range, "line " + std::to_string(t.line_numbers[r]) +
                                                                  ": duration_ms must be positive");
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<GazeMetrics> import_sentence_metrics(std::istream& in) {
  const auto t = read_csv(in);
  const auto c_sid = t.column("sentence_id");
  std::array<std::size_t, kNumGazeMetrics> cols{};
  for (std::size_t k = 0; k < kNumGazeMetrics; ++k) cols[k] = t.column(to_string(kGazeMetrics[k]));
  std::vector<GazeMetrics> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    GazeMetrics g;
    g.sentence_id = t.rows[r][c_sid];
    for (std::size_t k = 0; k < kNumGazeMetrics; ++k) {
      const double v = number_at(t, r, cols[k]);
      if (v < 0.0)
        throw Error(ErrorKind::Range, "line " + std::to_string(t.line_numbers[r]) + ": negative " +
                                          std::string(to_string(kGazeMetrics[k])));
      g.set(kGazeMetrics[k], v);
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GazeMetrics> import_sentence_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open metrics CSV '" + path + "'");
  return import_sentence_metrics(in);
}

void write_metrics_csv(const std::vector<GazeMetrics>& rows, std::ostream& out) {
  out << "sentence_id";
  for (auto m : kGazeMetrics) out << ',' << to_string(m);
  out << '\n';
  for (const auto& r : rows) {
    out << r.sentence_id;
    for (auto m : kGazeMetrics) out << ',' << text::format_double(r.get(m));
    out << '\n';
  }
}

void write_scaler_json(const ScaledDataset& ds, std::ostream& out) {
  nlohmann::ordered_json j;
  for (std::size_t k = 0; k < kNumGazeMetrics; ++k)
    j[std::string(to_string(kGazeMetrics[k]))] = {{"min", ds.ranges[k].min}, {"max", ds.ranges[k].max}};
  out << j.dump(2) << '\n';
}

}  // namespace readcx
