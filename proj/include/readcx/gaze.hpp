#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace readcx {

/// The four sentence-level reading measures, in the order heads and CSV
/// columns use them.
enum class GazeMetric { FixationCount, TotalFixationDuration, FirstPassDuration, RegressionDuration };

inline constexpr std::size_t kNumGazeMetrics = 4;
inline constexpr std::array<GazeMetric, kNumGazeMetrics> kGazeMetrics = {
    GazeMetric::FixationCount, GazeMetric::TotalFixationDuration, GazeMetric::FirstPassDuration,
    GazeMetric::RegressionDuration};

/// Column name, e.g. "total_fixation_duration".
std::string_view to_string(GazeMetric m);
/// Abbreviation: FC, TFD, FPD, RD.
std::string_view short_name(GazeMetric m);
GazeMetric parse_gaze_metric(std::string_view name);

struct Fixation {
  std::string participant_id;
  std::string sentence_id;
  long long seq = 0;
  int token_index = 1;
  double duration_ms = 0.0;
};

struct GazeMetrics {
  std::string sentence_id;
  double fixation_count = 0.0;
  double total_fixation_duration = 0.0;
  double first_pass_duration = 0.0;
  double regression_duration = 0.0;

  double get(GazeMetric m) const;
  void set(GazeMetric m, double v);
};

struct ParticipantMetrics {
  std::string participant_id;
  GazeMetrics metrics;
};

/// Sentence id -> number of tokens; fixations must land inside these bounds.
using SentenceBounds = std::map<std::string, int>;

/// Per participant and sentence reading measures from a chronological log.
/// Fixations are grouped by participant (first appearance order); within a
/// participant `seq` must strictly increase. A participant's first pass over a
/// sentence ends at the first fixation on any other sentence. Regressions are
/// fixations left of the rightmost token fixated so far in the sentence.
/// Only (participant, sentence) pairs with at least one fixation are emitted.
std::vector<ParticipantMetrics> aggregate_fixations(const std::vector<Fixation>& fixations,
                                                    const SentenceBounds& bounds);

/// One participant's metrics for one sentence; all zero when the participant
/// never fixated it.
GazeMetrics participant_metrics(const std::vector<ParticipantMetrics>& metrics, const std::string& participant_id,
                                const std::string& sentence_id);

/// Arithmetic mean over the participants with fixations on `sentence_id`.
GazeMetrics average_participants(const std::vector<ParticipantMetrics>& metrics,
                                 const std::string& sentence_id);

/// Averages every sentence present in `metrics`, sorted by sentence id.
std::vector<GazeMetrics> average_all(const std::vector<ParticipantMetrics>& metrics);

struct ScaleRange {
  double min = 0.0;
  double max = 0.0;
};

struct ScaledDataset {
  std::vector<GazeMetrics> rows;  // values in [0, 100]
  std::array<ScaleRange, kNumGazeMetrics> ranges{};
};

/// Per-metric min-max scaling onto [0, 100].
ScaledDataset scale_metrics(const std::vector<GazeMetrics>& dataset);

std::vector<Fixation> read_fixations_csv(std::istream& in);
std::vector<GazeMetrics> import_sentence_metrics(std::istream& in);
std::vector<GazeMetrics> import_sentence_metrics_file(const std::string& path);
void write_metrics_csv(const std::vector<GazeMetrics>& rows, std::ostream& out);
/// {"fixation_count": {"min": .., "max": ..}, ...}
void write_scaler_json(const ScaledDataset& ds, std::ostream& out);

}  // namespace readcx
