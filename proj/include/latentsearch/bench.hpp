// Copyright 2026-present the latentsearch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "latentsearch/error.hpp"

namespace latentsearch {

enum class SystemLabel { flat_baseline, hybrid };
enum class Verdict { flat_baseline, hybrid, tie };
enum class TimingMode { single_shot, median };
enum class ReportFormat { human_text, json };

std::string to_string(SystemLabel s);
std::string to_string(Verdict v);
std::string to_string(TimingMode m);
SystemLabel system_label_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);
TimingMode timing_mode_from_string(const std::string& s);

struct UtilityWeights {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
};

/// Arithmetic mean; throws ArgumentError on an empty list.
double avg_similarity(std::span<const double> scores);

/// alpha * avg_similarity - beta * query_time. No clipping.
double utility(double avg_similarity, double query_time_seconds,
               const UtilityWeights& weights);

/// What one system measured for one query.
struct SystemRun {
  SystemLabel system = SystemLabel::flat_baseline;
  std::size_t k = 0;
  double avg_similarity = 0.0;
  double query_time_seconds = 0.0;
  TimingMode mode = TimingMode::single_shot;
  std::size_t repeats = 1;
  /// Original-space similarity of the hybrid hits, informational only.
  std::optional<double> cross_space_similarity;
};

struct QueryMetrics {
  SystemLabel system = SystemLabel::flat_baseline;
  double query_time_seconds = 0.0;
  double avg_similarity = 0.0;
  double utility = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  TimingMode mode = TimingMode::single_shot;
  std::size_t repeats = 1;
  std::optional<double> cross_space_similarity;
};

QueryMetrics make_metrics(const SystemRun& run, const UtilityWeights& weights);

/// Utility gap below which two systems are declared a tie.
inline constexpr double kTieTolerance = 1e-9;

struct ComparisonReport {
  std::vector<QueryMetrics> systems;
  double utility_margin = 0.0;
  Verdict dominant = Verdict::tie;
  std::string query_text;
  std::size_t k = 0;
  std::string timestamp;
  std::string hardware;

  const QueryMetrics& metrics(SystemLabel s) const;
};

/// Scores both runs under the same weights. Throws ArgumentError when the
/// runs used different k or the same system label. The result does not
/// depend on argument order.
ComparisonReport compare(const SystemRun& a, const SystemRun& b,
                         const UtilityWeights& weights,
                         std::string query_text = {});

inline constexpr int kReportSchemaVersion = 1;

std::string emit_report(const ComparisonReport& report, ReportFormat format);
/// Parses the JSON form produced by emit_report.
ComparisonReport parse_report_json(const std::string& text);

/// UTC now as ISO-8601 and a short host description for reports.
std::string utc_timestamp();
std::string hardware_note();

template <typename T>
struct Timed {
  T result;
  double seconds = 0.0;
};

/// Runs `action` `repeats` times on a monotonic clock and reports the
/// median elapsed time with the result of the last run.
template <typename Action>
auto time_query(Action&& action, std::size_t repeats = 1)
    -> Timed<std::invoke_result_t<Action&>> {
  using Result = std::invoke_result_t<Action&>;
  static_assert(!std::is_void_v<Result>, "time_query needs an action that returns a value");
  if (repeats == 0) throw ArgumentError("repeats must be positive");
  std::vector<double> samples;
  samples.reserve(repeats);
  std::optional<Result> last;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    last.emplace(action());
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  const double median = samples.size() % 2 == 1
                            ? samples[mid]
                            : 0.5 * (samples[mid - 1] + samples[mid]);
  return {std::move(*last), median};
}

}  // namespace latentsearch
