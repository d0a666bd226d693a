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

#include "latentsearch/bench.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

namespace latentsearch {

std::string to_string(SystemLabel s) {
  return s == SystemLabel::hybrid ? "hybrid" : "flat_baseline";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::flat_baseline: return "flat_baseline";
    case Verdict::hybrid: return "hybrid";
    case Verdict::tie: return "tie";
  }
  return "tie";
}

std::string to_string(TimingMode m) {
  return m == TimingMode::median ? "median" : "single_shot";
}

SystemLabel system_label_from_string(const std::string& s) {
  if (s == "hybrid") return SystemLabel::hybrid;
  if (s == "flat_baseline") return SystemLabel::flat_baseline;
  throw ParseError("unknown system label '" + s + "'");
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "hybrid") return Verdict::hybrid;
  if (s == "flat_baseline") return Verdict::flat_baseline;
  if (s == "tie") return Verdict::tie;
  throw ParseError("unknown verdict '" + s + "'");
}

TimingMode timing_mode_from_string(const std::string& s) {
  if (s == "median") return TimingMode::median;
  if (s == "single_shot") return TimingMode::single_shot;
  throw ParseError("unknown timing mode '" + s + "'");
}

void UtilityWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw ArgumentError("utility weights must be finite and non-negative");
  }
}

double avg_similarity(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("average of an empty score list");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

double utility(double avg_similarity, double query_time_seconds,
               const UtilityWeights& weights) {
  return weights.alpha * avg_similarity - weights.beta * query_time_seconds;
}

QueryMetrics make_metrics(const SystemRun& run, const UtilityWeights& weights) {
  weights.validate();
  if (run.query_time_seconds < 0.0) {
    throw ArgumentError("query time must be non-negative");
  }
  QueryMetrics m;
  m.system = run.system;
  m.query_time_seconds = run.query_time_seconds;
  m.avg_similarity = run.avg_similarity;
  m.utility = utility(run.avg_similarity, run.query_time_seconds, weights);
  m.alpha = weights.alpha;
  m.beta = weights.beta;
  m.mode = run.mode;
  m.repeats = run.repeats;
  m.cross_space_similarity = run.cross_space_similarity;
  return m;
}

const QueryMetrics& ComparisonReport::metrics(SystemLabel s) const {
  for (const auto& m : systems) {
    if (m.system == s) return m;
  }
  throw ArgumentError("report has no " + to_string(s) + " entry");
}

ComparisonReport compare(const SystemRun& a, const SystemRun& b,
                         const UtilityWeights& weights, std::string query_text) {
  if (a.k != b.k) {
    throw ArgumentError("systems were evaluated with different k (" +
                        std::to_string(a.k) + " vs " + std::to_string(b.k) + ")");
  }
  if (a.system == b.system) {
    throw ArgumentError("both runs are labelled " + to_string(a.system));
  }
  ComparisonReport report;
  const SystemRun& flat = a.system == SystemLabel::flat_baseline ? a : b;
  const SystemRun& hybrid = a.system == SystemLabel::hybrid ? a : b;
  report.systems = {make_metrics(flat, weights), make_metrics(hybrid, weights)};

  const double diff = report.systems[1].utility - report.systems[0].utility;
  report.utility_margin = std::abs(diff);
  if (report.utility_margin < kTieTolerance) {
    report.dominant = Verdict::tie;
  } else {
    report.dominant = diff > 0.0 ? Verdict::hybrid : Verdict::flat_baseline;
  }
  report.query_text = std::move(query_text);
  report.k = a.k;
  report.timestamp = utc_timestamp();
  report.hardware = hardware_note();
  return report;
}

namespace {

nlohmann::json metrics_to_json(const QueryMetrics& m) {
  nlohmann::json j{{"system", to_string(m.system)},
                   {"query_time_seconds", m.query_time_seconds},
                   {"avg_similarity", m.avg_similarity},
                   {"utility", m.utility},
                   {"alpha", m.alpha},
                   {"beta", m.beta},
                   {"mode", to_string(m.mode)},
                   {"repeats", m.repeats}};
  j["cross_space_similarity"] = m.cross_space_similarity
                                    ? nlohmann::json(*m.cross_space_similarity)
                                    : nlohmann::json(nullptr);
  return j;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string render_text(const ComparisonReport& r) {
  std::ostringstream os;
  os << "query: " << r.query_text << "\n";
  os << "k: " << r.k << "\n";
  for (const auto& m : r.systems) {
    os << "\n[" << to_string(m.system) << "]\n";
    os << "  query time (s):     " << fixed(m.query_time_seconds, 6) << "  ("
       << to_string(m.mode) << ", repeats " << m.repeats << ")\n";
    os << "  average similarity: " << fixed(m.avg_similarity) << "\n";
    if (m.cross_space_similarity) {
      os << "  cross-space sim.:   " << fixed(*m.cross_space_similarity) << "\n";
    }
    os << "  utility:            " << fixed(m.utility) << "  (alpha " << m.alpha
       << ", beta " << m.beta << ")\n";
  }
  os << "\nutility margin: " << fixed(r.utility_margin) << "\n";
  os << "dominant strategy: " << to_string(r.dominant) << "\n";
  os << "timestamp: " << r.timestamp << "\n";
  os << "hardware: " << r.hardware << "\n";
  return os.str();
}

}  // namespace

std::string emit_report(const ComparisonReport& report, ReportFormat format) {
  if (format == ReportFormat::human_text) return render_text(report);

  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["query_text"] = report.query_text;
  j["k"] = report.k;
  j["timestamp"] = report.timestamp;
  j["hardware"] = report.hardware;
  if (!report.systems.empty()) {
    j["alpha"] = report.systems.front().alpha;
    j["beta"] = report.systems.front().beta;
    j["mode"] = to_string(report.systems.front().mode);
  }
  j["systems"] = nlohmann::json::array();
  for (const auto& m : report.systems) j["systems"].push_back(metrics_to_json(m));
  j["margin"] = report.utility_margin;
  j["dominant"] = to_string(report.dominant);
  return j.dump(2) + "\n";
}

ComparisonReport parse_report_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw ParseError("unsupported report schema version");
    }
    ComparisonReport r;
    r.query_text = j.at("query_text").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.hardware = j.at("hardware").get<std::string>();
    r.utility_margin = j.at("margin").get<double>();
    r.dominant = verdict_from_string(j.at("dominant").get<std::string>());
    for (const auto& s : j.at("systems")) {
      QueryMetrics m;
      m.system = system_label_from_string(s.at("system").get<std::string>());
      m.query_time_seconds = s.at("query_time_seconds").get<double>();
      m.avg_similarity = s.at("avg_similarity").get<double>();
      m.utility = s.at("utility").get<double>();
      m.alpha = s.at("alpha").get<double>();
      m.beta = s.at("beta").get<double>();
      m.mode = timing_mode_from_string(s.at("mode").get<std::string>());
      m.repeats = s.at("repeats").get<std::size_t>();
      if (!s.at("cross_space_similarity").is_null()) {
        m.cross_space_similarity = s.at("cross_space_similarity").get<double>();
      }
      r.systems.push_back(m);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid report JSON: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hardware_note() {
  std::string cpu;
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  if (cpu.empty()) cpu = "unknown cpu";
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " hardware threads, single-threaded run";
}

}  // namespace latentsearch
