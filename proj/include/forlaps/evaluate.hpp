#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forlaps/csv.hpp"
#include "forlaps/diagnostics.hpp"
#include "forlaps/distance.hpp"
#include "forlaps/error.hpp"
#include "forlaps/format.hpp"
#include "forlaps/log_types.hpp"
#include "forlaps/policy.hpp"

namespace forlaps {

inline constexpr double kSecondsPerDay = 86400.0;

struct ScheduledActivity {
  std::string activity;
  std::int64_t duration_s = 0;
  TaskStatus status = TaskStatus::Neutral;

  friend auto operator<=>(const ScheduledActivity&, const ScheduledActivity&) = default;
};

/// Strictly sequential execution of activities with their observed durations.
struct ReplaySchedule {
  std::vector<ScheduledActivity> items;

  /// Index of the first Disapproved activity.
  std::optional<std::size_t> failure_index() const {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].status == TaskStatus::Disapproved) return i;
    }
    return std::nullopt;
  }

  /// Sum of durations up to and including the failure point (all if none).
  std::int64_t span() const {
    const auto f = failure_index();
    const std::size_t end = f ? *f + 1 : items.size();
    std::int64_t s = 0;
    for (std::size_t i = 0; i < end; ++i) s += items[i].duration_s;
    return s;
  }

  /// Time spent on Approved activities before the first disapproval.
  std::int64_t wasted() const {
    const auto f = failure_index();
    if (!f) return 0;
    std::int64_t w = 0;
    for (std::size_t i = 0; i < *f; ++i) {
      if (items[i].status == TaskStatus::Approved) w += items[i].duration_s;
    }
    return w;
  }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (const auto& a : items) s += a.duration_s;
    return s;
  }
};

struct SchedulePair {
  std::string case_id;
  ReplaySchedule actual;
  ReplaySchedule prescribed;
  bool partial = false;  // the policy rollout needed its fallback
};

/// Lower median of all within-trace gaps, in whole seconds (0 if none).
inline std::int64_t median_activity_seconds(const EventLog& log) {
  std::vector<std::int64_t> gaps;
  for (const auto& t : log.traces()) {
    for (std::size_t i = 1; i < t.size(); ++i) {
      gaps.push_back(std::chrono::duration_cast<std::chrono::seconds>(t.events[i].timestamp -
                                                                      t.events[i - 1].timestamp)
                         .count());
    }
  }
  if (gaps.empty()) return 0;
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>((gaps.size() - 1) / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

/// Each activity lasts until the next event; the last one gets `last_duration_s`.
inline ReplaySchedule actual_schedule(const Trace& trace, std::int64_t last_duration_s) {
  ReplaySchedule s;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace.events[i];
    std::int64_t d = last_duration_s;
    if (i + 1 < trace.size()) {
      d = std::chrono::duration_cast<std::chrono::seconds>(trace.events[i + 1].timestamp - e.timestamp).count();
    }
    s.items.push_back(ScheduledActivity{e.activity, d, e.status});
  }
  return s;
}

/// The policy's ordering of a trace's own activities. Repeated labels stay
/// together in their original relative order.
inline std::pair<std::vector<std::string>, bool> prescribed_order(const Trace& trace, const Policy& policy) {
  const auto acts = trace.activities();
  auto [order, partial] = rollout_labels(policy, acts);
  std::vector<std::string> out;
  out.reserve(acts.size());
  for (const auto& label : order) {
    const auto n = std::count(acts.begin(), acts.end(), label);
    out.insert(out.end(), static_cast<std::size_t>(n), label);
  }
  return {std::move(out), partial};
}

/// Actual order versus the policy's order of the same activities. Each
/// activity keeps its own duration and status.
inline SchedulePair replay_trace(const Trace& trace, const Policy& policy, std::int64_t last_duration_s,
                                 std::optional<StateMode> expected_mode = std::nullopt) {
  if (expected_mode && *expected_mode != policy.mode()) {
    throw Error(ErrorKind::Config, "policy mode '" + std::string(to_string(policy.mode())) +
                                       "' does not match evaluation mode '" +
                                       std::string(to_string(*expected_mode)) + "'");
  }
  SchedulePair out;
  out.case_id = trace.case_id;
  out.actual = actual_schedule(trace, last_duration_s);
  auto [order, partial] = prescribed_order(trace, policy);
  out.partial = partial;
  std::vector<bool> used(out.actual.items.size(), false);
  for (const auto& label : order) {
    for (std::size_t i = 0; i < out.actual.items.size(); ++i) {
      if (!used[i] && out.actual.items[i].activity == label) {
        used[i] = true;
        out.prescribed.items.push_back(out.actual.items[i]);
        break;
      }
    }
  }
  return out;
}

struct TraceKpi {
  std::string case_id;
  std::int64_t actual_span_s = 0;
  std::int64_t prescribed_span_s = 0;
  std::int64_t saved_time_span_s = 0;
  std::int64_t actual_wasted_s = 0;
  std::int64_t prescribed_wasted_s = 0;
  std::int64_t saved_resource_time_s = 0;
};

struct KpiReport {
  std::vector<TraceKpi> traces;
  std::int64_t total_saved_time_span_s = 0;
  std::int64_t total_saved_resource_time_s = 0;
  double mean_saved_time_span_days = 0.0;
  double mean_saved_resource_time_days = 0.0;
  double baseline_per_activity_days = 0.0;  // mean activity duration in the actual schedules
  double baseline_per_case_days = 0.0;      // mean actual span
  double resource_opt_pct = 0.0;            // mean saved resource time / baseline per activity
  double span_opt_pct = 0.0;                // mean saved span / baseline per case
};

inline KpiReport kpi_aggregate(const std::vector<SchedulePair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::Argument, "KPI aggregation needs at least one schedule pair");
  KpiReport r;
  std::int64_t activity_time = 0;
  std::size_t activity_count = 0;
  std::int64_t actual_span_total = 0;
  for (const auto& p : pairs) {
    TraceKpi k;
    k.case_id = p.case_id;
    k.actual_span_s = p.actual.span();
    k.prescribed_span_s = p.prescribed.span();
    k.saved_time_span_s = k.actual_span_s - k.prescribed_span_s;
    k.actual_wasted_s = p.actual.wasted();
    k.prescribed_wasted_s = p.prescribed.wasted();
    k.saved_resource_time_s = k.actual_wasted_s - k.prescribed_wasted_s;
    r.total_saved_time_span_s += k.saved_time_span_s;
    r.total_saved_resource_time_s += k.saved_resource_time_s;
    activity_time += p.actual.total();
    activity_count += p.actual.items.size();
    actual_span_total += k.actual_span_s;
    r.traces.push_back(std::move(k));
  }
  const double n = static_cast<double>(pairs.size());
  r.mean_saved_time_span_days = static_cast<double>(r.total_saved_time_span_s) / n / kSecondsPerDay;
  r.mean_saved_resource_time_days = static_cast<double>(r.total_saved_resource_time_s) / n / kSecondsPerDay;
  if (activity_count > 0) {
    r.baseline_per_activity_days =
        static_cast<double>(activity_time) / static_cast<double>(activity_count) / kSecondsPerDay;
  }
  r.baseline_per_case_days = static_cast<double>(actual_span_total) / n / kSecondsPerDay;
  if (r.baseline_per_activity_days > 0.0) {
    r.resource_opt_pct = 100.0 * r.mean_saved_resource_time_days / r.baseline_per_activity_days;
  }
  if (r.baseline_per_case_days > 0.0) r.span_opt_pct = 100.0 * r.mean_saved_time_span_days / r.baseline_per_case_days;
  return r;
}

/// Replays every trace of `log` and aggregates. The last activity of each
/// trace lasts `last_duration_s`, or the log's median gap when unset.
inline KpiReport replay_log(const EventLog& log, const Policy& policy,
                            std::optional<std::int64_t> last_duration_s = std::nullopt) {
  const std::int64_t last = last_duration_s.value_or(median_activity_seconds(log));
  std::vector<SchedulePair> pairs;
  pairs.reserve(log.size());
  for (const auto& t : log.traces()) pairs.push_back(replay_trace(t, policy, last));
  return kpi_aggregate(pairs);
}

inline nlohmann::ordered_json kpi_to_json(const KpiReport& r, const std::string& model = "FORLAPS") {
  using nlohmann::ordered_json;
  ordered_json traces = ordered_json::array();
  for (const auto& k : r.traces) {
    traces.push_back(ordered_json{{"case_id", k.case_id},
                                  {"actual_span_s", k.actual_span_s},
                                  {"prescribed_span_s", k.prescribed_span_s},
                                  {"saved_time_span_s", k.saved_time_span_s},
                                  {"actual_wasted_s", k.actual_wasted_s},
                                  {"prescribed_wasted_s", k.prescribed_wasted_s},
                                  {"saved_resource_time_s", k.saved_resource_time_s}});
  }
  ordered_json doc;
  doc["model"] = model;
  doc["traces"] = std::move(traces);
  doc["total_saved_resource_time_s"] = r.total_saved_resource_time_s;
  doc["total_saved_time_span_s"] = r.total_saved_time_span_s;
  doc["saved_resource_time_days"] = r.mean_saved_resource_time_days;
  doc["resource_opt_pct"] = r.resource_opt_pct;
  doc["saved_time_span_days"] = r.mean_saved_time_span_days;
  doc["span_opt_pct"] = r.span_opt_pct;
  doc["baseline_per_activity_days"] = r.baseline_per_activity_days;
  doc["baseline_per_case_days"] = r.baseline_per_case_days;
  return doc;
}

/// Rows in the layout: model, saved resource time, opt%, saved time span, opt%.
inline std::string kpi_to_csv(const KpiReport& r, const std::string& model = "FORLAPS") {
  std::string out = "model,saved_resource_time_days,resource_opt_pct,saved_time_span_days,span_opt_pct\n";
  out += model + "," + format_double(r.mean_saved_resource_time_days) + "," + format_double(r.resource_opt_pct) +
         "," + format_double(r.mean_saved_time_span_days) + "," + format_double(r.span_opt_pct) + "\n";
  out += "baseline," + format_double(r.baseline_per_activity_days) + ",," + format_double(r.baseline_per_case_days) +
         ",\n";
  return out;
}

/// Returns the recommended activity sequence for a test trace, or nullopt
/// when the recommender has nothing for that case.
using Recommender = std::function<std::optional<std::vector<std::string>>(const Trace&)>;

struct NamedRecommender {
  std::string name;
  Recommender recommend;
};

inline NamedRecommender policy_recommender(const Policy& policy, std::string name = "FORLAPS") {
  return {std::move(name), [&policy](const Trace& t) -> std::optional<std::vector<std::string>> {
            return prescribed_order(t, policy).first;
          }};
}

/// External recommender rows `case_id,position,activity`; positions order the
/// activities within each case.
inline std::map<std::string, std::vector<std::string>> parse_recommendations_csv(std::string_view text) {
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorKind::EmptyLog, "recommender file is empty");
  const auto& header = records.front().fields;
  auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::Schema, std::string("recommender file missing column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_case = col("case_id");
  const auto c_pos = col("position");
  const auto c_act = col("activity");
  std::map<std::string, std::vector<std::pair<long long, std::string>>> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    if (f.size() != header.size()) throw RowError(records[i].line, "wrong number of fields");
    long long pos = 0;
    const auto& p = f[c_pos];
    const auto res = std::from_chars(p.data(), p.data() + p.size(), pos);
    if (res.ec != std::errc{} || res.ptr != p.data() + p.size()) {
      throw RowError(records[i].line, "position '" + p + "' is not an integer");
    }
    rows[f[c_case]].emplace_back(pos, f[c_act]);
  }
  std::map<std::string, std::vector<std::string>> out;
  for (auto& [case_id, items] : rows) {
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& seq = out[case_id];
    for (auto& [pos, act] : items) seq.push_back(std::move(act));
  }
  return out;
}

inline NamedRecommender table_recommender(std::map<std::string, std::vector<std::string>> rows, std::string name) {
  return {std::move(name), [rows = std::move(rows)](const Trace& t) -> std::optional<std::vector<std::string>> {
            const auto it = rows.find(t.case_id);
            if (it == rows.end()) return std::nullopt;
            return it->second;
          }};
}

struct MethodDistance {
  std::string method;
  std::optional<double> desired_mean;    // absent when no Desired traces were scored
  std::optional<double> undesired_mean;  // absent when no Undesired traces were scored
  std::size_t n_desired = 0;
  std::size_t n_undesired = 0;
  std::size_t excluded = 0;
};

struct DistanceReport {
  std::string dataset;
  std::vector<MethodDistance> methods;
};

/// Mean Damerau-Levenshtein distance between each recommender's sequence and
/// the ground-truth activity sequence, grouped by the trace's outcome.
inline DistanceReport distance_eval(const EventLog& test, const std::vector<NamedRecommender>& recommenders,
                                    std::string dataset = "dataset", Warnings* warnings = nullptr) {
  if (!test.labeled()) throw Error(ErrorKind::Argument, "distance evaluation needs outcome-labeled traces");
  DistanceReport report;
  report.dataset = std::move(dataset);
  for (const auto& rec : recommenders) {
    MethodDistance m;
    m.method = rec.name;
    double sum_desired = 0.0;
    double sum_undesired = 0.0;
    for (const auto& t : test.traces()) {
      const auto recommended = rec.recommend(t);
      if (!recommended) {
        warn(warnings, rec.name + ": no recommendation for case '" + t.case_id + "'; excluded");
        ++m.excluded;
        continue;
      }
      const auto d = static_cast<double>(damerau_levenshtein(*recommended, t.activities()));
      if (t.is_desired()) {
        sum_desired += d;
        ++m.n_desired;
      } else {
        sum_undesired += d;
        ++m.n_undesired;
      }
    }
    if (m.n_desired > 0) m.desired_mean = sum_desired / static_cast<double>(m.n_desired);
    if (m.n_undesired > 0) m.undesired_mean = sum_undesired / static_cast<double>(m.n_undesired);
    report.methods.push_back(std::move(m));
  }
  return report;
}

inline nlohmann::ordered_json distance_to_json(const DistanceReport& r) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json methods = ordered_json::array();
  for (const auto& m : r.methods) {
    methods.push_back(ordered_json{{"method", m.method},
                                   {"desired_mean", opt(m.desired_mean)},
                                   {"undesired_mean", opt(m.undesired_mean)},
                                   {"n_desired", m.n_desired},
                                   {"n_undesired", m.n_undesired},
                                   {"excluded", m.excluded}});
  }
  return ordered_json{{"dataset", r.dataset}, {"methods", std::move(methods)}};
}

inline std::string distance_to_csv(const DistanceReport& r) {
  std::string out = "dataset,method,desired_mean,undesired_mean,n_desired,n_undesired,excluded\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; };
  for (const auto& m : r.methods) {
    out += r.dataset + "," + m.method + "," + cell(m.desired_mean) + "," + cell(m.undesired_mean) + "," +
           std::to_string(m.n_desired) + "," + std::to_string(m.n_undesired) + "," + std::to_string(m.excluded) +
           "\n";
  }
  return out;
}

}  // namespace forlaps
