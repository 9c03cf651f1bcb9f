#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forlaps/timestamp.hpp"

namespace forlaps {

enum class TaskStatus { Approved, Disapproved, Neutral };

constexpr std::string_view to_string(TaskStatus s) noexcept {
  switch (s) {
    case TaskStatus::Approved: return "Approved";
    case TaskStatus::Disapproved: return "Disapproved";
    case TaskStatus::Neutral: return "Neutral";
  }
  return "Neutral";
}

/// Case-insensitive; accepts a few common synonyms. Empty means Neutral.
inline std::optional<TaskStatus> parse_status(std::string_view text) {
  std::string lower;
  lower.reserve(text.size());
  for (const char c : text) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
  if (lower.empty() || lower == "neutral") return TaskStatus::Neutral;
  if (lower == "approved" || lower == "approve" || lower == "accepted" || lower == "ok") {
    return TaskStatus::Approved;
  }
  if (lower == "disapproved" || lower == "rejected" || lower == "declined" || lower == "failed") {
    return TaskStatus::Disapproved;
  }
  return std::nullopt;
}

struct Event {
  std::string case_id;
  std::string activity;
  Timestamp timestamp{};
  TaskStatus status = TaskStatus::Neutral;
  std::map<std::string, std::string> extra;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class Outcome { Desired, Undesired };

constexpr std::string_view to_string(Outcome o) noexcept {
  return o == Outcome::Desired ? "Desired" : "Undesired";
}

/// Trace-level outcome. A Desired label always carries zero waste.
struct OutcomeLabel {
  Outcome categorical = Outcome::Desired;
  std::int64_t wasted_activities = 0;
  Millis wasted_time{0};

  static OutcomeLabel desired() { return {}; }

  friend bool operator==(const OutcomeLabel&, const OutcomeLabel&) = default;
};

/// Events of one case, sorted by timestamp (stable with respect to input order).
struct Trace {
  std::string case_id;
  std::vector<Event> events;
  std::optional<OutcomeLabel> outcome;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
  Timestamp start() const { return events.front().timestamp; }
  Timestamp end() const { return events.back().timestamp; }
  Millis duration() const { return events.empty() ? Millis{0} : end() - start(); }

  std::vector<std::string> activities() const {
    std::vector<std::string> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(e.activity);
    return out;
  }

  bool contains(std::string_view activity) const {
    return std::any_of(events.begin(), events.end(),
                       [&](const Event& e) { return e.activity == activity; });
  }

  bool is_desired() const { return outcome && outcome->categorical == Outcome::Desired; }

  void sort_events() {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Immutable-by-convention collection of traces, ordered by first appearance
/// of each case id in the source.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<Trace> traces) : traces_(std::move(traces)) {}

  const std::vector<Trace>& traces() const noexcept { return traces_; }
  std::vector<Trace>& mutable_traces() noexcept { return traces_; }
  std::size_t size() const noexcept { return traces_.size(); }
  bool empty() const noexcept { return traces_.empty(); }
  const Trace& operator[](std::size_t i) const { return traces_[i]; }

  std::size_t event_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : traces_) n += t.size();
    return n;
  }

  /// Sorted distinct activity labels.
  std::vector<std::string> activities() const {
    std::set<std::string> labels;
    for (const auto& t : traces_) {
      for (const auto& e : t.events) labels.insert(e.activity);
    }
    return {labels.begin(), labels.end()};
  }

  /// True when at least one event carries a non-Neutral status.
  bool has_task_status() const noexcept {
    for (const auto& t : traces_) {
      for (const auto& e : t.events) {
        if (e.status != TaskStatus::Neutral) return true;
      }
    }
    return false;
  }

  bool labeled() const noexcept {
    return std::all_of(traces_.begin(), traces_.end(), [](const Trace& t) { return t.outcome.has_value(); });
  }

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  std::vector<Trace> traces_;
};

}  // namespace forlaps
