#pragma once

#include <chrono>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include "forlaps/eventlog.hpp"
#include "forlaps/format.hpp"
#include "forlaps/log_types.hpp"
#include "forlaps/timestamp.hpp"

namespace forlaps::test {

inline std::string data_path(const std::string& name) { return std::string(FORLAPS_TEST_DATA) + "/" + name; }

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(FORLAPS_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Timestamp at_hours(double h) {
  return Timestamp{Millis{static_cast<std::int64_t>(h * 3600'000.0)}} + std::chrono::hours(24 * 365 * 52);
}

using Step = std::tuple<std::string, double, TaskStatus>;  // activity, hour, status

inline Trace make_trace(const std::string& id, std::initializer_list<Step> steps) {
  Trace t;
  t.case_id = id;
  for (const auto& [a, h, s] : steps) t.events.push_back(Event{id, a, at_hours(h), s, {}});
  return t;
}

/// Trace whose events are one hour apart, all Approved except those listed.
inline Trace simple_trace(const std::string& id, const std::vector<std::string>& acts,
                          const std::vector<std::string>& disapproved = {}) {
  Trace t;
  t.case_id = id;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const bool bad = std::find(disapproved.begin(), disapproved.end(), acts[i]) != disapproved.end();
    t.events.push_back(Event{id, acts[i], at_hours(static_cast<double>(i)),
                             bad ? TaskStatus::Disapproved : TaskStatus::Approved, {}});
  }
  return t;
}

inline constexpr auto A = TaskStatus::Approved;
inline constexpr auto X = TaskStatus::Disapproved;
inline constexpr auto N = TaskStatus::Neutral;

}  // namespace forlaps::test
