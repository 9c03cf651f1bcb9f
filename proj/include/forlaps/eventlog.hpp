#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "forlaps/csv.hpp"
#include "forlaps/diagnostics.hpp"
#include "forlaps/error.hpp"
#include "forlaps/log_types.hpp"
#include "forlaps/outcome.hpp"
#include "forlaps/random.hpp"
#include "forlaps/timestamp.hpp"

namespace forlaps {

/// Column mapping plus outcome rule for one dataset.
struct LogSchema {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::string timestamp_column = "timestamp";
  std::string timestamp_format = "iso8601";
  std::optional<std::string> status_column;
  char delimiter = ',';
  std::optional<OutcomeRule> outcome;

  /// Schema of the canonical serialization produced by to_csv().
  static LogSchema canonical() {
    LogSchema s;
    s.status_column = "status";
    return s;
  }
};

/// Parses CSV text into traces. Columns not named by the schema are kept as
/// per-event attributes (empty values are dropped).
inline EventLog parse_csv(std::string_view text, const LogSchema& schema) {
  const auto records = csv::parse(text, schema.delimiter);
  if (records.empty()) throw Error(ErrorKind::EmptyLog, "event log is empty (no header row)");

  const auto& header = records.front().fields;
  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::Schema, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t case_col = column_of(schema.case_column);
  const std::size_t activity_col = column_of(schema.activity_column);
  const std::size_t ts_col = column_of(schema.timestamp_column);
  constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);
  const std::size_t status_col =
      schema.status_column ? column_of(*schema.status_column) : kNoColumn;

  std::vector<Trace> traces;
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw RowError(rec.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                   std::to_string(rec.fields.size()));
    }
    Event ev;
    ev.case_id = rec.fields[case_col];
    ev.activity = rec.fields[activity_col];
    if (ev.case_id.empty()) throw RowError(rec.line, "empty case id");
    if (ev.activity.empty()) throw RowError(rec.line, "empty activity");
    const auto ts = parse_timestamp(rec.fields[ts_col], schema.timestamp_format);
    if (!ts) throw RowError(rec.line, "unparseable timestamp '" + rec.fields[ts_col] + "'");
    ev.timestamp = *ts;
    if (status_col != kNoColumn) {
      const auto status = parse_status(rec.fields[status_col]);
      if (!status) throw RowError(rec.line, "unknown status '" + rec.fields[status_col] + "'");
      ev.status = *status;
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == case_col || c == activity_col || c == ts_col || c == status_col) continue;
      if (!rec.fields[c].empty()) ev.extra.emplace(header[c], rec.fields[c]);
    }
    auto [it, inserted] = index_of.try_emplace(ev.case_id, traces.size());
    if (inserted) traces.push_back(Trace{ev.case_id, {}, std::nullopt});
    traces[it->second].events.push_back(std::move(ev));
  }
  if (traces.empty()) throw Error(ErrorKind::EmptyLog, "event log has a header but no events");
  for (auto& t : traces) t.sort_events();
  return EventLog{std::move(traces)};
}

/// Canonical serialization: case_id, activity, timestamp, status, then any
/// extra attributes in name order.
inline std::string to_csv(const EventLog& log) {
  std::set<std::string> extra_columns;
  for (const auto& t : log.traces()) {
    for (const auto& e : t.events) {
      for (const auto& [k, v] : e.extra) extra_columns.insert(k);
    }
  }
  std::vector<std::string> header{"case_id", "activity", "timestamp", "status"};
  header.insert(header.end(), extra_columns.begin(), extra_columns.end());
  std::string out;
  csv::append_row(out, header);
  std::vector<std::string> row;
  for (const auto& t : log.traces()) {
    for (const auto& e : t.events) {
      row.clear();
      row.push_back(e.case_id);
      row.push_back(e.activity);
      row.push_back(format_timestamp(e.timestamp));
      row.emplace_back(to_string(e.status));
      for (const auto& col : extra_columns) {
        const auto it = e.extra.find(col);
        row.push_back(it == e.extra.end() ? std::string{} : it->second);
      }
      csv::append_row(out, row);
    }
  }
  return out;
}

/// Default rule when a schema carries none: Disapproved tasks mark failure.
inline OutcomeRule effective_rule(const LogSchema& schema) {
  return schema.outcome.value_or(OutcomeRule::any_disapproved());
}

inline EventLog label_outcomes(const EventLog& log, const LogSchema& schema) {
  return label_outcomes(log, effective_rule(schema));
}

struct LogSplit {
  EventLog train;
  EventLog test;
};

/// Splits by trace. The train side receives round(fraction * n) traces chosen
/// by a seeded shuffle; both sides keep the original trace order.
inline LogSplit split_train_test(const EventLog& log, double train_fraction, std::uint64_t seed,
                                 Warnings* warnings = nullptr) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::Argument, "train fraction must lie in (0,1)");
  }
  if (log.empty()) throw Error(ErrorKind::EmptyLog, "cannot split an empty log");
  const std::size_t n = log.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  std::vector<Trace> train;
  std::vector<Trace> test;
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train : test).push_back(log[i]);
  if (train.empty()) warn(warnings, "train split is empty");
  if (test.empty()) warn(warnings, "test split is empty");
  return {EventLog{std::move(train)}, EventLog{std::move(test)}};
}

}  // namespace forlaps
