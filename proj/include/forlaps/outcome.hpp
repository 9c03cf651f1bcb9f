#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forlaps/error.hpp"
#include "forlaps/log_types.hpp"

namespace forlaps {

/// Declarative predicate marking a trace Undesired. Each satisfied rule also
/// names a trigger event (the point of failure); everything executed after the
/// trigger counts as wasted.
struct OutcomeRule {
  enum class Kind {
    Never,           // every trace is Desired
    Contains,        // `activity` occurs (optionally within `window` after one of `anchors`)
    AttributeEquals, // some event has extra[`attribute`] == `value`
    AnyDisapproved,  // some event has status Disapproved
    DurationExceeds, // trace duration > `window`
    AnyOf,
    AllOf,
    Not,
  };

  Kind kind = Kind::Never;
  std::string activity;
  std::vector<std::string> anchors;
  std::optional<Millis> window;
  std::string attribute;
  std::string value;
  std::vector<OutcomeRule> children;

  static OutcomeRule never() { return {}; }
  static OutcomeRule contains(std::string activity) {
    OutcomeRule r;
    r.kind = Kind::Contains;
    r.activity = std::move(activity);
    return r;
  }
  static OutcomeRule contains_within(std::string activity, std::vector<std::string> anchors, Millis window) {
    OutcomeRule r = contains(std::move(activity));
    r.anchors = std::move(anchors);
    r.window = window;
    return r;
  }
  static OutcomeRule attribute_equals(std::string attribute, std::string value) {
    OutcomeRule r;
    r.kind = Kind::AttributeEquals;
    r.attribute = std::move(attribute);
    r.value = std::move(value);
    return r;
  }
  static OutcomeRule any_disapproved() {
    OutcomeRule r;
    r.kind = Kind::AnyDisapproved;
    return r;
  }
  static OutcomeRule duration_exceeds(Millis limit) {
    OutcomeRule r;
    r.kind = Kind::DurationExceeds;
    r.window = limit;
    return r;
  }
  static OutcomeRule any_of(std::vector<OutcomeRule> children) {
    OutcomeRule r;
    r.kind = Kind::AnyOf;
    r.children = std::move(children);
    return r;
  }
  static OutcomeRule all_of(std::vector<OutcomeRule> children) {
    OutcomeRule r;
    r.kind = Kind::AllOf;
    r.children = std::move(children);
    return r;
  }
  static OutcomeRule negate(OutcomeRule child) {
    OutcomeRule r;
    r.kind = Kind::Not;
    r.children.push_back(std::move(child));
    return r;
  }
};

/// Where a satisfied rule fired. index == -1 means the whole trace is wasted.
struct RuleTrigger {
  std::ptrdiff_t index = -1;
  std::optional<Millis> wasted_time;
};

namespace detail {

inline std::optional<RuleTrigger> evaluate_rule(const OutcomeRule& rule, const Trace& trace) {
  using Kind = OutcomeRule::Kind;
  const auto& ev = trace.events;
  const auto n = static_cast<std::ptrdiff_t>(ev.size());
  switch (rule.kind) {
    case Kind::Never:
      return std::nullopt;
    case Kind::Contains:
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (ev[i].activity != rule.activity) continue;
        if (rule.anchors.empty()) return RuleTrigger{i, std::nullopt};
        for (std::ptrdiff_t j = 0; j < i; ++j) {
          const bool is_anchor =
              std::find(rule.anchors.begin(), rule.anchors.end(), ev[j].activity) != rule.anchors.end();
          if (!is_anchor) continue;
          if (!rule.window || ev[i].timestamp - ev[j].timestamp <= *rule.window) {
            return RuleTrigger{i, std::nullopt};
          }
        }
      }
      return std::nullopt;
    case Kind::AttributeEquals:
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto it = ev[i].extra.find(rule.attribute);
        if (it != ev[i].extra.end() && it->second == rule.value) return RuleTrigger{i, std::nullopt};
      }
      return std::nullopt;
    case Kind::AnyDisapproved:
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (ev[i].status == TaskStatus::Disapproved) return RuleTrigger{i, std::nullopt};
      }
      return std::nullopt;
    case Kind::DurationExceeds: {
      const Millis limit = rule.window.value_or(Millis{0});
      if (n == 0 || trace.duration() <= limit) return std::nullopt;
      const Timestamp deadline = trace.start() + limit;
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (ev[i].timestamp > deadline) return RuleTrigger{i, trace.duration() - limit};
      }
      return std::nullopt;
    }
    case Kind::AnyOf: {
      std::optional<RuleTrigger> best;
      for (const auto& child : rule.children) {
        auto t = evaluate_rule(child, trace);
        if (t && (!best || t->index < best->index)) best = t;
      }
      return best;
    }
    case Kind::AllOf: {
      if (rule.children.empty()) return std::nullopt;
      std::optional<RuleTrigger> latest;
      for (const auto& child : rule.children) {
        auto t = evaluate_rule(child, trace);
        if (!t) return std::nullopt;
        if (!latest || t->index > latest->index) latest = t;
      }
      return latest;
    }
    case Kind::Not: {
      if (rule.children.size() != 1) return std::nullopt;
      if (evaluate_rule(rule.children.front(), trace)) return std::nullopt;
      return RuleTrigger{-1, std::nullopt};
    }
  }
  return std::nullopt;
}

inline void collect_references(const OutcomeRule& rule, std::set<std::string>& activities,
                               std::set<std::string>& attributes) {
  if (rule.kind == OutcomeRule::Kind::Contains) {
    activities.insert(rule.activity);
    activities.insert(rule.anchors.begin(), rule.anchors.end());
  }
  if (rule.kind == OutcomeRule::Kind::AttributeEquals) attributes.insert(rule.attribute);
  for (const auto& c : rule.children) collect_references(c, activities, attributes);
}

}  // namespace detail

/// Throws a Config error if the rule mentions an activity or attribute the log
/// never contains, or if a combinator is malformed.
inline void validate_rule(const OutcomeRule& rule, const EventLog& log) {
  using Kind = OutcomeRule::Kind;
  if (rule.kind == Kind::Not && rule.children.size() != 1) {
    throw Error(ErrorKind::Config, "outcome rule 'not' needs exactly one operand");
  }
  if ((rule.kind == Kind::AnyOf || rule.kind == Kind::AllOf) && rule.children.empty()) {
    throw Error(ErrorKind::Config, "outcome rule combinator has no operands");
  }
  if (rule.kind == Kind::Contains && rule.activity.empty()) {
    throw Error(ErrorKind::Config, "outcome rule 'contains' needs an activity");
  }
  for (const auto& c : rule.children) validate_rule(c, log);
  if (rule.kind == Kind::AnyOf || rule.kind == Kind::AllOf || rule.kind == Kind::Not) return;

  std::set<std::string> activities;
  std::set<std::string> attributes;
  detail::collect_references(rule, activities, attributes);
  const auto vocab = log.activities();
  for (const auto& a : activities) {
    if (!std::binary_search(vocab.begin(), vocab.end(), a)) {
      throw Error(ErrorKind::Config, "outcome rule references unknown activity '" + a + "'");
    }
  }
  for (const auto& attr : attributes) {
    bool seen = false;
    for (const auto& t : log.traces()) {
      for (const auto& e : t.events) seen = seen || e.extra.count(attr) > 0;
    }
    if (!seen) throw Error(ErrorKind::Config, "outcome rule references unknown attribute '" + attr + "'");
  }
}

/// Label for a single trace. Undesired traces count the activities executed
/// strictly after the trigger as wasted; wasted time runs from the trigger to
/// the last event unless the rule supplies its own measure.
inline OutcomeLabel label_trace(const Trace& trace, const OutcomeRule& rule) {
  const auto trigger = detail::evaluate_rule(rule, trace);
  if (!trigger) return OutcomeLabel::desired();
  OutcomeLabel label;
  label.categorical = Outcome::Undesired;
  const auto n = static_cast<std::ptrdiff_t>(trace.size());
  label.wasted_activities = n - 1 - trigger->index;
  if (trigger->wasted_time) {
    label.wasted_time = *trigger->wasted_time;
  } else if (trigger->index < 0) {
    label.wasted_time = trace.duration();
  } else {
    label.wasted_time = trace.end() - trace.events[static_cast<std::size_t>(trigger->index)].timestamp;
  }
  return label;
}

/// Returns a copy of `log` with every trace labeled by `rule`.
inline EventLog label_outcomes(const EventLog& log, const OutcomeRule& rule) {
  validate_rule(rule, log);
  std::vector<Trace> traces = log.traces();
  for (auto& t : traces) t.outcome = label_trace(t, rule);
  return EventLog{std::move(traces)};
}

}  // namespace forlaps
