#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forlaps/diagnostics.hpp"
#include "forlaps/error.hpp"
#include "forlaps/log_types.hpp"

namespace forlaps {

/// Interned activity handle; ids follow the lexicographic order of labels.
struct ActionId {
  std::uint32_t value = 0;
  friend auto operator<=>(const ActionId&, const ActionId&) = default;
};

/// Sorted, duplicate-free activity labels of a training log.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  }
  static Vocabulary from_log(const EventLog& log) { return Vocabulary{log.activities()}; }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(ActionId id) const { return labels_.at(id.value); }

  std::optional<ActionId> find(std::string_view label) const {
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return ActionId{static_cast<std::uint32_t>(it - labels_.begin())};
  }
  ActionId id(std::string_view label) const {
    auto found = find(label);
    if (!found) throw Error(ErrorKind::Argument, "activity '" + std::string(label) + "' not in vocabulary");
    return *found;
  }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<std::string> labels_;
};

enum class StateMode { RemainingSet, ExecutedPrefix };

constexpr std::string_view to_string(StateMode m) noexcept {
  return m == StateMode::RemainingSet ? "remaining" : "prefix";
}

inline std::optional<StateMode> parse_state_mode(std::string_view s) {
  if (s == "remaining" || s == "remaining_set") return StateMode::RemainingSet;
  if (s == "prefix" || s == "executed_prefix") return StateMode::ExecutedPrefix;
  return std::nullopt;
}

/// Canonical MDP state. RemainingSet payloads are sorted and duplicate-free;
/// ExecutedPrefix payloads keep execution order.
class StateKey {
 public:
  StateKey() = default;

  static StateKey remaining(std::vector<ActionId> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return StateKey{StateMode::RemainingSet, std::move(items)};
  }
  static StateKey prefix(std::vector<ActionId> items) {
    return StateKey{StateMode::ExecutedPrefix, std::move(items)};
  }
  /// The state in which no decisions remain (RemainingSet) or have been made (prefix).
  static StateKey empty(StateMode mode) { return StateKey{mode, {}}; }

  StateMode mode() const noexcept { return mode_; }
  const std::vector<ActionId>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  bool contains(ActionId a) const {
    if (mode_ == StateMode::RemainingSet) return std::binary_search(items_.begin(), items_.end(), a);
    return std::find(items_.begin(), items_.end(), a) != items_.end();
  }

  /// Successor after executing `a`: removal for RemainingSet, append for prefix.
  StateKey after(ActionId a) const {
    StateKey next = *this;
    if (mode_ == StateMode::RemainingSet) {
      const auto it = std::lower_bound(next.items_.begin(), next.items_.end(), a);
      if (it != next.items_.end() && *it == a) next.items_.erase(it);
    } else {
      next.items_.push_back(a);
    }
    return next;
  }

  /// True when every item of this RemainingSet key is also in `other`.
  bool is_subset_of(const StateKey& other) const {
    return std::includes(other.items_.begin(), other.items_.end(), items_.begin(), items_.end());
  }
  bool is_prefix_of(const StateKey& other) const {
    return items_.size() <= other.items_.size() &&
           std::equal(items_.begin(), items_.end(), other.items_.begin());
  }

  std::vector<std::string> labels(const Vocabulary& vocab) const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto a : items_) out.push_back(vocab.label(a));
    return out;
  }

  /// Human-readable form, e.g. `{ARR, FR}` or `(ER Registration, ER Triage)`.
  std::string to_string(const Vocabulary& vocab) const {
    std::string out(1, mode_ == StateMode::RemainingSet ? '{' : '(');
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i > 0) out += ", ";
      out += vocab.label(items_[i]);
    }
    out.push_back(mode_ == StateMode::RemainingSet ? '}' : ')');
    return out;
  }

  friend auto operator<=>(const StateKey&, const StateKey&) = default;
  friend bool operator==(const StateKey&, const StateKey&) = default;

 private:
  StateKey(StateMode mode, std::vector<ActionId> items) : mode_(mode), items_(std::move(items)) {}

  StateMode mode_ = StateMode::RemainingSet;
  std::vector<ActionId> items_;
};

/// Progress of one case: what ran so far and what is still open.
struct TraceProgress {
  std::vector<ActionId> executed;
  std::vector<ActionId> remaining;
};

inline StateKey encode_state(const TraceProgress& progress, StateMode mode) {
  return mode == StateMode::RemainingSet ? StateKey::remaining(progress.remaining)
                                         : StateKey::prefix(progress.executed);
}

enum class RewardMode { PerTaskStatus, TraceOutcome };

constexpr std::string_view to_string(RewardMode m) noexcept {
  return m == RewardMode::PerTaskStatus ? "per_task_status" : "trace_outcome";
}

inline std::optional<RewardMode> parse_reward_mode(std::string_view s) {
  if (s == "per_task_status" || s == "status") return RewardMode::PerTaskStatus;
  if (s == "trace_outcome" || s == "outcome") return RewardMode::TraceOutcome;
  return std::nullopt;
}

struct RewardConfig {
  double base_reward = 1.0;
  RewardMode mode = RewardMode::PerTaskStatus;
  bool position_penalty = true;
  /// Per-activity penalty weight for Undesired traces; absent labels weigh 1.
  std::map<std::string, double> importance;

  void validate() const {
    if (!(std::isfinite(base_reward) && base_reward > 0.0)) {
      throw Error(ErrorKind::Config, "reward base must be a positive finite number");
    }
    for (const auto& [label, w] : importance) {
      if (!(std::isfinite(w) && w >= 0.0)) {
        throw Error(ErrorKind::Config, "importance weight for '" + label + "' must be finite and >= 0");
      }
    }
  }

  double weight(const std::string& activity) const {
    const auto it = importance.find(activity);
    return it == importance.end() ? 1.0 : it->second;
  }
};

/// Per-task reward: approval earns +r, a disapproval costs r for every
/// activity chosen before it. Neutral tasks count as approved.
inline double reward(TaskStatus status, std::size_t prior_completed, const RewardConfig& cfg) {
  if (status == TaskStatus::Disapproved) return -cfg.base_reward * static_cast<double>(prior_completed);
  return cfg.base_reward;
}

/// Trace-outcome reward: Desired traces earn +r per action; in Undesired traces
/// each action is penalised by its 1-based position (when enabled) and weight.
inline double reward(Outcome outcome, std::size_t position, const RewardConfig& cfg, double weight = 1.0) {
  if (outcome == Outcome::Desired) return cfg.base_reward;
  const double scale = cfg.position_penalty ? static_cast<double>(position) : 1.0;
  return -cfg.base_reward * scale * weight;
}

struct Transition {
  StateKey state;
  ActionId action;
  double reward = 0.0;
  StateKey next_state;
  bool terminal = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// One episode in log order (the behaviour policy is the recorded order).
inline std::vector<Transition> episode_from_trace(const Trace& trace, const Vocabulary& vocab, StateMode mode,
                                                  const RewardConfig& cfg, Warnings* warnings = nullptr) {
  if (cfg.mode == RewardMode::TraceOutcome && !trace.outcome) {
    throw Error(ErrorKind::Config, "trace '" + trace.case_id + "' is unlabeled; trace_outcome rewards need labels");
  }
  std::vector<const Event*> steps;
  steps.reserve(trace.size());
  if (mode == StateMode::RemainingSet) {
    std::vector<ActionId> seen;
    bool collapsed = false;
    for (const auto& e : trace.events) {
      const ActionId a = vocab.id(e.activity);
      if (std::find(seen.begin(), seen.end(), a) != seen.end()) {
        collapsed = true;
        continue;
      }
      seen.push_back(a);
      steps.push_back(&e);
    }
    if (collapsed) {
      warn(warnings, "trace '" + trace.case_id + "' repeats activities; repeats collapsed to first occurrence");
    }
  } else {
    for (const auto& e : trace.events) steps.push_back(&e);
  }

  std::vector<ActionId> actions;
  actions.reserve(steps.size());
  for (const auto* e : steps) actions.push_back(vocab.id(e->activity));

  std::vector<Transition> out;
  out.reserve(steps.size());
  StateKey state = mode == StateMode::RemainingSet ? StateKey::remaining(actions) : StateKey::empty(mode);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Event& e = *steps[i];
    double r = 0.0;
    if (cfg.mode == RewardMode::PerTaskStatus) {
      r = reward(e.status, i, cfg);
    } else {
      r = reward(trace.outcome->categorical, i + 1, cfg, cfg.weight(e.activity));
    }
    StateKey next = state.after(actions[i]);
    const bool terminal = i + 1 == steps.size();
    out.push_back(Transition{state, actions[i], r, next, terminal});
    state = std::move(next);
  }
  return out;
}

/// Concatenated episodes of every trace, in log order.
inline std::vector<Transition> episodes_from_log(const EventLog& log, const Vocabulary& vocab, StateMode mode,
                                                 const RewardConfig& cfg, Warnings* warnings = nullptr) {
  std::vector<Transition> out;
  out.reserve(log.event_count());
  for (const auto& t : log.traces()) {
    auto ep = episode_from_trace(t, vocab, mode, cfg, warnings);
    out.insert(out.end(), std::make_move_iterator(ep.begin()), std::make_move_iterator(ep.end()));
  }
  return out;
}

}  // namespace forlaps
