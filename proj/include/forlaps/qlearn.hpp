#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forlaps/error.hpp"
#include "forlaps/mdp.hpp"

namespace forlaps {

struct Hyperparams {
  double alpha = 0.1;  // learning rate
  double gamma = 0.9;  // discount factor
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::Config, "alpha must lie in [0,1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorKind::Config, "gamma must lie in [0,1)");
  }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Q(s,a) <- Q(s,a) + alpha * (reward + gamma * max_next - Q(s,a)).
inline double q_update(double q, double reward, double max_next, const Hyperparams& hp) {
  if (!std::isfinite(q) || !std::isfinite(reward) || !std::isfinite(max_next)) {
    throw Error(ErrorKind::Numeric, "non-finite input to Q update");
  }
  return q + hp.alpha * (reward + hp.gamma * max_next - q);
}

/// Sparse Q-table. Entries that were never written read as 0.
class QTable {
 public:
  using ActionValues = std::map<ActionId, double>;
  using Entries = std::map<StateKey, ActionValues>;

  QTable() = default;
  QTable(StateMode mode, Vocabulary vocab, Hyperparams hp = {})
      : mode_(mode), vocab_(std::move(vocab)), hp_(hp), action_frequency_(vocab_.size(), 0) {}

  StateMode mode() const noexcept { return mode_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const Hyperparams& hyperparams() const noexcept { return hp_; }
  void set_hyperparams(const Hyperparams& hp) { hp_ = hp; }
  std::uint64_t steps() const noexcept { return steps_; }
  const std::vector<std::uint64_t>& action_frequency() const noexcept { return action_frequency_; }
  const Entries& entries() const noexcept { return entries_; }

  double get(const StateKey& s, ActionId a) const {
    const auto it = entries_.find(s);
    if (it == entries_.end()) return 0.0;
    const auto jt = it->second.find(a);
    return jt == it->second.end() ? 0.0 : jt->second;
  }

  /// Recorded actions for `s`, or nullptr when the state was never visited.
  const ActionValues* find(const StateKey& s) const {
    const auto it = entries_.find(s);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void set(const StateKey& s, ActionId a, double q) {
    if (!std::isfinite(q)) throw Error(ErrorKind::Numeric, "Q-table values must be finite");
    entries_[s][a] = q;
  }

  /// max over the actions available in `s`. A RemainingSet state offers its
  /// remaining items (unwritten ones count as 0); a prefix state offers the
  /// actions recorded after it. An empty action set yields 0.
  double max_value(const StateKey& s) const {
    const auto it = entries_.find(s);
    if (mode_ == StateMode::RemainingSet) {
      if (s.empty()) return 0.0;
      if (it == entries_.end()) return 0.0;
      double best = 0.0;
      bool any = false;
      for (const auto a : s.items()) {
        const auto jt = it->second.find(a);
        const double q = jt == it->second.end() ? 0.0 : jt->second;
        if (!any || q > best) best = q;
        any = true;
      }
      return best;
    }
    if (it == entries_.end() || it->second.empty()) return 0.0;
    double best = it->second.begin()->second;
    for (const auto& [a, q] : it->second) best = std::max(best, q);
    return best;
  }

  std::size_t entry_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [s, av] : entries_) n += av.size();
    return n;
  }
  std::size_t state_count() const noexcept { return entries_.size(); }

  /// Restores bookkeeping when loading a persisted table.
  void restore_counters(std::uint64_t steps, std::vector<std::uint64_t> frequency) {
    if (frequency.size() != vocab_.size()) {
      throw Error(ErrorKind::Argument, "action frequency length does not match vocabulary");
    }
    steps_ = steps;
    action_frequency_ = std::move(frequency);
  }

  void record_step(ActionId a) {
    ++steps_;
    ++action_frequency_.at(a.value);
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  StateMode mode_ = StateMode::RemainingSet;
  Vocabulary vocab_;
  Hyperparams hp_;
  std::uint64_t steps_ = 0;
  std::vector<std::uint64_t> action_frequency_;
  Entries entries_;
};

/// Arithmetic mean over stored entries; 0 for an empty table.
inline double mean_q(const QTable& table) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [s, av] : table.entries()) {
    for (const auto& [a, q] : av) {
      sum += q;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Population standard deviation of stored entries; 0 for an empty table.
inline double stddev_q(const QTable& table, double mean) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& [s, av] : table.entries()) {
    for (const auto& [a, q] : av) {
      acc += (q - mean) * (q - mean);
      ++n;
    }
  }
  return n == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(n));
}

struct StatSample {
  std::uint64_t step = 0;   // table step counter when sampled
  double mean_q = 0.0;      // mean over table entries
  double moving_avg = 0.0;  // mean of the last min(t, W) mean_q samples
  double stddev = 0.0;      // spread of table entries at this sample

  friend bool operator==(const StatSample&, const StatSample&) = default;
};

struct TrainStats {
  std::uint64_t interval = 100;
  std::size_t window = 500;
  std::vector<StatSample> samples;

  bool empty() const noexcept { return samples.empty(); }
  double final_mean_q() const { return samples.empty() ? 0.0 : samples.back().mean_q; }
  double final_moving_avg() const { return samples.empty() ? 0.0 : samples.back().moving_avg; }

  friend bool operator==(const TrainStats&, const TrainStats&) = default;
};

struct TrainOptions {
  std::uint64_t stats_interval = 100;
  std::size_t moving_average_window = 500;

  void validate() const {
    if (stats_interval == 0) throw Error(ErrorKind::Config, "stats interval must be >= 1");
    if (moving_average_window == 0) throw Error(ErrorKind::Config, "moving-average window must be >= 1");
  }
};

/// Moving-average bookkeeping shared by one stats series.
class StatsTracker {
 public:
  explicit StatsTracker(const TrainOptions& opt) {
    stats_.interval = opt.stats_interval;
    stats_.window = opt.moving_average_window;
  }

  void sample(const QTable& table) {
    if (!stats_.samples.empty() && stats_.samples.back().step == table.steps()) return;
    const double mean = mean_q(table);
    window_.push_back(mean);
    if (window_.size() > stats_.window) window_.pop_front();
    // Summed afresh each time so the average never drifts.
    double sum = 0.0;
    for (const double v : window_) sum += v;
    stats_.samples.push_back(
        StatSample{table.steps(), mean, sum / static_cast<double>(window_.size()), stddev_q(table, mean)});
  }

  const TrainStats& stats() const noexcept { return stats_; }
  TrainStats take() { return std::move(stats_); }

 private:
  TrainStats stats_;
  std::deque<double> window_;
};

/// Applies one Q update per transition in stream order, feeding `tracker`
/// every `interval` table steps and once more at the end.
inline void train_into(std::span<const Transition> stream, const Hyperparams& hp, QTable& table,
                       StatsTracker& tracker) {
  hp.validate();
  const auto interval = tracker.stats().interval;
  const auto vocab_size = table.vocabulary().size();
  tracker.sample(table);
  for (const auto& t : stream) {
    if (t.state.mode() != table.mode() || t.next_state.mode() != table.mode()) {
      throw Error(ErrorKind::Config, "transition state mode does not match the Q-table mode");
    }
    if (t.action.value >= vocab_size) throw Error(ErrorKind::Argument, "transition action outside vocabulary");
    const double max_next = t.terminal ? 0.0 : table.max_value(t.next_state);
    const double updated = q_update(table.get(t.state, t.action), t.reward, max_next, hp);
    table.set(t.state, t.action, updated);
    table.record_step(t.action);
    if (table.steps() % interval == 0) tracker.sample(table);
  }
  tracker.sample(table);
}

/// Offline Q-learning over a finite transition stream.
inline TrainStats train_offline(std::span<const Transition> stream, const Hyperparams& hp, QTable& table,
                                const TrainOptions& options = {}) {
  options.validate();
  StatsTracker tracker(options);
  train_into(stream, hp, table, tracker);
  return tracker.take();
}

}  // namespace forlaps
