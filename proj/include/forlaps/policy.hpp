#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forlaps/error.hpp"
#include "forlaps/mdp.hpp"
#include "forlaps/qlearn.hpp"

namespace forlaps {

/// What to do when a queried state has no recorded actions.
enum class Fallback {
  Error,             // raise an UnseenState error
  SubsetBackoff,     // use the largest seen sub-state (RemainingSet) or longest seen prefix
  FrequencyRanking,  // rank available actions by how often training executed them
};

constexpr std::string_view to_string(Fallback f) noexcept {
  switch (f) {
    case Fallback::Error: return "error";
    case Fallback::SubsetBackoff: return "subset";
    case Fallback::FrequencyRanking: return "frequency";
  }
  return "error";
}

inline std::optional<Fallback> parse_fallback(std::string_view s) {
  if (s == "error" || s == "none") return Fallback::Error;
  if (s == "subset" || s == "backoff") return Fallback::SubsetBackoff;
  if (s == "frequency") return Fallback::FrequencyRanking;
  return std::nullopt;
}

constexpr Fallback default_fallback(StateMode mode) noexcept {
  return mode == StateMode::RemainingSet ? Fallback::SubsetBackoff : Fallback::FrequencyRanking;
}

struct Recommendation {
  ActionId action;
  std::string activity;
  double q = 0.0;
  std::size_t rank = 1;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct Ranking {
  std::vector<Recommendation> items;
  bool fallback_used = false;
};

struct RolloutResult {
  std::vector<ActionId> sequence;
  bool partial = false;  // true when an unseen state forced lexicographic completion
};

/// Read-only view of a trained Q-table answering next-activity queries.
/// Ties in Q are broken by the lexicographically smaller activity label.
class Policy {
 public:
  explicit Policy(QTable table) : Policy(std::make_shared<const QTable>(std::move(table))) {}
  explicit Policy(std::shared_ptr<const QTable> table)
      : Policy(table, table ? default_fallback(table->mode()) : Fallback::Error) {}
  Policy(std::shared_ptr<const QTable> table, Fallback fallback) : table_(std::move(table)), fallback_(fallback) {
    if (!table_) throw Error(ErrorKind::Argument, "policy needs a Q-table");
  }

  const QTable& table() const noexcept { return *table_; }
  StateMode mode() const noexcept { return table_->mode(); }
  const Vocabulary& vocabulary() const noexcept { return table_->vocabulary(); }
  Fallback fallback() const noexcept { return fallback_; }

  Ranking rank_actions(const StateKey& state, std::size_t k) const {
    if (k < 1) throw Error(ErrorKind::Argument, "k must be >= 1");
    if (state.mode() != mode()) throw Error(ErrorKind::Config, "state mode does not match policy mode");
    auto [candidates, used_fallback] = candidates_for(state);
    if (candidates.empty()) {
      throw Error(ErrorKind::Argument, "state " + state.to_string(vocabulary()) + " offers no actions");
    }
    Ranking out;
    out.fallback_used = used_fallback;
    const std::size_t n = std::min(k, candidates.size());
    for (std::size_t i = 0; i < n; ++i) {
      out.items.push_back(Recommendation{candidates[i].first, vocabulary().label(candidates[i].first),
                                         candidates[i].second, i + 1});
    }
    return out;
  }

  Recommendation best_action(const StateKey& state) const { return rank_actions(state, 1).items.front(); }

  /// Greedy completion of a RemainingSet state until nothing remains.
  RolloutResult rollout(const StateKey& start) const {
    if (start.mode() != StateMode::RemainingSet || mode() != StateMode::RemainingSet) {
      throw Error(ErrorKind::Config, "set rollout requires a RemainingSet policy and state");
    }
    RolloutResult out;
    StateKey state = start;
    while (!state.empty()) {
      const auto best = recorded_best(state, [&](ActionId a) { return state.contains(a); });
      if (!best) {
        out.partial = true;
        for (const auto a : state.items()) out.sequence.push_back(a);
        break;
      }
      out.sequence.push_back(*best);
      state = state.after(*best);
    }
    return out;
  }

  /// Greedy ordering of a multiset of activities under a prefix policy: each
  /// step picks the best recorded action that is still pending.
  RolloutResult rollout_prefix(std::vector<ActionId> pending) const {
    if (mode() != StateMode::ExecutedPrefix) throw Error(ErrorKind::Config, "prefix rollout requires a prefix policy");
    std::map<ActionId, std::size_t> left;
    for (const auto a : pending) ++left[a];
    RolloutResult out;
    StateKey state = StateKey::empty(StateMode::ExecutedPrefix);
    for (std::size_t step = 0; step < pending.size(); ++step) {
      const auto best = recorded_best(state, [&](ActionId a) {
        const auto it = left.find(a);
        return it != left.end() && it->second > 0;
      });
      if (!best) {
        out.partial = true;
        for (const auto& [a, count] : left) out.sequence.insert(out.sequence.end(), count, a);
        break;
      }
      out.sequence.push_back(*best);
      --left[*best];
      state = state.after(*best);
    }
    return out;
  }

 private:
  using Candidates = std::vector<std::pair<ActionId, double>>;

  static void sort_by_q(Candidates& c, const Vocabulary& vocab) {
    std::sort(c.begin(), c.end(), [&](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return vocab.label(x.first) < vocab.label(y.first);
    });
  }

  template <typename Allowed>
  std::optional<ActionId> recorded_best(const StateKey& state, Allowed allowed) const {
    const auto* actions = table_->find(state);
    if (actions == nullptr) return std::nullopt;
    Candidates c;
    for (const auto& [a, q] : *actions) {
      if (allowed(a)) c.emplace_back(a, q);
    }
    if (c.empty()) return std::nullopt;
    sort_by_q(c, vocabulary());
    return c.front().first;
  }

  Candidates recorded(const StateKey& key, const StateKey& query) const {
    Candidates c;
    const auto* actions = table_->find(key);
    if (actions == nullptr) return c;
    for (const auto& [a, q] : *actions) {
      if (query.mode() == StateMode::ExecutedPrefix || query.contains(a)) c.emplace_back(a, q);
    }
    sort_by_q(c, vocabulary());
    return c;
  }

  Candidates by_frequency(const StateKey& state) const {
    Candidates c;
    if (state.mode() == StateMode::RemainingSet) {
      for (const auto a : state.items()) c.emplace_back(a, 0.0);
    } else {
      for (std::uint32_t i = 0; i < vocabulary().size(); ++i) c.emplace_back(ActionId{i}, 0.0);
    }
    const auto& freq = table_->action_frequency();
    std::stable_sort(c.begin(), c.end(), [&](const auto& x, const auto& y) {
      return freq.at(x.first.value) > freq.at(y.first.value);
    });
    return c;
  }

  Candidates subset_backoff(const StateKey& state) const {
    const StateKey* best_key = nullptr;
    for (const auto& [key, actions] : table_->entries()) {
      if (key == state || key.empty() || actions.empty()) continue;
      const bool similar =
          state.mode() == StateMode::RemainingSet ? key.is_subset_of(state) : key.is_prefix_of(state);
      if (similar && (best_key == nullptr || key.size() > best_key->size())) best_key = &key;
    }
    if (best_key == nullptr) return {};
    return recorded(*best_key, state);
  }

  std::pair<Candidates, bool> candidates_for(const StateKey& state) const {
    auto exact = recorded(state, state);
    if (!exact.empty()) return {std::move(exact), false};
    if (state.mode() == StateMode::RemainingSet && state.empty()) return {{}, false};
    switch (fallback_) {
      case Fallback::Error:
        throw Error(ErrorKind::UnseenState, "unseen state " + state.to_string(vocabulary()));
      case Fallback::SubsetBackoff: {
        auto similar = subset_backoff(state);
        if (!similar.empty()) return {std::move(similar), true};
        return {by_frequency(state), true};
      }
      case Fallback::FrequencyRanking:
        return {by_frequency(state), true};
    }
    return {{}, true};
  }

  std::shared_ptr<const QTable> table_;
  Fallback fallback_;
};

/// Rolls out a list of activity labels under either policy mode. Labels the
/// policy has never seen are appended in lexicographic order and mark the
/// result partial.
inline std::pair<std::vector<std::string>, bool> rollout_labels(const Policy& policy,
                                                                const std::vector<std::string>& activities) {
  const auto& vocab = policy.vocabulary();
  std::vector<ActionId> known;
  std::vector<std::string> unknown;
  for (const auto& label : activities) {
    if (auto id = vocab.find(label)) {
      known.push_back(*id);
    } else {
      unknown.push_back(label);
    }
  }
  RolloutResult r;
  if (policy.mode() == StateMode::RemainingSet) {
    r = policy.rollout(StateKey::remaining(known));
  } else {
    r = policy.rollout_prefix(known);
  }
  std::vector<std::string> out;
  out.reserve(activities.size());
  for (const auto a : r.sequence) out.push_back(vocab.label(a));
  std::sort(unknown.begin(), unknown.end());
  out.insert(out.end(), unknown.begin(), unknown.end());
  return {std::move(out), r.partial || !unknown.empty()};
}

}  // namespace forlaps
