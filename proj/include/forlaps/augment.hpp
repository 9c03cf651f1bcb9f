#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forlaps/csv.hpp"
#include "forlaps/diagnostics.hpp"
#include "forlaps/error.hpp"
#include "forlaps/log_types.hpp"
#include "forlaps/mdp.hpp"
#include "forlaps/random.hpp"

namespace forlaps {

/// Which traces count as "all activities completed" for drop_completed.
enum class CompletionCriterion {
  Auto,            // AllApproved when the log has task status, else OutcomeDesired
  AllApproved,     // every event Approved
  OutcomeDesired,  // trace labeled Desired
};

inline std::optional<CompletionCriterion> parse_completion(std::string_view s) {
  if (s == "auto") return CompletionCriterion::Auto;
  if (s == "all_approved") return CompletionCriterion::AllApproved;
  if (s == "outcome_desired") return CompletionCriterion::OutcomeDesired;
  return std::nullopt;
}

struct AugmentConfig {
  double timestamp_noise_frac = 0.10;
  double drop_complete_frac = 0.05;
  double removal_frac = 0.20;
  std::set<std::string> protected_activities;
  std::size_t min_trace_len_for_removal = 3;
  std::uint64_t target_transitions = 100'000;
  std::uint64_t seed = 0;
  CompletionCriterion completion = CompletionCriterion::Auto;

  /// Approval-process setting: 10% timestamp jitter.
  static AugmentConfig case_study() { return {}; }
  /// Public benchmark setting: 20% timestamp noise.
  static AugmentConfig public_dataset() {
    AugmentConfig c;
    c.timestamp_noise_frac = 0.20;
    return c;
  }

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Config, std::string(name) + " must lie in [0,1]");
    };
    check(timestamp_noise_frac, "augment.timestamp_noise_frac");
    check(drop_complete_frac, "augment.drop_complete_frac");
    check(removal_frac, "augment.removal_frac");
    if (target_transitions < 1) throw Error(ErrorKind::Config, "augment.target_transitions must be >= 1");
  }
};

/// Rebuilds timestamps from perturbed gaps: t'_0 = t_0 and
/// t'_i = t'_{i-1} + g_i + deltas[i-1], then re-sorts (stable).
inline Trace apply_gap_deltas(const Trace& trace, const std::vector<Millis>& deltas) {
  if (trace.size() < 2) return trace;
  if (deltas.size() != trace.size() - 1) throw Error(ErrorKind::Argument, "need one delta per gap");
  Trace out = trace;
  Timestamp previous_new = trace.events[0].timestamp;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const Millis gap = trace.events[i].timestamp - trace.events[i - 1].timestamp;
    previous_new = previous_new + gap + deltas[i - 1];
    out.events[i].timestamp = previous_new;
  }
  out.sort_events();
  return out;
}

/// Draws each gap perturbation uniformly from [-frac*g, +frac*g] (truncated
/// to whole milliseconds toward zero, which keeps the bound exact).
inline std::vector<Millis> draw_gap_deltas(const Trace& trace, double frac, Rng& rng) {
  std::vector<Millis> deltas;
  if (trace.size() < 2) return deltas;
  deltas.reserve(trace.size() - 1);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double gap = static_cast<double>((trace.events[i].timestamp - trace.events[i - 1].timestamp).count());
    const double bound = frac * gap;
    const double delta = uniform_real(rng, -bound, bound);
    deltas.emplace_back(static_cast<std::int64_t>(std::trunc(delta)));
  }
  return deltas;
}

inline Trace jitter_timestamps(const Trace& trace, double frac, Rng& rng) {
  if (frac <= 0.0 || trace.size() < 2) return trace;
  return apply_gap_deltas(trace, draw_gap_deltas(trace, frac, rng));
}

inline bool is_completed(const Trace& trace, CompletionCriterion criterion) {
  if (criterion == CompletionCriterion::OutcomeDesired) return trace.is_desired();
  return !trace.empty() && std::all_of(trace.events.begin(), trace.events.end(),
                                       [](const Event& e) { return e.status == TaskStatus::Approved; });
}

inline CompletionCriterion resolve_completion(const EventLog& log, CompletionCriterion c) {
  if (c != CompletionCriterion::Auto) return c;
  return log.has_task_status() ? CompletionCriterion::AllApproved : CompletionCriterion::OutcomeDesired;
}

struct DropResult {
  EventLog kept;
  std::vector<std::string> dropped;  // case ids, in log order
};

/// Removes round(frac * eligible) completed traces, chosen uniformly at random.
inline DropResult drop_completed(const EventLog& log, double frac, Rng& rng,
                                 CompletionCriterion criterion = CompletionCriterion::Auto) {
  criterion = resolve_completion(log, criterion);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (is_completed(log[i], criterion)) eligible.push_back(i);
  }
  const auto n_drop = static_cast<std::size_t>(std::llround(frac * static_cast<double>(eligible.size())));
  shuffle(eligible.begin(), eligible.end(), rng);
  std::vector<bool> drop(log.size(), false);
  for (std::size_t i = 0; i < n_drop && i < eligible.size(); ++i) drop[eligible[i]] = true;

  DropResult out;
  std::vector<Trace> kept;
  kept.reserve(log.size() - n_drop);
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (drop[i]) {
      out.dropped.push_back(log[i].case_id);
    } else {
      kept.push_back(log[i]);
    }
  }
  out.kept = EventLog{std::move(kept)};
  return out;
}

/// Drops each unprotected event with probability removal_frac, visiting
/// candidates in random order and never shrinking the trace below 2 events.
/// Traces of length <= 2 (or shorter than min_trace_len_for_removal) are kept.
inline Trace remove_activities(const Trace& trace, const AugmentConfig& cfg, Rng& rng) {
  if (trace.size() <= 2 || trace.size() < cfg.min_trace_len_for_removal || cfg.removal_frac <= 0.0) return trace;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (cfg.protected_activities.count(trace.events[i].activity) == 0) candidates.push_back(i);
  }
  if (candidates.empty()) return trace;
  shuffle(candidates.begin(), candidates.end(), rng);
  std::vector<bool> removed(trace.size(), false);
  std::size_t length = trace.size();
  for (const auto i : candidates) {
    if (length <= 2) break;
    if (bernoulli(rng, cfg.removal_frac)) {
      removed[i] = true;
      --length;
    }
  }
  Trace out;
  out.case_id = trace.case_id;
  out.outcome = trace.outcome;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!removed[i]) out.events.push_back(trace.events[i]);
  }
  return out;
}

struct Provenance {
  std::string case_id;
  std::string source_case_id;
  std::vector<std::string> transforms;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AugmentedLog {
  std::vector<Trace> traces;
  std::vector<Provenance> provenance;  // parallel to traces
  std::vector<std::string> dropped;    // source traces excluded from sampling

  EventLog as_log() const { return EventLog{traces}; }
};

struct Synthesis {
  AugmentedLog log;
  std::vector<Transition> transitions;
};

/// Builds a fine-tuning stream of exactly cfg.target_transitions transitions:
/// drop completed traces once, then repeatedly sample a surviving trace with
/// replacement, thin it, jitter it, and append its episode (the last episode
/// is cut to fit).
inline Synthesis synthesize_stream(const EventLog& log, const AugmentConfig& cfg, const Vocabulary& vocab,
                                   StateMode mode, const RewardConfig& reward_cfg, Warnings* warnings = nullptr) {
  cfg.validate();
  if (log.empty()) throw Error(ErrorKind::Argument, "cannot augment an empty log");
  Rng rng(cfg.seed);
  Synthesis out;
  auto dropped = drop_completed(log, cfg.drop_complete_frac, rng, cfg.completion);
  EventLog pool = std::move(dropped.kept);
  out.log.dropped = std::move(dropped.dropped);
  if (pool.empty()) {
    warn(warnings, "augmentation dropped every trace; sampling from the full log instead");
    pool = log;
    out.log.dropped.clear();
  }

  out.transitions.reserve(cfg.target_transitions);
  std::uint64_t serial = 0;
  while (out.transitions.size() < cfg.target_transitions) {
    const Trace& source = pool[uniform_index(rng, pool.size())];
    Provenance prov{source.case_id + "#aug" + std::to_string(serial++), source.case_id, {"sample"}};
    Trace t = remove_activities(source, cfg, rng);
    if (t.size() != source.size()) prov.transforms.push_back("remove:" + std::to_string(source.size() - t.size()));
    if (cfg.timestamp_noise_frac > 0.0 && t.size() > 1) {
      const auto before = t.activities();
      t = jitter_timestamps(t, cfg.timestamp_noise_frac, rng);
      prov.transforms.push_back(t.activities() == before ? "jitter" : "jitter:reordered");
    }
    t.case_id = prov.case_id;
    for (auto& e : t.events) e.case_id = prov.case_id;

    auto episode = episode_from_trace(t, vocab, mode, reward_cfg, warnings);
    const std::size_t room = cfg.target_transitions - out.transitions.size();
    if (episode.size() > room) episode.resize(room);
    out.transitions.insert(out.transitions.end(), std::make_move_iterator(episode.begin()),
                           std::make_move_iterator(episode.end()));
    out.log.traces.push_back(std::move(t));
    out.log.provenance.push_back(std::move(prov));
  }
  return out;
}

/// Sidecar CSV: case_id, source_case_id, transforms (';'-joined).
inline std::string provenance_to_csv(const AugmentedLog& log) {
  std::string out;
  csv::append_row(out, {"case_id", "source_case_id", "transforms"});
  for (const auto& p : log.provenance) {
    std::string joined;
    for (std::size_t i = 0; i < p.transforms.size(); ++i) {
      if (i > 0) joined.push_back(';');
      joined += p.transforms[i];
    }
    csv::append_row(out, {p.case_id, p.source_case_id, joined});
  }
  return out;
}

}  // namespace forlaps
