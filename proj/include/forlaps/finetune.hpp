#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forlaps/augment.hpp"
#include "forlaps/diagnostics.hpp"
#include "forlaps/error.hpp"
#include "forlaps/format.hpp"
#include "forlaps/mdp.hpp"
#include "forlaps/qlearn.hpp"

namespace forlaps {

struct PipelineConfig {
  StateMode mode = StateMode::RemainingSet;
  RewardConfig reward;
  Hyperparams hyperparams;
  AugmentConfig augment;
  std::uint64_t offline_passes = 1;
  TrainOptions train;
  bool offline_only = false;

  void validate() const {
    reward.validate();
    hyperparams.validate();
    augment.validate();
    train.validate();
    if (offline_passes < 1) throw Error(ErrorKind::Config, "pipeline.offline_passes must be >= 1");
  }
};

struct PhaseReport {
  std::string name;
  TrainStats stats;
  std::uint64_t updates = 0;
  double wall_seconds = 0.0;  // informational; not serialized

  double final_mean_q() const { return stats.final_mean_q(); }
  double final_moving_avg() const { return stats.final_moving_avg(); }
};

/// Phases in execution order. `improvement` compares the last phase's final
/// moving-average mean Q against the offline phase's (ratio minus one).
struct RunReport {
  std::string label;
  std::vector<PhaseReport> phases;

  const PhaseReport* phase(const std::string& name) const {
    for (const auto& p : phases) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  std::uint64_t total_updates() const {
    std::uint64_t n = 0;
    for (const auto& p : phases) n += p.updates;
    return n;
  }
  double final_moving_avg() const { return phases.empty() ? 0.0 : phases.back().final_moving_avg(); }
  std::optional<double> improvement() const {
    const auto* off = phase("offline");
    const auto* fine = phase("finetune");
    if (off == nullptr || fine == nullptr || off->final_moving_avg() == 0.0) return std::nullopt;
    return fine->final_moving_avg() / off->final_moving_avg() - 1.0;
  }
};

struct PipelineResult {
  QTable table;
  std::optional<QTable> offline_snapshot;
  RunReport report;
  AugmentedLog augmented;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline PhaseReport finetune_phase(const std::string& name, const EventLog& log, const PipelineConfig& cfg,
                                  QTable& table, AugmentedLog& augmented, Warnings* warnings) {
  const auto t0 = std::chrono::steady_clock::now();
  auto synth = synthesize_stream(log, cfg.augment, table.vocabulary(), cfg.mode, cfg.reward, warnings);
  StatsTracker tracker(cfg.train);
  train_into(synth.transitions, cfg.hyperparams, table, tracker);
  augmented = std::move(synth.log);
  return PhaseReport{name, tracker.take(), synth.transitions.size(), seconds_since(t0)};
}

}  // namespace detail

/// Offline pre-training on the real log followed, unless offline_only, by
/// fine-tuning on an augmented stream that continues from the same table.
inline PipelineResult run_forlaps(const EventLog& log, const PipelineConfig& cfg, Warnings* warnings = nullptr) {
  cfg.validate();
  if (log.empty()) throw Error(ErrorKind::EmptyLog, "pipeline needs a non-empty training log");
  PipelineResult out;
  out.report.label = cfg.offline_only ? "offline" : "forlaps";
  out.table = QTable{cfg.mode, Vocabulary::from_log(log), cfg.hyperparams};

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto transitions = episodes_from_log(log, out.table.vocabulary(), cfg.mode, cfg.reward, warnings);
    StatsTracker tracker(cfg.train);
    for (std::uint64_t pass = 0; pass < cfg.offline_passes; ++pass) {
      train_into(transitions, cfg.hyperparams, out.table, tracker);
    }
    out.report.phases.push_back(PhaseReport{"offline", tracker.take(), transitions.size() * cfg.offline_passes,
                                            detail::seconds_since(t0)});
  } catch (const Error& e) {
    throw PhaseError("offline", e);
  }
  if (cfg.offline_only) return out;

  out.offline_snapshot = out.table;
  try {
    out.report.phases.push_back(detail::finetune_phase("finetune", log, cfg, out.table, out.augmented, warnings));
  } catch (const Error& e) {
    throw PhaseError("finetune", e);
  }
  return out;
}

/// Baseline: train a fresh table on the augmented stream only.
inline PipelineResult run_isolated(const EventLog& log, const PipelineConfig& cfg, Warnings* warnings = nullptr) {
  cfg.validate();
  if (log.empty()) throw Error(ErrorKind::EmptyLog, "pipeline needs a non-empty training log");
  PipelineResult out;
  out.report.label = "isolated";
  out.table = QTable{cfg.mode, Vocabulary::from_log(log), cfg.hyperparams};
  try {
    out.report.phases.push_back(detail::finetune_phase("isolated", log, cfg, out.table, out.augmented, warnings));
  } catch (const Error& e) {
    throw PhaseError("isolated", e);
  }
  return out;
}

/// Moving-average series of several runs on a common step grid.
struct Comparison {
  std::vector<std::string> labels;
  std::uint64_t interval = 0;
  std::vector<std::uint64_t> steps;
  std::vector<std::vector<std::optional<double>>> series;  // [report][grid index]
  std::vector<std::vector<std::optional<double>>> delta;   // series minus the first report's
  std::vector<double> finals;                              // final moving average per report
  std::vector<std::optional<double>> improvement;          // finals[i] / finals[0] - 1
};

namespace detail {

inline std::vector<StatSample> flatten(const RunReport& r) {
  std::vector<StatSample> all;
  for (const auto& p : r.phases) all.insert(all.end(), p.stats.samples.begin(), p.stats.samples.end());
  return all;
}

}  // namespace detail

/// Aligns runs on multiples of the coarsest sampling interval; each grid
/// value is the latest sample at or before that step.
inline Comparison compare_runs(const std::vector<RunReport>& reports, Warnings* warnings = nullptr) {
  if (reports.size() < 2) throw Error(ErrorKind::Argument, "comparison needs at least two reports");
  Comparison out;
  std::uint64_t coarsest = 0;
  std::uint64_t finest = UINT64_MAX;
  std::uint64_t last_step = 0;
  std::vector<std::vector<StatSample>> flat;
  for (const auto& r : reports) {
    out.labels.push_back(r.label);
    for (const auto& p : r.phases) {
      coarsest = std::max(coarsest, p.stats.interval);
      finest = std::min(finest, p.stats.interval);
    }
    flat.push_back(detail::flatten(r));
    if (!flat.back().empty()) last_step = std::max(last_step, flat.back().back().step);
  }
  if (coarsest == 0) coarsest = 1;
  if (finest != UINT64_MAX && finest != coarsest) {
    warn(warnings, "sampling intervals differ; resampled to every " + std::to_string(coarsest) + " steps");
  }
  out.interval = coarsest;
  for (std::uint64_t s = 0; s <= last_step; s += coarsest) out.steps.push_back(s);

  for (const auto& samples : flat) {
    std::vector<std::optional<double>> row;
    std::size_t k = 0;
    std::optional<double> held;
    for (const auto g : out.steps) {
      while (k < samples.size() && samples[k].step <= g) held = samples[k++].moving_avg;
      const bool in_range = !samples.empty() && g <= samples.back().step;
      row.push_back(in_range ? held : std::nullopt);
    }
    out.series.push_back(std::move(row));
  }
  for (const auto& row : out.series) {
    std::vector<std::optional<double>> d;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] && out.series[0][i]) {
        d.emplace_back(*row[i] - *out.series[0][i]);
      } else {
        d.emplace_back(std::nullopt);
      }
    }
    out.delta.push_back(std::move(d));
  }
  for (const auto& r : reports) out.finals.push_back(r.final_moving_avg());
  for (const double f : out.finals) {
    if (out.finals[0] == 0.0) {
      out.improvement.emplace_back(std::nullopt);
    } else {
      out.improvement.emplace_back(f / out.finals[0] - 1.0);
    }
  }
  return out;
}

inline std::string comparison_series_csv(const Comparison& c) {
  std::string out = "step";
  for (const auto& l : c.labels) out += "," + l;
  for (std::size_t i = 1; i < c.labels.size(); ++i) out += ",delta_" + c.labels[i];
  out += "\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; };
  for (std::size_t g = 0; g < c.steps.size(); ++g) {
    out += std::to_string(c.steps[g]);
    for (const auto& row : c.series) out += "," + cell(row[g]);
    for (std::size_t i = 1; i < c.delta.size(); ++i) out += "," + cell(c.delta[i][g]);
    out += "\n";
  }
  return out;
}

inline std::string comparison_finals_csv(const Comparison& c) {
  std::string out = "run,final_moving_avg,improvement_vs_" + c.labels.front() + "\n";
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    out += c.labels[i] + "," + format_double(c.finals[i]) + "," +
           (c.improvement[i] ? format_double(*c.improvement[i]) : std::string{}) + "\n";
  }
  return out;
}

/// Deterministic JSON form (wall-clock timings are left out so reruns are
/// byte-identical).
inline nlohmann::ordered_json run_report_to_json(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json phases = ordered_json::array();
  for (const auto& p : r.phases) {
    phases.push_back(ordered_json{{"name", p.name},
                                  {"updates", p.updates},
                                  {"samples", p.stats.samples.size()},
                                  {"stats_interval", p.stats.interval},
                                  {"moving_average_window", p.stats.window},
                                  {"final_mean_q", p.final_mean_q()},
                                  {"final_moving_avg", p.final_moving_avg()}});
  }
  ordered_json doc;
  doc["label"] = r.label;
  doc["phases"] = std::move(phases);
  doc["total_updates"] = r.total_updates();
  const auto imp = r.improvement();
  doc["improvement"] = imp ? ordered_json(*imp) : ordered_json(nullptr);
  return doc;
}

}  // namespace forlaps
