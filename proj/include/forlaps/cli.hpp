#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forlaps/augment.hpp"
#include "forlaps/config.hpp"
#include "forlaps/error.hpp"
#include "forlaps/evaluate.hpp"
#include "forlaps/eventlog.hpp"
#include "forlaps/finetune.hpp"
#include "forlaps/format.hpp"
#include "forlaps/policy.hpp"
#include "forlaps/service.hpp"
#include "forlaps/snapshot.hpp"

namespace forlaps::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntime = 1;
inline constexpr int kConfigOrIo = 2;
inline constexpr int kUnseenState = 3;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnseenState: return kUnseenState;
    case ErrorKind::Numeric:
    case ErrorKind::EmptyLog: return kRuntime;
    default: return kConfigOrIo;
  }
}

enum class LogLevel { Quiet, Warn, Info };

/// FORLAPS_LOG=quiet|warn|info (default warn).
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("FORLAPS_LOG");
  if (v == nullptr) return LogLevel::Warn;
  const std::string s(v);
  if (s == "quiet") return LogLevel::Quiet;
  if (s == "info" || s == "debug") return LogLevel::Info;
  return LogLevel::Warn;
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool isolated = false;
  bool offline_only = false;
  std::string mode;
  std::string snapshot;
  std::string out_dir;
  std::string recommender_csv;
  std::string recommender_name = "external";
  std::size_t k = 1;
  std::string fallback;
  std::vector<std::string> activities;
  std::string host;
  int port = -1;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err), level_(log_level_from_env()) {}

  int train(const Options& o) {
    const auto cfg = engine_config(o);
    const auto split = load_split(cfg);
    PipelineConfig pc = cfg.pipeline;
    pc.offline_only = true;
    auto result = run_forlaps(split.train, pc, &warnings_);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "qtable.json", serialize_qtable(result.table));
    write_file(dir / "stats.csv", stats_to_csv(result.report.phases.front().stats));
    info("trained " + std::to_string(result.table.steps()) + " updates on " + std::to_string(split.train.size()) +
         " traces (" + format_double(result.report.phases.front().wall_seconds) + " s)");
    return kOk;
  }

  int forlaps(const Options& o) {
    auto cfg = engine_config(o);
    if (o.offline_only) cfg.pipeline.offline_only = true;
    const auto split = load_split(cfg);
    auto result = o.isolated ? run_isolated(split.train, cfg.pipeline, &warnings_)
                             : run_forlaps(split.train, cfg.pipeline, &warnings_);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "qtable.json", serialize_qtable(result.table));
    write_file(dir / "stats.csv", phases_csv(result.report));
    write_file(dir / "run_report.json", run_report_to_json(result.report).dump(2) + "\n");
    for (const auto& p : result.report.phases) {
      info("phase " + p.name + ": " + std::to_string(p.updates) + " updates, final moving-average mean Q " +
           format_double(p.final_moving_avg()) + " (" + format_double(p.wall_seconds) + " s)");
    }
    return kOk;
  }

  int compare(const Options& o) {
    auto cfg = engine_config(o);
    const auto split = load_split(cfg);
    PipelineConfig offline = cfg.pipeline;
    offline.offline_only = true;
    PipelineConfig combined = cfg.pipeline;
    combined.offline_only = false;
    std::vector<RunReport> reports;
    reports.push_back(run_forlaps(split.train, offline, &warnings_).report);
    reports.push_back(run_forlaps(split.train, combined, &warnings_).report);
    reports.push_back(run_isolated(split.train, combined, &warnings_).report);
    const auto cmp = compare_runs(reports, &warnings_);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "comparison_series.csv", comparison_series_csv(cmp));
    write_file(dir / "comparison_finals.csv", comparison_finals_csv(cmp));
    return kOk;
  }

  int ingest(const Options& o) {
    const auto cfg = engine_config(o);
    const auto log = load_labeled_log(cfg);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "events.csv", to_csv(log));
    std::string outcomes = "case_id,outcome,wasted_activities,wasted_time_s,events\n";
    for (const auto& t : log.traces()) {
      std::string row;
      csv::append_row(row, {t.case_id, std::string(to_string(t.outcome->categorical)),
                            std::to_string(t.outcome->wasted_activities),
                            std::to_string(t.outcome->wasted_time.count() / 1000), std::to_string(t.size())});
      outcomes += row;
    }
    write_file(dir / "outcomes.csv", outcomes);
    info("ingested " + std::to_string(log.size()) + " traces, " + std::to_string(log.event_count()) + " events");
    return kOk;
  }

  int augment(const Options& o) {
    const auto cfg = engine_config(o);
    const auto split = load_split(cfg);
    const auto vocab = Vocabulary::from_log(split.train);
    const auto synth =
        synthesize_stream(split.train, cfg.pipeline.augment, vocab, cfg.pipeline.mode, cfg.pipeline.reward, &warnings_);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "augmented_log.csv", to_csv(synth.log.as_log()));
    write_file(dir / "augmented_provenance.csv", provenance_to_csv(synth.log));
    info("synthesized " + std::to_string(synth.transitions.size()) + " transitions from " +
         std::to_string(synth.log.traces.size()) + " sampled traces");
    return kOk;
  }

  int evaluate(const Options& o) {
    const auto cfg = engine_config(o);
    if (o.snapshot.empty()) throw Error(ErrorKind::Argument, "--snapshot is required");
    auto table = std::make_shared<const QTable>(load_qtable(o.snapshot));
    std::optional<std::map<std::string, std::vector<std::string>>> external;
    if (!o.recommender_csv.empty()) external = parse_recommendations_csv(read_file(o.recommender_csv));
    const auto split = load_split(cfg);
    if (split.test.empty()) throw Error(ErrorKind::EmptyLog, "no test traces: the test split is empty");
    if (table->mode() != cfg.pipeline.mode) {
      throw Error(ErrorKind::Config, "snapshot mode '" + std::string(to_string(table->mode())) +
                                         "' does not match configured mode '" +
                                         std::string(to_string(cfg.pipeline.mode)) + "'");
    }
    const Policy policy{table, fallback_for(o, cfg)};
    const std::int64_t last = cfg.last_activity_seconds.value_or(median_activity_seconds(split.test));
    std::vector<SchedulePair> pairs;
    for (const auto& t : split.test.traces()) pairs.push_back(replay_trace(t, policy, last, cfg.pipeline.mode));
    const auto kpi = kpi_aggregate(pairs);

    std::vector<NamedRecommender> recs{policy_recommender(policy)};
    if (external) recs.push_back(table_recommender(*external, o.recommender_name));
    const auto dist = distance_eval(split.test, recs, cfg.dataset, &warnings_);

    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "kpi_report.json", kpi_to_json(kpi).dump(2) + "\n");
    write_file(dir / "kpi_report.csv", kpi_to_csv(kpi));
    write_file(dir / "distance_report.json", distance_to_json(dist).dump(2) + "\n");
    write_file(dir / "distance_report.csv", distance_to_csv(dist));
    return kOk;
  }

  int recommend(const Options& o) {
    if (o.snapshot.empty()) throw Error(ErrorKind::Argument, "--snapshot is required");
    const std::string text = read_file(o.snapshot);
    auto table = std::make_shared<const QTable>(parse_qtable(text));
    if (!o.mode.empty()) {
      const auto m = parse_state_mode(o.mode);
      if (!m) throw Error(ErrorKind::Argument, "--mode must be 'remaining' or 'prefix'");
      if (*m != table->mode()) throw Error(ErrorKind::Argument, "--mode does not match the snapshot's mode");
    }
    std::optional<Fallback> fb;
    if (!o.fallback.empty()) {
      fb = parse_fallback(o.fallback);
      if (!fb) throw Error(ErrorKind::Argument, "--fallback must be error, subset or frequency");
    }
    const Policy policy{table, fb.value_or(default_fallback(table->mode()))};
    const auto state = state_from_args(o.activities, policy);
    try {
      const auto ranking = policy.rank_actions(state, o.k);
      out_ << ranking_to_json(ranking, fnv1a_hex(text)).dump(2) << "\n";
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::UnseenState) {
        nlohmann::ordered_json j{{"error", "unseen_state"}, {"message", e.what()},
                                 {"state", state.labels(policy.vocabulary())}};
        err_ << j.dump() << "\n";
        return kUnseenState;
      }
      throw;
    }
    return kOk;
  }

  int serve(const Options& o) {
    ServiceConfig sc;
    std::optional<Fallback> fb;
    if (!o.config.empty()) {
      const auto cfg = engine_config(o);
      sc = cfg.service;
      fb = cfg.fallback;
    }
    if (!o.host.empty()) sc.host = o.host;
    if (o.port >= 0) sc.port = o.port;
    if (!o.fallback.empty()) fb = parse_fallback(o.fallback);
    if (o.snapshot.empty()) throw Error(ErrorKind::Argument, "--snapshot is required");

    RecommendationService service{sc};
    httplib::Server server;
    service.mount(server);
    if (!server.bind_to_port(sc.host, sc.port)) {
      throw Error(ErrorKind::Io, "cannot bind " + sc.host + ":" + std::to_string(sc.port));
    }
    const std::string text = read_file(o.snapshot);
    auto table = std::make_shared<const QTable>(parse_qtable(text));
    service.load(std::make_shared<const Policy>(table, fb.value_or(default_fallback(table->mode()))),
                 fnv1a_hex(text));
    info("serving " + o.snapshot + " on " + sc.host + ":" + std::to_string(sc.port));
    server.listen_after_bind();
    return kOk;
  }

  void flush_warnings() {
    if (level_ != LogLevel::Quiet) {
      for (const auto& w : warnings_.messages()) err_ << "warning: " << w << "\n";
    }
    warnings_.clear();
  }

 private:
  EngineConfig engine_config(const Options& o) const {
    if (o.config.empty()) throw Error(ErrorKind::Argument, "--config is required");
    auto cfg = load_config(o.config);
    if (o.seed) cfg.set_seed(*o.seed);
    if (!o.mode.empty()) {
      const auto m = parse_state_mode(o.mode);
      if (!m) throw Error(ErrorKind::Argument, "--mode must be 'remaining' or 'prefix'");
      cfg.pipeline.mode = *m;
    }
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    cfg.validate();
    return cfg;
  }

  static Fallback fallback_for(const Options& o, const EngineConfig& cfg) {
    if (!o.fallback.empty()) {
      const auto fb = parse_fallback(o.fallback);
      if (!fb) throw Error(ErrorKind::Argument, "--fallback must be error, subset or frequency");
      return *fb;
    }
    return cfg.effective_fallback();
  }

  LogSplit load_split(const EngineConfig& cfg) {
    const auto log = load_labeled_log(cfg);
    return split_train_test(log, cfg.train_fraction, cfg.split_seed, &warnings_);
  }

  static std::filesystem::path prepare_out_dir(const EngineConfig& cfg) {
    const std::filesystem::path dir{cfg.out_dir};
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
  }

  static void write_file(const std::filesystem::path& p, std::string_view contents) {
    forlaps::write_file(p.string(), contents);
  }

  static std::string phases_csv(const RunReport& r) {
    std::string out = "phase,step,mean_q,moving_avg,std\n";
    for (const auto& p : r.phases) {
      const auto body = stats_to_csv(p.stats, p.name);
      out += body.substr(body.find('\n') + 1);
    }
    return out;
  }

  static StateKey state_from_args(const std::vector<std::string>& args, const Policy& policy) {
    std::vector<ActionId> ids;
    std::set<std::string> seen;
    for (const auto& a : args) {
      if (a.empty()) throw Error(ErrorKind::Argument, "empty activity label in state");
      const auto id = policy.vocabulary().find(a);
      if (!id) throw Error(ErrorKind::Argument, "unknown activity '" + a + "' in state");
      if (policy.mode() == StateMode::RemainingSet && !seen.insert(a).second) {
        throw Error(ErrorKind::Argument, "activity '" + a + "' repeated in remaining set");
      }
      ids.push_back(*id);
    }
    return policy.mode() == StateMode::RemainingSet ? StateKey::remaining(std::move(ids))
                                                    : StateKey::prefix(std::move(ids));
  }

  void info(const std::string& msg) {
    if (level_ == LogLevel::Info) err_ << "info: " << msg << "\n";
  }

  std::ostream& out_;
  std::ostream& err_;
  LogLevel level_;
  Warnings warnings_;
};

/// Entry point shared by the `forlaps` binary and the tests.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Offline Q-learning next-best-activity engine for event logs", "forlaps"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Engine config file (JSON)")->required();
    cmd->add_option("--seed", o.seed, "Override every seed in the config");
    cmd->add_option("--mode", o.mode, "State encoding: remaining | prefix");
    cmd->add_option("--out-dir", o.out_dir, "Output directory");
  };
  auto* ingest = app.add_subcommand("ingest", "Parse, label and export the configured log");
  add_config(ingest);
  auto* train = app.add_subcommand("train", "Offline Q-learning on the train split");
  add_config(train);
  auto* augment = app.add_subcommand("augment", "Dump an augmented log and its provenance");
  add_config(augment);
  auto* forlaps = app.add_subcommand("forlaps", "Offline pre-training followed by augmented fine-tuning");
  add_config(forlaps);
  forlaps->add_flag("--isolated", o.isolated, "Train a fresh table on the augmented stream only");
  forlaps->add_flag("--offline-only", o.offline_only, "Skip the fine-tuning phase");
  auto* compare = app.add_subcommand("compare", "Offline vs fine-tuned vs isolated Q-value series");
  add_config(compare);
  auto* evaluate = app.add_subcommand("evaluate", "Replay KPIs and distance report on the test split");
  add_config(evaluate);
  evaluate->add_option("--snapshot", o.snapshot, "Q-table snapshot")->required();
  evaluate->add_option("--recommender-csv", o.recommender_csv, "External recommender rows (case_id,position,activity)");
  evaluate->add_option("--recommender-name", o.recommender_name, "Column name for the external recommender");
  evaluate->add_option("--fallback", o.fallback, "Unseen-state fallback: error | subset | frequency");
  auto* recommend = app.add_subcommand("recommend", "Rank next activities for a state");
  recommend->add_option("--snapshot", o.snapshot, "Q-table snapshot")->required();
  recommend->add_option("--k", o.k, "Number of recommendations")->check(CLI::PositiveNumber);
  recommend->add_option("--mode", o.mode, "Assert the snapshot's state mode");
  recommend->add_option("--fallback", o.fallback, "Unseen-state fallback: error | subset | frequency");
  recommend->add_option("activities", o.activities, "Executed prefix or remaining activities");
  auto* serve = app.add_subcommand("serve", "HTTP recommendation service");
  serve->add_option("--snapshot", o.snapshot, "Q-table snapshot")->required();
  serve->add_option("--config", o.config, "Engine config (service section)");
  serve->add_option("--host", o.host, "Bind host");
  serve->add_option("--port", o.port, "Bind port");
  serve->add_option("--fallback", o.fallback, "Unseen-state fallback: error | subset | frequency");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << nlohmann::ordered_json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return kConfigOrIo;
  }

  Runner runner{out, err};
  try {
    int rc = kOk;
    if (*ingest) rc = runner.ingest(o);
    if (*train) rc = runner.train(o);
    if (*augment) rc = runner.augment(o);
    if (*forlaps) rc = runner.forlaps(o);
    if (*compare) rc = runner.compare(o);
    if (*evaluate) rc = runner.evaluate(o);
    if (*recommend) rc = runner.recommend(o);
    if (*serve) rc = runner.serve(o);
    runner.flush_warnings();
    return rc;
  } catch (const Error& e) {
    runner.flush_warnings();
    err << nlohmann::ordered_json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    runner.flush_warnings();
    err << nlohmann::ordered_json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
    return kRuntime;
  }
}

}  // namespace forlaps::cli
