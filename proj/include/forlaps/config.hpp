#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>

#include <json.hpp>

#include "forlaps/augment.hpp"
#include "forlaps/error.hpp"
#include "forlaps/eventlog.hpp"
#include "forlaps/finetune.hpp"
#include "forlaps/format.hpp"
#include "forlaps/outcome.hpp"
#include "forlaps/policy.hpp"

namespace forlaps {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
};

/// Everything one CLI invocation needs, loaded from a single JSON file.
/// Relative paths are resolved against the config file's directory.
struct EngineConfig {
  std::string dataset = "dataset";
  std::string log_path;
  LogSchema schema;
  PipelineConfig pipeline;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  std::optional<Fallback> fallback;
  std::optional<std::int64_t> last_activity_seconds;
  std::string out_dir = "out";
  ServiceConfig service;

  Fallback effective_fallback() const { return fallback.value_or(default_fallback(pipeline.mode)); }

  /// Applies one seed to every seeded component.
  void set_seed(std::uint64_t seed) {
    pipeline.hyperparams.seed = seed;
    pipeline.augment.seed = seed;
    split_seed = seed;
  }

  void validate() const {
    pipeline.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw Error(ErrorKind::Config, "split.train_fraction must lie in (0,1)");
    }
    if (service.port < 0 || service.port > 65535) throw Error(ErrorKind::Config, "service.port out of range");
    if (last_activity_seconds && *last_activity_seconds < 0) {
      throw Error(ErrorKind::Config, "evaluate.last_activity_seconds must be >= 0");
    }
  }
};

namespace detail {

using Json = nlohmann::json;

inline void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

inline Millis days_to_millis(double days) {
  return Millis{static_cast<std::int64_t>(std::llround(days * 86400000.0))};
}

}  // namespace detail

/// Rule syntax (one key per node):
///   {"contains": "X"}
///   {"contains": "X", "after": ["Y", ...], "within_days": 28}
///   {"attribute_equals": {"attribute": "a", "value": "v"}}
///   {"any_disapproved": true}     {"duration_exceeds_days": 71.52}
///   {"any_of": [...]}  {"all_of": [...]}  {"not": {...}}  {"never": true}
inline OutcomeRule rule_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "outcome rule must be an object");
  try {
    if (j.contains("contains")) {
      detail::reject_unknown(j, "outcome rule", {"contains", "after", "within_days"});
      OutcomeRule r = OutcomeRule::contains(j.at("contains").get<std::string>());
      if (j.contains("after")) {
        const auto& a = j.at("after");
        if (a.is_string()) {
          r.anchors.push_back(a.get<std::string>());
        } else {
          r.anchors = a.get<std::vector<std::string>>();
        }
      }
      if (j.contains("within_days")) {
        if (r.anchors.empty()) throw Error(ErrorKind::Config, "'within_days' needs an 'after' anchor");
        r.window = detail::days_to_millis(j.at("within_days").get<double>());
      }
      return r;
    }
    if (j.size() != 1) throw Error(ErrorKind::Config, "outcome rule node must have exactly one key");
    const auto& [key, value] = *j.items().begin();
    if (key == "never") return OutcomeRule::never();
    if (key == "any_disapproved") return OutcomeRule::any_disapproved();
    if (key == "duration_exceeds_days") return OutcomeRule::duration_exceeds(detail::days_to_millis(value.get<double>()));
    if (key == "attribute_equals") {
      detail::reject_unknown(value, "attribute_equals", {"attribute", "value"});
      return OutcomeRule::attribute_equals(value.at("attribute").get<std::string>(),
                                           value.at("value").get<std::string>());
    }
    if (key == "any_of" || key == "all_of") {
      std::vector<OutcomeRule> children;
      for (const auto& c : value) children.push_back(rule_from_json(c));
      return key == "any_of" ? OutcomeRule::any_of(std::move(children)) : OutcomeRule::all_of(std::move(children));
    }
    if (key == "not") return OutcomeRule::negate(rule_from_json(value));
    throw Error(ErrorKind::Config, "unknown outcome rule '" + key + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed outcome rule: ") + e.what());
  }
}

inline EngineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::reject_unknown;
  EngineConfig c;
  try {
    reject_unknown(j, "config", {"dataset", "seed", "log", "mode", "reward", "hyperparams", "augment", "pipeline",
                                 "split", "policy", "evaluate", "out_dir", "service"});
    c.dataset = j.value("dataset", c.dataset);
    if (j.contains("seed")) c.set_seed(j.at("seed").get<std::uint64_t>());

    const auto& log = j.at("log");
    reject_unknown(log, "log", {"path", "delimiter", "columns", "outcome"});
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path{p};
      return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).lexically_normal().string();
    };
    c.log_path = resolve(log.at("path").get<std::string>());
    if (log.contains("delimiter")) {
      const auto d = log.at("delimiter").get<std::string>();
      if (d.size() != 1) throw Error(ErrorKind::Config, "log.delimiter must be a single character");
      c.schema.delimiter = d[0];
    }
    if (log.contains("columns")) {
      const auto& cols = log.at("columns");
      reject_unknown(cols, "log.columns", {"case", "activity", "timestamp", "timestamp_format", "status"});
      c.schema.case_column = cols.value("case", c.schema.case_column);
      c.schema.activity_column = cols.value("activity", c.schema.activity_column);
      c.schema.timestamp_column = cols.value("timestamp", c.schema.timestamp_column);
      c.schema.timestamp_format = cols.value("timestamp_format", c.schema.timestamp_format);
      if (cols.contains("status") && !cols.at("status").is_null()) {
        c.schema.status_column = cols.at("status").get<std::string>();
      }
    }
    if (log.contains("outcome")) c.schema.outcome = rule_from_json(log.at("outcome"));

    if (j.contains("mode")) {
      const auto m = parse_state_mode(j.at("mode").get<std::string>());
      if (!m) throw Error(ErrorKind::Config, "mode must be 'remaining' or 'prefix'");
      c.pipeline.mode = *m;
    }
    if (j.contains("reward")) {
      const auto& r = j.at("reward");
      reject_unknown(r, "reward", {"base", "mode", "position_penalty", "importance"});
      c.pipeline.reward.base_reward = r.value("base", c.pipeline.reward.base_reward);
      if (r.contains("mode")) {
        const auto m = parse_reward_mode(r.at("mode").get<std::string>());
        if (!m) throw Error(ErrorKind::Config, "reward.mode must be 'per_task_status' or 'trace_outcome'");
        c.pipeline.reward.mode = *m;
      }
      c.pipeline.reward.position_penalty = r.value("position_penalty", c.pipeline.reward.position_penalty);
      if (r.contains("importance")) c.pipeline.reward.importance = r.at("importance").get<std::map<std::string, double>>();
    }
    if (j.contains("hyperparams")) {
      const auto& h = j.at("hyperparams");
      reject_unknown(h, "hyperparams", {"alpha", "gamma", "seed"});
      auto& hp = c.pipeline.hyperparams;
      hp.alpha = h.value("alpha", hp.alpha);
      hp.gamma = h.value("gamma", hp.gamma);
      hp.seed = h.value("seed", hp.seed);
    }
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      reject_unknown(a, "augment", {"preset", "timestamp_noise_frac", "drop_complete_frac", "removal_frac",
                                    "protected_activities", "min_trace_len_for_removal", "target_transitions",
                                    "seed", "completion"});
      auto& ac = c.pipeline.augment;
      const auto seed = ac.seed;
      if (a.contains("preset")) {
        const auto p = a.at("preset").get<std::string>();
        if (p == "case_study") {
          ac = AugmentConfig::case_study();
        } else if (p == "public_dataset") {
          ac = AugmentConfig::public_dataset();
        } else {
          throw Error(ErrorKind::Config, "augment.preset must be 'case_study' or 'public_dataset'");
        }
        ac.seed = seed;
      }
      ac.timestamp_noise_frac = a.value("timestamp_noise_frac", ac.timestamp_noise_frac);
      ac.drop_complete_frac = a.value("drop_complete_frac", ac.drop_complete_frac);
      ac.removal_frac = a.value("removal_frac", ac.removal_frac);
      if (a.contains("protected_activities")) {
        ac.protected_activities = a.at("protected_activities").get<std::set<std::string>>();
      }
      ac.min_trace_len_for_removal = a.value("min_trace_len_for_removal", ac.min_trace_len_for_removal);
      if (a.contains("target_transitions")) {
        const auto t = a.at("target_transitions").get<std::int64_t>();
        if (t < 1) throw Error(ErrorKind::Config, "augment.target_transitions must be >= 1");
        ac.target_transitions = static_cast<std::uint64_t>(t);
      }
      ac.seed = a.value("seed", ac.seed);
      if (a.contains("completion")) {
        const auto comp = parse_completion(a.at("completion").get<std::string>());
        if (!comp) throw Error(ErrorKind::Config, "augment.completion must be auto, all_approved or outcome_desired");
        ac.completion = *comp;
      }
    }
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      reject_unknown(p, "pipeline", {"offline_passes", "stats_interval", "moving_average_window", "offline_only"});
      auto& pc = c.pipeline;
      if (p.contains("offline_passes")) {
        const auto n = p.at("offline_passes").get<std::int64_t>();
        if (n < 1) throw Error(ErrorKind::Config, "pipeline.offline_passes must be >= 1");
        pc.offline_passes = static_cast<std::uint64_t>(n);
      }
      pc.train.stats_interval = p.value("stats_interval", pc.train.stats_interval);
      pc.train.moving_average_window = p.value("moving_average_window", pc.train.moving_average_window);
      pc.offline_only = p.value("offline_only", pc.offline_only);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, "split", {"train_fraction", "seed"});
      c.train_fraction = s.value("train_fraction", c.train_fraction);
      c.split_seed = s.value("seed", c.split_seed);
    }
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      reject_unknown(p, "policy", {"fallback"});
      if (p.contains("fallback")) {
        c.fallback = parse_fallback(p.at("fallback").get<std::string>());
        if (!c.fallback) throw Error(ErrorKind::Config, "policy.fallback must be error, subset or frequency");
      }
    }
    if (j.contains("evaluate")) {
      const auto& e = j.at("evaluate");
      reject_unknown(e, "evaluate", {"last_activity_seconds"});
      if (e.contains("last_activity_seconds") && !e.at("last_activity_seconds").is_null()) {
        c.last_activity_seconds = e.at("last_activity_seconds").get<std::int64_t>();
      }
    }
    if (j.contains("out_dir")) c.out_dir = resolve(j.at("out_dir").get<std::string>());
    if (j.contains("service")) {
      const auto& s = j.at("service");
      reject_unknown(s, "service", {"host", "port", "cors_origin"});
      c.service.host = s.value("host", c.service.host);
      c.service.port = s.value("port", c.service.port);
      c.service.cors_origin = s.value("cors_origin", c.service.cors_origin);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

inline EngineConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path());
}

/// Reads, parses and labels the configured log.
inline EventLog load_labeled_log(const EngineConfig& c) {
  return label_outcomes(parse_csv(read_file(c.log_path), c.schema), c.schema);
}

}  // namespace forlaps
