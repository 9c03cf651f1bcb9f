#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "forlaps/error.hpp"
#include "forlaps/format.hpp"
#include "forlaps/mdp.hpp"
#include "forlaps/qlearn.hpp"

namespace forlaps {

inline constexpr const char* kSnapshotFormat = "forlaps-qtable";
inline constexpr int kSnapshotVersion = 1;

/// Q-table document. Entries come out in canonical state order, then action
/// order, so identical tables serialize to identical bytes.
inline nlohmann::ordered_json qtable_to_json(const QTable& table) {
  using nlohmann::ordered_json;
  const auto& vocab = table.vocabulary();
  ordered_json meta;
  meta["mode"] = std::string(to_string(table.mode()));
  meta["vocabulary"] = vocab.labels();
  meta["hyperparams"] = {{"alpha", table.hyperparams().alpha},
                         {"gamma", table.hyperparams().gamma},
                         {"seed", table.hyperparams().seed}};
  meta["steps"] = table.steps();
  meta["action_frequency"] = table.action_frequency();

  ordered_json entries = ordered_json::array();
  for (const auto& [state, actions] : table.entries()) {
    const auto labels = state.labels(vocab);
    for (const auto& [a, q] : actions) {
      entries.push_back(ordered_json{{"state", labels}, {"action", vocab.label(a)}, {"q", q}});
    }
  }
  ordered_json doc;
  doc["format"] = kSnapshotFormat;
  doc["version"] = kSnapshotVersion;
  doc["metadata"] = std::move(meta);
  doc["entries"] = std::move(entries);
  return doc;
}

inline std::string serialize_qtable(const QTable& table) { return qtable_to_json(table).dump(2) + "\n"; }

inline QTable qtable_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", std::string{}) != kSnapshotFormat) {
      throw Error(ErrorKind::Version, "not a Q-table snapshot (format tag missing)");
    }
    const int version = doc.at("version").get<int>();
    if (version != kSnapshotVersion) {
      throw Error(ErrorKind::Version, "unsupported snapshot version " + std::to_string(version) +
                                          " (expected " + std::to_string(kSnapshotVersion) + ")");
    }
    const auto& meta = doc.at("metadata");
    const auto mode = parse_state_mode(meta.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorKind::Config, "snapshot has unknown state mode");
    const auto labels = meta.at("vocabulary").get<std::vector<std::string>>();
    Vocabulary vocab{labels};
    if (vocab.labels() != labels) throw Error(ErrorKind::Config, "snapshot vocabulary must be sorted and unique");
    Hyperparams hp;
    if (meta.contains("hyperparams")) {
      const auto& h = meta.at("hyperparams");
      hp.alpha = h.value("alpha", hp.alpha);
      hp.gamma = h.value("gamma", hp.gamma);
      hp.seed = h.value("seed", hp.seed);
    }
    QTable table{*mode, vocab, hp};
    std::vector<std::uint64_t> freq(vocab.size(), 0);
    if (meta.contains("action_frequency")) freq = meta.at("action_frequency").get<std::vector<std::uint64_t>>();
    table.restore_counters(meta.value("steps", std::uint64_t{0}), std::move(freq));
    for (const auto& e : doc.at("entries")) {
      std::vector<ActionId> ids;
      for (const auto& l : e.at("state")) ids.push_back(vocab.id(l.get<std::string>()));
      const StateKey key = *mode == StateMode::RemainingSet ? StateKey::remaining(ids) : StateKey::prefix(ids);
      const double q = e.at("q").get<double>();
      table.set(key, vocab.id(e.at("action").get<std::string>()), q);
    }
    return table;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::Config, std::string("malformed Q-table snapshot: ") + ex.what());
  }
}

inline QTable parse_qtable(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::Config, std::string("snapshot is not valid JSON: ") + ex.what());
  }
  return qtable_from_json(doc);
}

inline QTable load_qtable(const std::string& path) { return parse_qtable(read_file(path)); }

/// `step,mean_q,moving_avg,std` rows for plotting.
inline std::string stats_to_csv(const TrainStats& stats, const std::string& phase = {}) {
  std::string out = phase.empty() ? "step,mean_q,moving_avg,std\n" : "phase,step,mean_q,moving_avg,std\n";
  for (const auto& s : stats.samples) {
    if (!phase.empty()) out += phase + ",";
    out += std::to_string(s.step) + "," + format_double(s.mean_q) + "," + format_double(s.moving_avg) + "," +
           format_double(s.stddev) + "\n";
  }
  return out;
}

}  // namespace forlaps
