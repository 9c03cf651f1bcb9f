#pragma once

#include <atomic>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "forlaps/config.hpp"
#include "forlaps/error.hpp"
#include "forlaps/policy.hpp"

namespace forlaps {

inline constexpr const char* kServiceVersion = "1.0.0";

/// Wire form shared by the service and `forlaps recommend`.
inline nlohmann::ordered_json ranking_to_json(const Ranking& ranking, const std::string& policy_version) {
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : ranking.items) recs.push_back({{"activity", r.activity}, {"q", r.q}, {"rank", r.rank}});
  return {{"recommendations", std::move(recs)},
          {"fallback_used", ranking.fallback_used},
          {"policy_version", policy_version}};
}

struct HttpResponse {
  int status = 200;
  nlohmann::ordered_json body;

  std::string text() const { return body.dump(); }
};

/// HTTP/JSON front of a frozen policy. Handlers are plain member functions so
/// they can be exercised without a socket; mount() wires them into httplib.
/// The policy is installed once; afterwards every handler is read-only.
class RecommendationService {
 public:
  explicit RecommendationService(ServiceConfig cfg = {}) : cfg_(std::move(cfg)) {}

  void load(std::shared_ptr<const Policy> policy, std::string snapshot_hash) {
    if (ready_.load(std::memory_order_acquire)) throw Error(ErrorKind::Argument, "service policy already loaded");
    if (!policy) throw Error(ErrorKind::Argument, "service needs a policy");
    policy_ = std::move(policy);
    hash_ = std::move(snapshot_hash);
    ready_.store(true, std::memory_order_release);
  }

  bool ready() const noexcept { return ready_.load(std::memory_order_acquire); }
  const ServiceConfig& config() const noexcept { return cfg_; }

  HttpResponse health() const {
    if (!ready()) return {503, {{"status", "loading"}, {"version", kServiceVersion}}};
    return {200, {{"status", "ok"}, {"version", kServiceVersion}, {"snapshot_hash", hash_}}};
  }

  HttpResponse vocabulary() const {
    if (!ready()) return not_ready();
    return {200, {{"activities", policy_->vocabulary().labels()}}};
  }

  HttpResponse recommend(std::string_view body_text) const {
    if (!ready()) return not_ready();
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(body_text);
    } catch (const nlohmann::json::exception&) {
      return error(400, "request body is not valid JSON");
    }
    if (!req.is_object()) return error(400, "request body must be a JSON object");

    const StateMode mode = policy_->mode();
    if (req.contains("mode")) {
      if (!req["mode"].is_string()) return error(400, "'mode' must be a string");
      const auto m = parse_state_mode(req["mode"].get<std::string>());
      if (!m) return error(400, "'mode' must be 'remaining' or 'prefix'");
      if (*m != mode) return error(400, "request mode does not match the policy mode");
    }
    const bool has_prefix = req.contains("executed_prefix");
    const bool has_remaining = req.contains("remaining");
    if (has_prefix == has_remaining) return error(400, "supply exactly one of 'executed_prefix' or 'remaining'");
    if (has_prefix != (mode == StateMode::ExecutedPrefix)) {
      return error(400, std::string("this policy expects '") +
                            (mode == StateMode::ExecutedPrefix ? "executed_prefix" : "remaining") + "'");
    }
    std::size_t k = 1;
    if (req.contains("k")) {
      const auto& kj = req["k"];
      if (!kj.is_number_integer() || kj.get<long long>() < 1) return error(400, "'k' must be an integer >= 1");
      k = kj.get<std::size_t>();
    }
    const auto& items = has_prefix ? req["executed_prefix"] : req["remaining"];
    if (!items.is_array()) return error(400, "activity list must be an array");

    const auto& vocab = policy_->vocabulary();
    std::vector<ActionId> ids;
    std::set<std::string> seen;
    for (const auto& item : items) {
      if (!item.is_string()) return error(400, "activity labels must be strings");
      const auto label = item.get<std::string>();
      const auto id = vocab.find(label);
      if (!id) {
        HttpResponse r = error(404, "unknown activity '" + label + "'");
        r.body["activity"] = label;
        return r;
      }
      if (has_remaining && !seen.insert(label).second) return error(400, "duplicate activity '" + label + "' in remaining set");
      ids.push_back(*id);
    }
    const StateKey state = has_prefix ? StateKey::prefix(std::move(ids)) : StateKey::remaining(std::move(ids));
    try {
      const Ranking ranking = policy_->rank_actions(state, k);
      return {200, ranking_to_json(ranking, hash_)};
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::UnseenState) {
        HttpResponse r = error(422, e.what());
        r.body["state"] = state.labels(vocab);
        return r;
      }
      return error(400, e.what());
    }
  }

  void mount(httplib::Server& server) const {
    server.set_default_headers({{"Access-Control-Allow-Origin", cfg_.cors_origin},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    auto send = [](httplib::Response& res, const HttpResponse& r) {
      res.status = r.status;
      res.set_content(r.text(), "application/json");
    };
    server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    server.Get("/vocabulary",
               [this, send](const httplib::Request&, httplib::Response& res) { send(res, vocabulary()); });
    server.Post("/recommend", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, recommend(req.body));
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }

 private:
  static HttpResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }
  static HttpResponse not_ready() { return error(503, "policy snapshot not loaded yet"); }

  ServiceConfig cfg_;
  std::shared_ptr<const Policy> policy_;
  std::string hash_;
  std::atomic<bool> ready_{false};
};

}  // namespace forlaps
