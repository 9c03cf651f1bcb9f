#include <gtest/gtest.h>

#include <fstream>

#include "forlaps/distance.hpp"
#include "forlaps/evaluate.hpp"
#include "forlaps/snapshot.hpp"
#include "support.hpp"

namespace forlaps {
namespace {

using test::A;
using test::make_trace;
using test::X;

using Seq = std::vector<std::string>;

TEST(Distance, Examples) {
  EXPECT_EQ(damerau_levenshtein(Seq{"A", "B", "C"}, Seq{"A", "B", "C"}), 0u);
  EXPECT_EQ(damerau_levenshtein(Seq{"A", "B", "C"}, Seq{"A", "C", "B"}), 1u);
  EXPECT_EQ(damerau_levenshtein(Seq{"A", "B", "C", "D"}, Seq{"B", "A", "D"}), 2u);
  EXPECT_EQ(damerau_levenshtein(Seq{}, Seq{"A", "B"}), 2u);
  // Transposition with an insertion between: CA -> AC -> ABC.
  EXPECT_EQ(damerau_levenshtein(Seq{"C", "A"}, Seq{"A", "B", "C"}), 2u);
  EXPECT_EQ(damerau_levenshtein(Seq{"ER Triage", "CRP"}, Seq{"CRP", "ER Triage"}), 1u);
}

TEST(Distance, MetricAxiomsOnSmallStrings) {
  std::vector<Seq> all{{}};
  for (std::size_t len = 1; len <= 3; ++len) {
    std::vector<Seq> next;
    for (const auto& s : all) {
      if (s.size() != len - 1) continue;
      for (const char* c : {"x", "y", "z"}) {
        auto t = s;
        t.push_back(c);
        next.push_back(t);
      }
    }
    all.insert(all.end(), next.begin(), next.end());
  }
  for (const auto& a : all) {
    for (const auto& b : all) {
      const auto ab = damerau_levenshtein(a, b);
      EXPECT_EQ(ab, damerau_levenshtein(b, a));
      EXPECT_EQ(ab == 0, a == b);
      for (const auto& c : all) {
        EXPECT_LE(ab, damerau_levenshtein(a, c) + damerau_levenshtein(c, b));
      }
    }
  }
}

constexpr std::int64_t kDay = 86400;

Trace abc_trace() {
  return make_trace("k", {{"A", 0, A}, {"B", 48, A}, {"C", 120, X}});
}

Policy c_first_policy() {
  QTable t{StateMode::RemainingSet, Vocabulary{{"A", "B", "C"}}, {}};
  const auto s = StateKey::remaining({ActionId{0}, ActionId{1}, ActionId{2}});
  t.set(s, ActionId{2}, 1.0);
  t.set(s, ActionId{0}, 0.5);
  t.set(StateKey::remaining({ActionId{0}, ActionId{1}}), ActionId{0}, 1.0);
  t.set(StateKey::remaining({ActionId{1}}), ActionId{1}, 1.0);
  return Policy{t};
}

TEST(Replay, FailureFirstSavesWastedWork) {
  const auto pair = replay_trace(abc_trace(), c_first_policy(), kDay);
  EXPECT_EQ(pair.actual.wasted(), 5 * kDay);
  EXPECT_EQ(pair.prescribed.wasted(), 0);
  EXPECT_EQ(pair.actual.span(), 6 * kDay);
  EXPECT_EQ(pair.prescribed.span(), kDay);
  EXPECT_FALSE(pair.partial);
  const auto report = kpi_aggregate({pair});
  EXPECT_EQ(report.total_saved_resource_time_s, 5 * kDay);
  EXPECT_EQ(report.total_saved_time_span_s, 5 * kDay);
  EXPECT_DOUBLE_EQ(report.mean_saved_resource_time_days, 5.0);
  EXPECT_DOUBLE_EQ(report.baseline_per_activity_days, 2.0);
  EXPECT_DOUBLE_EQ(report.resource_opt_pct, 250.0);
}

TEST(Replay, NoFailureSavesNothing) {
  const auto t = make_trace("ok", {{"B", 0, A}, {"A", 5, A}, {"C", 9, A}});
  const auto pair = replay_trace(t, c_first_policy(), 3600);
  EXPECT_FALSE(pair.actual.failure_index());
  EXPECT_FALSE(pair.prescribed.failure_index());
  const auto r = kpi_aggregate({pair});
  EXPECT_EQ(r.total_saved_resource_time_s, 0);
  EXPECT_EQ(r.total_saved_time_span_s, 0);
  EXPECT_EQ(r.span_opt_pct, 0.0);
}

TEST(Replay, SingleActivityIsUnchanged) {
  const auto t = make_trace("one", {{"C", 0, X}});
  const auto pair = replay_trace(t, c_first_policy(), 100);
  EXPECT_EQ(pair.actual.items, pair.prescribed.items);
}

TEST(Replay, ModeMismatchIsConfigError) {
  EXPECT_THROW(replay_trace(abc_trace(), c_first_policy(), 0, StateMode::ExecutedPrefix), Error);
}

TEST(Replay, MedianGapIsLowerMedian) {
  const EventLog log{{make_trace("a", {{"A", 0, A}, {"B", 1, A}, {"C", 4, A}}), make_trace("b", {{"A", 0, A}, {"B", 2, A}})}};
  EXPECT_EQ(median_activity_seconds(log), 2 * 3600);
  EXPECT_EQ(median_activity_seconds(EventLog{{make_trace("s", {{"A", 0, A}})}}), 0);
}

TEST(Kpi, EmptyInputRejected) { EXPECT_THROW(kpi_aggregate({}), Error); }

TEST(Kpi, IdenticalOrdersZeroEverywhere) {
  const auto t = make_trace("k", {{"C", 0, X}, {"A", 24, A}, {"B", 48, A}});
  const auto r = kpi_aggregate({replay_trace(t, c_first_policy(), kDay), replay_trace(t, c_first_policy(), kDay)});
  EXPECT_EQ(r.total_saved_resource_time_s, 0);
  EXPECT_EQ(r.total_saved_time_span_s, 0);
  EXPECT_EQ(r.resource_opt_pct, 0.0);
}

TEST(Kpi, ReportLayout) {
  const auto r = kpi_aggregate({replay_trace(abc_trace(), c_first_policy(), kDay)});
  const auto csv = kpi_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,saved_resource_time_days,resource_opt_pct,saved_time_span_days,span_opt_pct");
  EXPECT_NE(csv.find("FORLAPS,5,250,5,"), std::string::npos);
  const auto j = kpi_to_json(r);
  EXPECT_EQ(j["traces"][0]["saved_resource_time_s"], 5 * kDay);
}

EventLog labeled(std::vector<Trace> ts) {
  return label_outcomes(EventLog{std::move(ts)}, OutcomeRule::any_disapproved());
}

TEST(DistanceEval, EchoRecommenderScoresZero) {
  const auto log = labeled({abc_trace(), make_trace("ok", {{"A", 0, A}, {"B", 1, A}})});
  const NamedRecommender echo{"echo", [](const Trace& t) { return std::optional<Seq>(t.activities()); }};
  const auto r = distance_eval(log, {echo});
  ASSERT_EQ(r.methods.size(), 1u);
  EXPECT_EQ(r.methods[0].desired_mean, 0.0);
  EXPECT_EQ(r.methods[0].undesired_mean, 0.0);
}

TEST(DistanceEval, MeansPerOutcome) {
  const auto log = labeled({make_trace("d1", {{"A", 0, A}, {"B", 1, A}}), make_trace("d2", {{"A", 0, A}, {"B", 1, A}}),
                            make_trace("u", {{"A", 0, X}})});
  const std::map<std::string, Seq> rows{{"d1", {"A", "B", "C", "D"}}, {"d2", {"X", "Y", "Z", "W"}}};
  Warnings w;
  const auto r = distance_eval(log, {table_recommender(rows, "ext")}, "toy", &w);
  EXPECT_EQ(r.methods[0].desired_mean, 3.0);
  EXPECT_FALSE(r.methods[0].undesired_mean);
  EXPECT_EQ(r.methods[0].excluded, 1u);
  EXPECT_EQ(w.size(), 1u);
  EXPECT_EQ(distance_to_json(r)["methods"][0]["undesired_mean"], nullptr);
  EXPECT_EQ(distance_to_csv(r), "dataset,method,desired_mean,undesired_mean,n_desired,n_undesired,excluded\n"
                                "toy,ext,3,,2,0,1\n");
}

TEST(DistanceEval, UnlabeledLogRejected) {
  EXPECT_THROW(distance_eval(EventLog{{abc_trace()}}, {}), Error);
}

TEST(Recommendations, CsvParsing) {
  const auto rows = parse_recommendations_csv("case_id,position,activity\nk,2,B\nk,1,A\nz,1,C\n");
  EXPECT_EQ(rows.at("k"), (Seq{"A", "B"}));
  EXPECT_EQ(rows.at("z"), (Seq{"C"}));
  EXPECT_THROW(parse_recommendations_csv("case_id,activity\nk,A\n"), Error);
  EXPECT_THROW(parse_recommendations_csv("case_id,position,activity\nk,first,A\n"), Error);
}

// Hand-built ten-trace fixture; golden values come from tests/oracles/kpi_fixture.py.
class KpiFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    log = label_outcomes(parse_csv(read_file(test::data_path("kpi_fixture.csv")), LogSchema::canonical()),
                         OutcomeRule::any_disapproved());
    policy = std::make_unique<Policy>(load_qtable(test::data_path("kpi_policy.json")));
    golden = nlohmann::json::parse(read_file(test::data_path("kpi_golden.json")));
  }
  EventLog log;
  std::unique_ptr<Policy> policy;
  nlohmann::json golden;
};

TEST_F(KpiFixture, PrescribedOrdersMatch) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(prescribed_order(log[i], *policy).first, golden["traces"][i]["prescribed_order"].get<Seq>())
        << log[i].case_id;
  }
}

TEST_F(KpiFixture, DistancesMatch) {
  const auto ext = parse_recommendations_csv(read_file(test::data_path("kpi_recommender.csv")));
  const auto r = distance_eval(log, {policy_recommender(*policy), table_recommender(ext, "reversed")});
  ASSERT_EQ(r.methods.size(), 2u);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& g = golden["distance"][m];
    EXPECT_EQ(r.methods[m].method, g["method"]);
    EXPECT_DOUBLE_EQ(*r.methods[m].desired_mean, g["desired_mean"].get<double>());
    EXPECT_DOUBLE_EQ(*r.methods[m].undesired_mean, g["undesired_mean"].get<double>());
    EXPECT_EQ(r.methods[m].n_desired, g["n_desired"].get<std::size_t>());
    EXPECT_EQ(r.methods[m].excluded, g["excluded"].get<std::size_t>());
  }
}

}  // namespace
}  // namespace forlaps
