#include <gtest/gtest.h>

#include "forlaps/config.hpp"
#include "forlaps/finetune.hpp"
#include "support.hpp"

namespace forlaps {
namespace {

EventLog fixture_train() {
  const auto cfg = load_config(test::data_path("forlaps_config.json"));
  const auto log = load_labeled_log(cfg);
  return split_train_test(log, cfg.train_fraction, cfg.split_seed).train;
}

PipelineConfig fixture_pipeline() { return load_config(test::data_path("forlaps_config.json")).pipeline; }

TEST(Pipeline, TwoPhasesWithFinetuneAtLeastOffline) {
  const auto r = run_forlaps(fixture_train(), fixture_pipeline());
  ASSERT_EQ(r.report.phases.size(), 2u);
  EXPECT_EQ(r.report.phases[0].name, "offline");
  EXPECT_EQ(r.report.phases[1].name, "finetune");
  EXPECT_EQ(r.report.phases[1].updates, 20'000u);
  EXPECT_GE(r.report.phases[1].final_moving_avg(), r.report.phases[0].final_moving_avg());
  ASSERT_TRUE(r.offline_snapshot);
  EXPECT_EQ(r.table.steps(), r.report.total_updates());
  EXPECT_EQ(r.augmented.traces.size(), r.augmented.provenance.size());
  ASSERT_TRUE(r.report.improvement());
  EXPECT_GT(*r.report.improvement(), 0.0);
}

TEST(Pipeline, OfflineOnlyHasNoFinetunePhase) {
  auto cfg = fixture_pipeline();
  cfg.offline_only = true;
  const auto r = run_forlaps(fixture_train(), cfg);
  ASSERT_EQ(r.report.phases.size(), 1u);
  EXPECT_EQ(r.report.phase("finetune"), nullptr);
  EXPECT_FALSE(r.report.improvement());
}

TEST(Pipeline, OfflinePassesShareOneSeries) {
  auto cfg = fixture_pipeline();
  cfg.offline_only = true;
  cfg.offline_passes = 3;
  const auto log = fixture_train();
  const auto r = run_forlaps(log, cfg);
  const auto& s = r.report.phases[0].stats.samples;
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i - 1].step, s[i].step);
  EXPECT_EQ(s.back().step, r.report.phases[0].updates);
}

TEST(Pipeline, SameConfigSameNumbers) {
  const auto log = fixture_train();
  const auto a = run_forlaps(log, fixture_pipeline());
  const auto b = run_forlaps(log, fixture_pipeline());
  EXPECT_EQ(a.table, b.table);
  EXPECT_EQ(run_report_to_json(a.report), run_report_to_json(b.report));
  EXPECT_EQ(a.report.phases[1].stats, b.report.phases[1].stats);
}

TEST(Isolated, StartsFromZeroAndTrailsForlaps) {
  const auto log = fixture_train();
  const auto iso = run_isolated(log, fixture_pipeline());
  ASSERT_EQ(iso.report.phases.size(), 1u);
  EXPECT_EQ(iso.report.phases[0].stats.samples.front().step, 0u);
  EXPECT_EQ(iso.report.phases[0].stats.samples.front().mean_q, 0.0);
  const auto fl = run_forlaps(log, fixture_pipeline());
  EXPECT_LT(iso.report.final_moving_avg(), fl.report.final_moving_avg());
  EXPECT_LT(iso.report.phases[0].final_mean_q(), fl.report.phases[1].final_mean_q());
}

TEST(Isolated, SeedChangesTrajectoryWithinBounds) {
  const auto log = fixture_train();
  auto cfg = fixture_pipeline();
  const auto a = run_isolated(log, cfg);
  cfg.augment.seed += 1;
  const auto b = run_isolated(log, cfg);
  EXPECT_NE(a.report.phases[0].stats, b.report.phases[0].stats);
  // Per-step reward is at most 1, so no Q value can exceed 1 / (1 - gamma).
  const double bound = 1.0 / (1.0 - cfg.hyperparams.gamma);
  for (const auto& s : b.report.phases[0].stats.samples) EXPECT_LE(std::abs(s.mean_q), bound * 10);
  for (const auto& [state, actions] : b.table.entries()) {
    for (const auto& [act, q] : actions) EXPECT_LE(q, bound);
  }
}

TEST(Compare, IdenticalReportsHaveZeroDelta) {
  const auto r = run_forlaps(fixture_train(), fixture_pipeline()).report;
  const auto c = compare_runs({r, r});
  for (const auto& d : c.delta[1]) {
    if (d) EXPECT_EQ(*d, 0.0);
  }
  EXPECT_EQ(c.improvement[1], 0.0);
}

TEST(Compare, ForlapsImprovesOnOffline) {
  const auto log = fixture_train();
  auto off = fixture_pipeline();
  off.offline_only = true;
  const auto c = compare_runs({run_forlaps(log, off).report, run_forlaps(log, fixture_pipeline()).report});
  ASSERT_TRUE(c.improvement[1]);
  EXPECT_GT(*c.improvement[1], 0.0);
  EXPECT_EQ(c.labels, (std::vector<std::string>{"offline", "forlaps"}));
  const auto csv = comparison_series_csv(c);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,offline,forlaps,delta_forlaps");
  // The offline run ends early; its later cells stay empty.
  EXPECT_NE(csv.find(",,"), std::string::npos);
  EXPECT_NE(comparison_finals_csv(c).find("forlaps,"), std::string::npos);
}

TEST(Compare, NeedsTwoReports) {
  EXPECT_THROW(compare_runs({RunReport{}}), Error);
}

TEST(Compare, MismatchedIntervalsWarn) {
  RunReport a;
  a.label = "a";
  a.phases.push_back(PhaseReport{"offline", TrainStats{10, 5, {{0, 0, 0, 0}, {10, 1, 0.5, 0}, {20, 2, 1, 0}}}, 20, 0});
  RunReport b;
  b.label = "b";
  b.phases.push_back(PhaseReport{"offline", TrainStats{20, 5, {{0, 0, 0, 0}, {20, 4, 2, 0}}}, 20, 0});
  Warnings w;
  const auto c = compare_runs({a, b}, &w);
  EXPECT_EQ(c.interval, 20u);
  EXPECT_EQ(c.steps, (std::vector<std::uint64_t>{0, 20}));
  EXPECT_EQ(c.series[0][1], 1.0);
  EXPECT_EQ(c.delta[1][1], 1.0);
  EXPECT_EQ(w.size(), 1u);
}

TEST(Pipeline, EmptyLogAndBadConfig) {
  EXPECT_THROW(run_forlaps(EventLog{}, fixture_pipeline()), Error);
  auto cfg = fixture_pipeline();
  cfg.offline_passes = 0;
  EXPECT_THROW(run_forlaps(fixture_train(), cfg), Error);
}

TEST(Pipeline, PhaseErrorsNameThePhase) {
  auto cfg = fixture_pipeline();
  cfg.reward.mode = RewardMode::TraceOutcome;
  auto log = fixture_train();
  std::vector<Trace> traces = log.traces();
  traces[0].outcome.reset();
  try {
    run_forlaps(EventLog{traces}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("[offline]", 0), 0u) << e.what();
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

}  // namespace
}  // namespace forlaps
