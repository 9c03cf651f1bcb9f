#include <gtest/gtest.h>

#include "forlaps/csv.hpp"
#include "forlaps/eventlog.hpp"
#include "support.hpp"

namespace forlaps {
namespace {

using test::A;
using test::make_trace;
using test::X;

const LogSchema kCanon = LogSchema::canonical();

TEST(Csv, QuotedFieldsAndCrlf) {
  const auto recs = csv::parse("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\r\n\r\nlast,\n");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[1].fields[0], "x,1");
  EXPECT_EQ(recs[1].fields[1], "he said \"hi\"");
  EXPECT_EQ(recs[2].line, 4u);
  EXPECT_EQ(recs[2].fields[1], "");
}

TEST(Csv, QuotedFieldAtLineEndDoesNotLeak) {
  const auto recs = csv::parse("a,\"b\"\nc,d\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].fields, (std::vector<std::string>{"c", "d"}));
}

TEST(Csv, UnterminatedQuoteIsRowError) {
  try {
    csv::parse("a,b\n\"open,2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Row);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Csv, WriterQuotesOnlyWhenNeeded) {
  std::string out;
  csv::append_row(out, {"plain", "with,comma", "quote\"d", "multi\nline"});
  EXPECT_EQ(out, "plain,\"with,comma\",\"quote\"\"d\",\"multi\nline\"\n");
}

TEST(Timestamp, Iso8601Variants) {
  const auto base = parse_iso8601("2021-03-01T12:00:00Z");
  ASSERT_TRUE(base);
  EXPECT_EQ(parse_iso8601("2021-03-01 12:00:00"), base);
  EXPECT_EQ(parse_iso8601("2021-03-01T14:00:00+02:00"), base);
  EXPECT_EQ(parse_iso8601("2021-03-01T07:00-0500"), base);
  EXPECT_EQ(*parse_iso8601("2021-03-01T12:00:00.250Z") - *base, Millis{250});
  EXPECT_EQ(*base - *parse_iso8601("2021-03-01"), std::chrono::hours(12));
  EXPECT_FALSE(parse_iso8601("2021-02-30T00:00:00"));
  EXPECT_FALSE(parse_iso8601("yesterday"));
  EXPECT_EQ(format_timestamp(*base), "2021-03-01T12:00:00.000Z");
}

TEST(Timestamp, CustomFormat) {
  const auto t = parse_timestamp("01/03/2021 12:00", "%d/%m/%Y %H:%M");
  ASSERT_TRUE(t);
  EXPECT_EQ(t, parse_iso8601("2021-03-01T12:00:00Z"));
}

TEST(ParseCsv, CountsTracesAndEvents) {
  const auto log = parse_csv(
      "case_id,activity,timestamp\n"
      "c1,A,2021-01-01T00:00:00Z\n"
      "c2,B,2021-01-01T01:00:00Z\n"
      "c1,C,2021-01-01T02:00:00Z\n",
      LogSchema{});
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log.event_count(), 3u);
  EXPECT_EQ(log[0].case_id, "c1");
  EXPECT_EQ(log[0].activities(), (std::vector<std::string>{"A", "C"}));
  EXPECT_FALSE(log.has_task_status());
}

TEST(ParseCsv, SortsEventsWithinTrace) {
  const auto log = parse_csv(
      "case_id,activity,timestamp\n"
      "c1,late,2021-01-03T00:00:00Z\n"
      "c1,early,2021-01-01T00:00:00Z\n"
      "c1,mid,2021-01-02T00:00:00Z\n",
      LogSchema{});
  EXPECT_EQ(log[0].activities(), (std::vector<std::string>{"early", "mid", "late"}));
}

TEST(ParseCsv, EqualTimestampsKeepFileOrder) {
  const auto log = parse_csv(
      "case_id,activity,timestamp\n"
      "c1,second,2021-01-01T00:00:00Z\n"
      "c1,first,2021-01-01T00:00:00Z\n",
      LogSchema{});
  EXPECT_EQ(log[0].activities(), (std::vector<std::string>{"second", "first"}));
}

TEST(ParseCsv, MissingActivityColumnIsSchemaError) {
  try {
    parse_csv("case_id,timestamp\nc1,2021-01-01\n", LogSchema{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Schema);
    EXPECT_NE(std::string(e.what()).find("activity"), std::string::npos);
  }
}

TEST(ParseCsv, RowErrorsCarryLineNumbers) {
  auto kind_and_msg = [](const std::string& text) {
    try {
      parse_csv(text, LogSchema::canonical());
    } catch (const Error& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(ErrorKind::Io, std::string("no error"));
  };
  const std::string header = "case_id,activity,timestamp,status\n";
  auto [k1, m1] = kind_and_msg(header + "c1,A,2021-01-01,Approved\nc1,B,not-a-date,Approved\n");
  EXPECT_EQ(k1, ErrorKind::Row);
  EXPECT_NE(m1.find("line 3"), std::string::npos);
  auto [k2, m2] = kind_and_msg(header + "c1,A,2021-01-01\n");
  EXPECT_EQ(k2, ErrorKind::Row);
  auto [k3, m3] = kind_and_msg(header + ",A,2021-01-01,Approved\n");
  EXPECT_NE(m3.find("empty case id"), std::string::npos);
  auto [k4, m4] = kind_and_msg(header + "c1,A,2021-01-01,Maybe\n");
  EXPECT_NE(m4.find("Maybe"), std::string::npos);
}

TEST(ParseCsv, EmptyInputs) {
  for (const char* text : {"", "case_id,activity,timestamp\n"}) {
    try {
      parse_csv(text, LogSchema{});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyLog);
    }
  }
}

TEST(ParseCsv, CustomColumnsDelimiterAndExtras) {
  LogSchema s;
  s.case_column = "Case";
  s.activity_column = "Task";
  s.timestamp_column = "When";
  s.status_column = "Result";
  s.delimiter = ';';
  const auto log = parse_csv("Case;Task;When;Result;org\nk;FR;2021-05-01;rejected;north\nk;CNR;2021-05-02;ok;\n", s);
  ASSERT_EQ(log[0].size(), 2u);
  EXPECT_EQ(log[0].events[0].status, TaskStatus::Disapproved);
  EXPECT_EQ(log[0].events[1].status, TaskStatus::Approved);
  EXPECT_EQ(log[0].events[0].extra.at("org"), "north");
  EXPECT_TRUE(log[0].events[1].extra.empty());
}

TEST(ParseCsv, CanonicalRoundTripKeepsAttributes) {
  const auto log = parse_csv(
      "case_id,activity,timestamp,status,cost,note\n"
      "c1,A,2021-01-01T00:00:00.125Z,Approved,3,\"a, b\"\n"
      "c1,B,2021-01-01T05:00:00Z,Disapproved,,\n"
      "c2,A,2021-01-02T00:00:00Z,,1,x\n",
      kCanon);
  const auto again = parse_csv(to_csv(log), kCanon);
  EXPECT_EQ(log, again);
  EXPECT_EQ(to_csv(again), to_csv(log));
}

TEST(Outcome, ReturnWithinWindowIsUndesired) {
  const auto rule = OutcomeRule::contains_within("Return ER", {"Release A", "Release B"}, std::chrono::days(28));
  const auto late = make_trace("s1", {{"ER Registration", 0, A}, {"Release A", 10, A}, {"Return ER", 10 + 24 * 27, A}});
  const auto far = make_trace("s2", {{"ER Registration", 0, A}, {"Release A", 10, A}, {"Return ER", 10 + 24 * 40, A}});
  EXPECT_EQ(label_trace(late, rule).categorical, Outcome::Undesired);
  EXPECT_EQ(label_trace(far, rule).categorical, Outcome::Desired);
}

TEST(Outcome, NoFailureIsDesiredWithZeroWaste) {
  const auto t = test::simple_trace("t", {"A", "B", "C"});
  const auto l = label_trace(t, OutcomeRule::any_disapproved());
  EXPECT_EQ(l.categorical, Outcome::Desired);
  EXPECT_EQ(l.wasted_activities, 0);
  EXPECT_EQ(l.wasted_time, Millis{0});
}

TEST(Outcome, WastedCountsActivitiesAfterTrigger) {
  const auto t = test::simple_trace("t", {"A", "B", "C", "D", "E"}, {"C"});
  const auto l = label_trace(t, OutcomeRule::any_disapproved());
  EXPECT_EQ(l.categorical, Outcome::Undesired);
  EXPECT_EQ(l.wasted_activities, 2);
  EXPECT_EQ(l.wasted_time, std::chrono::hours(2));
}

TEST(Outcome, DurationRuleReportsExcess) {
  const auto t = make_trace("t", {{"A", 0, A}, {"B", 30, A}, {"C", 50, A}});
  const auto l = label_trace(t, OutcomeRule::duration_exceeds(std::chrono::hours(40)));
  EXPECT_EQ(l.categorical, Outcome::Undesired);
  EXPECT_EQ(l.wasted_activities, 0);
  EXPECT_EQ(l.wasted_time, std::chrono::hours(10));
  EXPECT_EQ(label_trace(t, OutcomeRule::duration_exceeds(std::chrono::hours(50))).categorical, Outcome::Desired);
}

TEST(Outcome, Combinators) {
  auto t = test::simple_trace("t", {"A", "B", "C", "D"}, {"D"});
  t.events[1].extra["flag"] = "y";
  const auto attr = OutcomeRule::attribute_equals("flag", "y");
  const auto any = OutcomeRule::any_of({OutcomeRule::any_disapproved(), attr});
  EXPECT_EQ(label_trace(t, any).wasted_activities, 2);
  const auto all = OutcomeRule::all_of({OutcomeRule::any_disapproved(), attr});
  EXPECT_EQ(label_trace(t, all).wasted_activities, 0);
  const auto neg = OutcomeRule::negate(OutcomeRule::contains("Z"));
  const auto l = label_trace(t, neg);
  EXPECT_EQ(l.categorical, Outcome::Undesired);
  EXPECT_EQ(l.wasted_activities, 4);
  EXPECT_EQ(l.wasted_time, t.duration());
  EXPECT_EQ(label_trace(t, OutcomeRule::never()).categorical, Outcome::Desired);
}

TEST(Outcome, ValidationRejectsUnknownNames) {
  const EventLog log{{test::simple_trace("t", {"A", "B"})}};
  EXPECT_THROW(label_outcomes(log, OutcomeRule::contains("Nope")), Error);
  EXPECT_THROW(label_outcomes(log, OutcomeRule::attribute_equals("missing", "1")), Error);
  OutcomeRule bad;
  bad.kind = OutcomeRule::Kind::Not;
  EXPECT_THROW(label_outcomes(log, bad), Error);
  EXPECT_TRUE(label_outcomes(log, OutcomeRule::contains("A")).labeled());
}

EventLog numbered_log(std::size_t n) {
  std::vector<Trace> ts;
  for (std::size_t i = 0; i < n; ++i) ts.push_back(test::simple_trace("c" + std::to_string(i), {"A", "B"}));
  return EventLog{std::move(ts)};
}

TEST(Split, EightyTwenty) {
  const auto s = split_train_test(numbered_log(10), 0.8, 3);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
}

TEST(Split, SameSeedSameSplitAndOrderPreserved) {
  const auto log = numbered_log(25);
  const auto a = split_train_test(log, 0.8, 11);
  const auto b = split_train_test(log, 0.8, 11);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  for (std::size_t i = 1; i < a.train.size(); ++i) {
    EXPECT_LT(std::stoi(a.train[i - 1].case_id.substr(1)), std::stoi(a.train[i].case_id.substr(1)));
  }
  const auto c = split_train_test(log, 0.8, 12);
  EXPECT_NE(a.test, c.test);
}

TEST(Split, SingleTraceWarns) {
  Warnings w;
  const auto s = split_train_test(numbered_log(1), 0.8, 0, &w);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.test.size(), 0u);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w.messages()[0].find("test split is empty"), std::string::npos);
}

TEST(Split, RejectsDegenerateFractions) {
  EXPECT_THROW(split_train_test(numbered_log(3), 1.0, 0), Error);
  EXPECT_THROW(split_train_test(numbered_log(3), 0.0, 0), Error);
}

TEST(Status, Synonyms) {
  EXPECT_EQ(parse_status("APPROVED"), TaskStatus::Approved);
  EXPECT_EQ(parse_status("Rejected"), TaskStatus::Disapproved);
  EXPECT_EQ(parse_status(""), TaskStatus::Neutral);
  EXPECT_FALSE(parse_status("perhaps"));
}

}  // namespace
}  // namespace forlaps
