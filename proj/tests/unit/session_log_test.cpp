#include <gtest/gtest.h>

#include "rewind/session_log.hpp"
#include "test_support.hpp"

using namespace timetravel;
using namespace testing_support;

namespace {

struct FixtureRun {
  TeamSpec t;
  std::unique_ptr<Runtime> rt;
  std::unique_ptr<SessionManager> sessions;

  explicit FixtureRun(TeamSpec spec) : t(std::move(spec)), rt(make_runtime(t)) {
    sessions = std::make_unique<SessionManager>(*rt);
    enqueue_task(*rt, t);
    drain(*rt);
  }
  SessionLog log() const { return capture_session(*rt, rt->active_session(), t.name, t.file); }
};

/// calc-team whose orchestrator says "evaluate" instead of "compute".
TeamSpec mutated_calc_team(const TempDir& dir) {
  std::ifstream in(fixture("scripts/calc_orchestrator.json"));
  json script = json::parse(in);
  script["rules"][0]["then"]["emit"][0]["body"] = "evaluate {body}";
  const auto script_path = dir.write("calc_orchestrator.json", script.dump(2));
  json doc = absolutized_team("calc-team");
  doc["agents"][0]["script"] = script_path.string();
  const auto team_path = dir.write("calc-team.json", doc.dump(2));
  return load_team_file(team_path);
}

}  // namespace

TEST(SessionLog, JsonRoundTrip) {
  FixtureRun r(team("yankees-1977"));
  const SessionLog log = r.log();
  EXPECT_EQ(log.envelopes.size(), r.rt->lineage(r.rt->active_session()).size());
  const json j = to_json(log);
  EXPECT_EQ(j["format"], "rewind.session-log");
  const SessionLog back = session_log_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.verdict.status, Verdict::Status::fail);
}

TEST(SessionLog, FileRoundTripAndErrors) {
  TempDir dir;
  FixtureRun r(team("calc-team"));
  const auto path = dir.path / "log.json";
  write_session_log(r.log(), path);
  EXPECT_EQ(to_json(read_session_log(path)), to_json(r.log()));

  json j = to_json(r.log());
  j["schema_version"] = 99;
  try {
    session_log_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::version_mismatch);
  }
  j = to_json(r.log());
  j["format"] = "something-else";
  EXPECT_THROW(session_log_from_json(j), Error);

  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto truncated = dir.write("truncated.json", text.substr(0, text.size() / 2));
  try {
    read_session_log(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
  }
  EXPECT_THROW(read_session_log(dir.path / "missing.json"), Error);
}

TEST(SessionLog, NormalizedIgnoresIdsAndTimes) {
  FixtureRun a(team("calc-team")), b(team("calc-team"));
  EXPECT_EQ(normalized(a.log()), normalized(b.log()));
  SessionLog changed = b.log();
  changed.envelopes.back().payload["body"] = "5";
  EXPECT_NE(normalized(a.log()), normalized(changed));
  const json n = normalized(a.log());
  EXPECT_FALSE(n["envelopes"][0].contains("message_id"));
  EXPECT_FALSE(n["envelopes"][0].contains("timestamp"));
}

TEST(SessionLog, CapturesForkChainAndInheritance) {
  FixtureRun r(team("yankees-1977"));
  const std::string root = r.rt->active_session();
  const auto& e = r.t.edits.front();
  MessageEdit edit;
  edit.payload = r.rt->lineage(root)[static_cast<std::size_t>(e.seq)]->payload;
  edit.payload["body"] = e.body;
  r.sessions->edit_and_reset(root, e.seq, edit);
  drain(*r.rt);
  const SessionLog log = r.log();
  ASSERT_EQ(log.forks.size(), 1u);
  EXPECT_EQ(log.forks[0].fork_seq, e.seq);
  ASSERT_TRUE(log.forks[0].edited_payload);
  EXPECT_EQ((*log.forks[0].edited_payload)["body"], e.body);
  EXPECT_EQ(log.parent_id, root);
  for (std::size_t i = 0; i < log.inherited.size(); ++i) EXPECT_EQ(log.inherited[i], i < static_cast<std::size_t>(e.seq));
  EXPECT_EQ(log.verdict.status, Verdict::Status::pass);
}

TEST(Replay, DefaultRunsAreIdentical) {
  for (const auto& name : shipped_teams()) {
    FixtureRun r(team(name));
    const SessionLog log = r.log();
    const SessionLog again = replay_session(log, r.t);
    const HistoryDiff d = diff_histories(log.envelopes, again.envelopes);
    EXPECT_TRUE(d.identical) << name << ": " << (d.lines.empty() ? "" : d.lines.front());
  }
}

TEST(Replay, ForkedAndEditedSessionsReplay) {
  FixtureRun r(team("presidents-cities"));
  const std::string root = r.rt->active_session();
  const std::string mid = r.sessions->reset_at(root, 2);
  drain(*r.rt);
  const auto& e = r.t.edits.front();
  MessageEdit edit;
  edit.payload = r.rt->lineage(mid)[static_cast<std::size_t>(e.seq)]->payload;
  edit.payload["body"] = e.body;
  r.sessions->edit_and_reset(mid, e.seq, edit);
  drain(*r.rt);
  const SessionLog log = r.log();
  ASSERT_EQ(log.forks.size(), 2u);
  const SessionLog again = replay_session(log, r.t);
  EXPECT_TRUE(diff_histories(log.envelopes, again.envelopes).identical);
  EXPECT_EQ(normalized(again)["envelopes"], normalized(log)["envelopes"]);
}

TEST(Replay, MutatedRuleLocalizesFirstDivergence) {
  TempDir dir;
  FixtureRun r(team("calc-team"));
  const SessionLog log = r.log();
  // The oracle: the delegation is the first envelope the changed rule writes.
  std::optional<Seq> delegation;
  for (const auto& e : log.envelopes)
    if (!delegation && e.sender == "orchestrator" && e.body().rfind("compute ", 0) == 0) delegation = e.seq;
  ASSERT_TRUE(delegation);
  const SessionLog again = replay_session(log, mutated_calc_team(dir));
  const HistoryDiff d = diff_histories(log.envelopes, again.envelopes);
  EXPECT_FALSE(d.identical);
  EXPECT_EQ(d.first_divergence, delegation);
  ASSERT_FALSE(d.lines.empty());
  EXPECT_EQ(d.lines.front().rfind("seq " + std::to_string(*delegation), 0), 0u);
}

TEST(Diff, MissingAndExtra) {
  FixtureRun r(team("calc-team"));
  auto full = r.log().envelopes;
  auto shorter = full;
  shorter.pop_back();
  HistoryDiff d = diff_histories(full, shorter);
  EXPECT_EQ(d.first_divergence, static_cast<Seq>(full.size() - 1));
  EXPECT_NE(d.lines[0].find("missing"), std::string::npos);
  d = diff_histories(shorter, full);
  EXPECT_NE(d.lines[0].find("extra"), std::string::npos);
  EXPECT_TRUE(diff_histories(full, full).identical);
}
