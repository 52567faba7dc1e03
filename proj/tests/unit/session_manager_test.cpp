#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace timetravel;
using namespace testing_support;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::internal;
}

/// a0 and a1 echo each other; the run records exactly 10 envelopes.
std::unique_ptr<Runtime> ping_pong() {
  auto rt = std::make_unique<Runtime>();
  rt->register_agent(std::make_shared<CountingAgent>("a0", std::set<std::string>{"task"}, 4));
  rt->register_agent(std::make_shared<CountingAgent>("a1", std::set<std::string>{"task"}, 5));
  rt->enqueue("a0", "a1", "task", make_payload("serve"));
  drain(*rt);
  return rt;
}

struct Scenario {
  TeamSpec team;
  std::unique_ptr<Runtime> rt;
  std::unique_ptr<SessionManager> sessions;
  std::string root;

  explicit Scenario(const std::string& name) : team(testing_support::team(name)), rt(make_runtime(team)) {
    sessions = std::make_unique<SessionManager>(*rt);
    enqueue_task(*rt, team);
    drain(*rt);
    root = rt->active_session();
  }
  EnvelopePtr at(Seq seq) const { return rt->lineage(root).at(static_cast<std::size_t>(seq)); }
  MessageEdit body_edit(Seq seq, const std::string& body) const {
    MessageEdit e;
    e.payload = at(seq)->payload;
    e.payload["body"] = body;
    return e;
  }
};

}  // namespace

TEST(Reset, AtSeqFiveOfTenMessages) {
  auto rt = ping_pong();
  SessionManager sessions(*rt);
  const std::string root = rt->active_session();
  const auto parent = rt->lineage(root);
  ASSERT_EQ(parent.size(), 10u);
  const std::string child = sessions.reset_at(root, 5);
  EXPECT_EQ(rt->active_session(), child);
  const auto lineage = rt->lineage(child);
  ASSERT_EQ(lineage.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(lineage[i], parent[i]);
  const auto q = rt->queue();
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0].sender, parent[5]->sender);
  EXPECT_EQ(q[0].recipient, parent[5]->recipient);
  EXPECT_EQ(q[0].payload, parent[5]->payload);
  EXPECT_EQ(q[0].provenance, parent[5]->provenance);
  // The team went back to its state before message 5.
  EXPECT_EQ(std::static_pointer_cast<CountingAgent>(rt->agent("a1"))->handled(), 3);
}

TEST(Reset, AtRootSeqZeroSharesNothing) {
  Scenario s("calc-team");
  const auto parent = s.rt->lineage(s.root);
  const std::string child = s.sessions->reset_at(s.root, 0);
  EXPECT_TRUE(s.rt->lineage(child).empty());
  EXPECT_EQ(s.sessions->info(child).fork_seq, 0);
  drain(*s.rt);
  EXPECT_EQ(routing(s.rt->lineage(child)), routing(parent));
  EXPECT_NE(s.rt->lineage(child)[0]->message_id, parent[0]->message_id);
}

TEST(Reset, UnknownSessionOrSeq) {
  Scenario s("calc-team");
  EXPECT_EQ(code_of([&] { s.sessions->reset_at("s999", 0); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { s.sessions->reset_at(s.root, 99); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { s.sessions->reset_at(s.root, -1); }), ErrorCode::not_found);
  EXPECT_EQ(s.sessions->list_sessions().size(), 1u);
}

TEST(Reset, StaleExpectedSessionIsConflict) {
  Scenario s("calc-team");
  const std::string child = s.sessions->reset_at(s.root, 1, s.root);
  EXPECT_EQ(code_of([&] { s.sessions->reset_at(s.root, 1, s.root); }), ErrorCode::conflict);
  EXPECT_NO_THROW(s.sessions->reset_at(s.root, 1, child));
}

TEST(Reset, RequiresPausedRuntime) {
  Scenario s("calc-team");
  s.rt->begin_run();
  EXPECT_EQ(code_of([&] { s.sessions->reset_at(s.root, 1); }), ErrorCode::not_paused);
  EXPECT_EQ(code_of([&] { s.sessions->set_active(s.root); }), ErrorCode::not_paused);
  s.rt->request_pause();
  s.rt->continue_run();
  EXPECT_EQ(s.rt->mode(), RunMode::paused);
}

TEST(Edit, SpecificInstructionAtSeqFive) {
  Scenario s("yankees-1977");
  const auto& e = s.team.edits.front();
  ASSERT_EQ(e.type, "add-specificity");
  ASSERT_EQ(s.at(5)->sender, "orchestrator");
  const std::string child = s.sessions->edit_and_reset(s.root, 5, s.body_edit(5, e.body));
  const auto q = s.rt->queue();
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0].provenance, Provenance::edited);
  s.rt->step();
  const auto lineage = s.rt->lineage(child);
  ASSERT_EQ(lineage.size(), 6u);
  EXPECT_EQ(lineage[5]->provenance, Provenance::edited);
  EXPECT_EQ(lineage[5]->body(), e.body);
  EXPECT_EQ(lineage[5]->recipient, s.at(5)->recipient);
  // Parent untouched.
  EXPECT_EQ(s.at(5)->provenance, Provenance::original);
}

TEST(Edit, EmptyBodyRejectedWithoutForking) {
  Scenario s("yankees-1977");
  EXPECT_EQ(code_of([&] { s.sessions->edit_and_reset(s.root, 5, s.body_edit(5, "")); }), ErrorCode::invalid_argument);
  MessageEdit no_body;
  no_body.payload = json{{"text", "x"}};
  EXPECT_EQ(code_of([&] { s.sessions->edit_and_reset(s.root, 5, no_body); }), ErrorCode::invalid_argument);
  EXPECT_EQ(s.sessions->list_sessions().size(), 1u);
  EXPECT_EQ(s.rt->active_session(), s.root);
}

TEST(Edit, RoutingFieldsAreLocked) {
  Scenario s("yankees-1977");
  for (int field = 0; field < 3; ++field) {
    MessageEdit e = s.body_edit(5, "anything");
    if (field == 0) e.recipient = "coder";
    if (field == 1) e.sender = "user";
    if (field == 2) e.kind = "report";
    EXPECT_EQ(code_of([&] { s.sessions->edit_and_reset(s.root, 5, e); }), ErrorCode::edit_locality);
  }
  MessageEdit same = s.body_edit(5, "anything");
  same.recipient = s.at(5)->recipient;
  EXPECT_NO_THROW(s.sessions->edit_and_reset(s.root, 5, same));
}

TEST(Edit, CodeBasedPlanTakesCoderPath) {
  Scenario s("yankees-1977");
  auto to = [](const std::vector<EnvelopePtr>& l, const std::string& who) {
    return std::count_if(l.begin(), l.end(), [&](const EnvelopePtr& e) { return e->recipient == who; });
  };
  const auto parent = s.rt->lineage(s.root);
  ASSERT_EQ(to(parent, "coder"), 0);
  ASSERT_GT(to(parent, "web_surfer"), 0);
  const std::string child =
      s.sessions->edit_and_reset(s.root, 0, s.body_edit(0, s.at(0)->body() + " Please use a code-based approach."));
  drain(*s.rt);
  const auto lineage = s.rt->lineage(child);
  EXPECT_GT(to(lineage, "coder"), 0);
  EXPECT_EQ(to(lineage, "web_surfer"), 0);
}

TEST(Sessions, TwoResetsListThreeRootFirst) {
  Scenario s("calc-team");
  const std::string a = s.sessions->reset_at(s.root, 1);
  const std::string b = s.sessions->reset_at(s.root, 2);
  const auto list = s.sessions->list_sessions();
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[0].id, s.root);
  EXPECT_FALSE(list[0].parent_id);
  EXPECT_EQ(list[1].id, a);
  EXPECT_EQ(list[2].id, b);
  EXPECT_TRUE(list[2].active);
}

TEST(Sessions, SteppingParentLeavesChildren) {
  Scenario s("calc-team");
  const std::string child = s.sessions->reset_at(s.root, 1);
  drain(*s.rt);
  const auto child_before = s.rt->lineage(child);
  s.sessions->set_active(s.root);
  s.rt->enqueue("user", "orchestrator", "task", make_payload("3*3"));
  drain(*s.rt);
  EXPECT_GT(s.rt->lineage(s.root).size(), 4u);
  EXPECT_EQ(s.rt->lineage(child), child_before);
}

TEST(Sessions, ParentLinksReconstructRecordedResets) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Scenario s("calc-team");
    std::map<std::string, std::pair<std::string, Seq>> recorded;
    for (int i = 0; i < 6; ++i) {
      const auto list = s.sessions->list_sessions();
      const auto& from = list[rng() % list.size()];
      const auto len = s.rt->lineage(from.id).size();
      if (len == 0) continue;
      const Seq seq = static_cast<Seq>(rng() % len);
      recorded[s.sessions->reset_at(from.id, seq)] = {from.id, seq};
      if (rng() % 2) drain(*s.rt);
    }
    for (const auto& info : s.sessions->list_sessions()) {
      if (info.id == s.root) continue;
      ASSERT_TRUE(recorded.count(info.id));
      EXPECT_EQ(info.parent_id, recorded[info.id].first);
      EXPECT_EQ(info.fork_seq, recorded[info.id].second);
    }
  }
}

TEST(Sessions, RemoveRules) {
  Scenario s("calc-team");
  const std::string a = s.sessions->reset_at(s.root, 1);
  const std::string b = s.sessions->reset_at(a, 0);
  EXPECT_EQ(code_of([&] { s.sessions->remove(b); }), ErrorCode::conflict);  // active
  s.sessions->set_active(s.root);
  EXPECT_EQ(code_of([&] { s.sessions->remove(a); }), ErrorCode::conflict);  // has a fork
  EXPECT_EQ(code_of([&] { s.sessions->remove("s999"); }), ErrorCode::not_found);
  s.sessions->remove(b);
  s.sessions->remove(a);
  EXPECT_EQ(s.sessions->list_sessions().size(), 1u);
}

TEST(Verdict, TableAnswers) {
  EXPECT_EQ(judge("519", "519").status, Verdict::Status::pass);
  EXPECT_EQ(judge("Braintree, Honolulu", "Honolulu, Braintree").status, Verdict::Status::fail);
  EXPECT_EQ(judge("Braintree, Honolulu", " braintree,   HONOLULU ").status, Verdict::Status::pass);
  EXPECT_EQ(judge("519", std::nullopt).status, Verdict::Status::unknown);
  EXPECT_EQ(judge(std::nullopt, "519").status, Verdict::Status::unknown);
}

TEST(Verdict, NormalizeAnswer) {
  EXPECT_EQ(normalize_answer("  Braintree,\tHonolulu \n"), "braintree, honolulu");
  EXPECT_EQ(normalize_answer("519"), "519");
  EXPECT_EQ(normalize_answer(""), "");
}

TEST(Verdict, EvaluateFixtureRuns) {
  Scenario sorted("yankees-1977-sorted-table");
  Verdict v = sorted.sessions->evaluate(sorted.root, *sorted.team.task);
  EXPECT_EQ(v.status, Verdict::Status::pass);
  EXPECT_EQ(v.actual, "519");
  Scenario pres("presidents-cities");
  v = pres.sessions->evaluate(pres.root, *pres.team.task);
  EXPECT_EQ(v.status, Verdict::Status::fail);
  EXPECT_EQ(v.actual, "Honolulu, Braintree");
  EXPECT_EQ(pres.sessions->info(pres.root).verdict, v);
}

TEST(Verdict, NoFinalAnswerIsUnknown) {
  auto rt = ping_pong();
  SessionManager sessions(*rt);
  EXPECT_EQ(sessions.evaluate(rt->active_session(), TaskFixture{"q", "4"}).status, Verdict::Status::unknown);
}

TEST(History, FreshSessionFlagsOwn) {
  const TeamSpec t = team("calc-team");
  auto rt = make_runtime(t);
  enqueue_task(*rt, t);
  for (int i = 0; i < 4; ++i) rt->step();
  std::size_t envelopes = 0;
  for (const auto& item : rt->history(rt->active_session())) {
    EXPECT_FALSE(item.inherited);
    if (item.envelope()) ++envelopes;
  }
  EXPECT_EQ(envelopes, 4u);
}

TEST(History, ForkAtFiveFlagsPrefixInherited) {
  auto rt = ping_pong();
  SessionManager sessions(*rt);
  const std::string child = sessions.reset_at(rt->active_session(), 5);
  drain(*rt);
  std::size_t inherited = 0;
  for (const auto& item : rt->history(child)) {
    EXPECT_EQ(item.inherited, item.seq() < 5) << item.seq();
    if (item.inherited && item.envelope()) ++inherited;
  }
  EXPECT_EQ(inherited, 5u);
}

TEST(History, OrderFollowsSeqUnderRandomInterleavings) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Runtime rt;
    rt.register_agent(std::make_shared<CountingAgent>("a", std::set<std::string>{"task"}, 3));
    rt.register_agent(std::make_shared<CountingAgent>("b", std::set<std::string>{"task"}, 3));
    for (int op = 0; op < 30; ++op) {
      if (rng() % 3 == 0) rt.enqueue(rng() % 2 ? "a" : "user", rng() % 2 ? "b" : "BROADCAST", "task", make_payload("p"));
      else rt.step();
    }
    Seq last = -1;
    for (const auto& item : rt.history(rt.active_session())) {
      EXPECT_GE(item.seq(), last);
      if (item.envelope()) {
        EXPECT_EQ(item.seq(), last + 1);
        last = item.seq();
      }
    }
  }
}
