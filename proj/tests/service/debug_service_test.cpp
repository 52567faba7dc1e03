#include <gtest/gtest.h>

#include "api_client.hpp"
#include "properties.hpp"
#include "rewind/service/debug_service.hpp"
#include "test_support.hpp"

using namespace timetravel;
using namespace timetravel::service;
using namespace testing_support;

namespace {

const std::string v1 = "/api/v1";

struct Served {
  TeamSpec team;
  std::unique_ptr<DebugService> svc;
  int port = 0;
  std::unique_ptr<ApiClient> api;

  explicit Served(const std::string& name, const std::function<void(DebugService&)>& before_start = {})
      : team(testing_support::team(name)) {
    ServiceOptions o;
    o.port = 0;
    svc = std::make_unique<DebugService>(team, o);
    if (before_start) before_start(*svc);
    port = svc->start_background();
    api = std::make_unique<ApiClient>("127.0.0.1", port);
  }
  ~Served() { svc->stop(); }

  Reply send_task() {
    return api->post(v1 + "/messages",
                     {{"recipient", team.task->recipient}, {"kind", team.task->kind}, {"body", team.task->question}});
  }
  void step_until_empty() {
    for (int i = 0; i < 500 && api->post(v1 + "/control/step").status == 200; ++i) {
    }
  }
  void wait_paused() {
    for (int i = 0; i < 500 && api->get(v1 + "/control").body["mode"] != "paused"; ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
};

}  // namespace

TEST(HttpStatus, ErrorClasses) {
  EXPECT_EQ(http_status_for(ErrorCode::not_found), 404);
  for (auto c : {ErrorCode::conflict, ErrorCode::not_paused, ErrorCode::empty_queue, ErrorCode::duplicate,
                 ErrorCode::roster_mismatch, ErrorCode::faulted})
    EXPECT_EQ(http_status_for(c), 409) << to_string(c);
  for (auto c : {ErrorCode::checkpoint_failure, ErrorCode::internal}) EXPECT_EQ(http_status_for(c), 500);
  for (auto c : {ErrorCode::invalid_argument, ErrorCode::unknown_recipient, ErrorCode::schema_violation,
                 ErrorCode::edit_locality, ErrorCode::parse_error, ErrorCode::version_mismatch})
    EXPECT_EQ(http_status_for(c), 400) << to_string(c);
}

TEST(Service, ContractOverYankeesFixture) {
  auto r = check_api_contract("yankees-1977");
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Service, ContractOverPresidentsFixture) {
  auto r = check_api_contract("presidents-cities");
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Service, CalcTeamListsThreeAgents) {
  Served s("calc-team");
  auto r = s.api->get(v1 + "/agents");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["agents"].size(), 3u);
}

TEST(Service, StartsPausedWithEmptyQueue) {
  Served s("calc-team");
  auto c = s.api->get(v1 + "/control").body;
  EXPECT_EQ(c["mode"], "paused");
  EXPECT_EQ(c["queue_length"], 0);
}

TEST(Service, ShippedScenariosCarryExpectedAnswers) {
  for (auto [name, expected] : {std::pair{"yankees-1977", "519"}, std::pair{"presidents-cities", "Braintree, Honolulu"}}) {
    Served s(name);
    auto r = s.api->post(v1 + "/sessions/s0/evaluate");
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body["verdict"]["expected"], expected);
    EXPECT_EQ(r.body["verdict"]["status"], "unknown");
  }
}

TEST(Service, EmptyQueueStepIsStructured) {
  Served s("calc-team");
  auto r = s.api->post(v1 + "/control/step");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["code"], "empty-queue");
  EXPECT_EQ(s.api->get(v1 + "/control").status, 200);
}

TEST(Service, DualSubscribersSeeIdenticalStepEvents) {
  Served s("calc-team");
  SseReader a("127.0.0.1", s.port), b("127.0.0.1", s.port);
  ASSERT_TRUE(a.wait_subscribed());
  ASSERT_TRUE(b.wait_subscribed());
  ASSERT_EQ(s.send_task().status, 201);
  ASSERT_EQ(s.api->post(v1 + "/control/step").status, 200);
  const auto last = s.svc->events().last_event_seq();
  ASSERT_TRUE(a.wait_for(last));
  ASSERT_TRUE(b.wait_for(last));
  a.stop();
  b.stop();
  EXPECT_EQ(a.events(), b.events());
  std::vector<std::string> types;
  for (const auto& e : a.events()) types.push_back(e["event"]);
  EXPECT_NE(std::find(types.begin(), types.end(), "message-appended"), types.end());
  EXPECT_NE(std::find(types.begin(), types.end(), "queue-changed"), types.end());
}

TEST(Service, WritesAreVisibleOnTheStreamBeforeTheResponse) {
  Served s("calc-team");
  SseReader a("127.0.0.1", s.port);
  ASSERT_TRUE(a.wait_subscribed());
  const auto before = s.svc->events().last_event_seq();
  ASSERT_EQ(s.send_task().status, 201);
  // The event was committed before the response was sent.
  const auto after = s.svc->events().last_event_seq();
  ASSERT_GT(after, before);
  ASSERT_TRUE(a.wait_for(after));
  const auto events = a.events();
  EXPECT_EQ(events.back()["event"], "queue-changed");
  EXPECT_EQ(events.back()["data"]["payload"]["queue"].size(), 1u);
}

TEST(Service, PlayStreamsUntilFinalAnswer) {
  Served s("calc-team");
  SseReader a("127.0.0.1", s.port);
  ASSERT_TRUE(a.wait_subscribed());
  s.send_task();
  ASSERT_EQ(s.api->post(v1 + "/control/run").status, 202);
  s.wait_paused();
  std::vector<std::string> bodies;
  a.wait_for(s.svc->events().last_event_seq());
  for (const auto& e : a.events())
    if (e["event"] == "message-appended") bodies.push_back(e["data"]["payload"]["item"]["kind"]);
  ASSERT_FALSE(bodies.empty());
  EXPECT_EQ(bodies.back(), "final-answer");
}

TEST(Service, EditAtSeqFiveAddsOverviewColumn) {
  Served s("yankees-1977");
  s.send_task();
  s.step_until_empty();
  auto r = s.api->put(v1 + "/messages/5", {{"session_id", "s0"}, {"body", s.team.edits.front().body}});
  ASSERT_EQ(r.status, 201) << r.body.dump();
  const std::string child = r.body["session_id"];
  EXPECT_NE(child, "s0");
  auto ov = s.api->get(v1 + "/sessions/" + child + "/overview").body;
  ASSERT_EQ(ov["columns"].size(), 2u);
  // The fork holds the inherited prefix; the edited message waits in the queue.
  EXPECT_EQ(ov["columns"][1]["cells"].size(), 5u);
  EXPECT_EQ(s.api->get(v1 + "/queue").body["queue"][0]["provenance"], "edited");
  ASSERT_EQ(s.api->post(v1 + "/control/step").status, 200);
  ov = s.api->get(v1 + "/sessions/" + child + "/overview").body;
  EXPECT_EQ(ov["columns"][1]["session_id"], child);
  EXPECT_EQ(ov["columns"][1]["fork_seq"], 5);
  const auto cells = ov["columns"][1]["cells"];
  ASSERT_GT(cells.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(cells[i]["inherited"].get<bool>()) << i;
  EXPECT_TRUE(cells[5]["edited"].get<bool>());
}

TEST(Service, EditChangingRecipientRejected) {
  Served s("yankees-1977");
  s.send_task();
  s.step_until_empty();
  auto r = s.api->put(v1 + "/messages/5", {{"body", "x"}, {"recipient", "coder"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "edit-locality");
  EXPECT_EQ(s.api->get(v1 + "/sessions").body["sessions"].size(), 1u);
}

TEST(Service, StaleSessionLosesRace) {
  Served s("calc-team");
  s.send_task();
  s.step_until_empty();
  // Two operators both think s0 is active; the second reset loses.
  auto first = s.api->post(v1 + "/messages/1/reset", {{"session_id", "s0"}, {"expected_session", "s0"}});
  ASSERT_EQ(first.status, 201);
  auto second = s.api->post(v1 + "/messages/1/reset", {{"session_id", "s0"}, {"expected_session", "s0"}});
  EXPECT_EQ(second.status, 409);
  EXPECT_EQ(second.body["code"], "conflict");
  auto edit = s.api->put(v1 + "/messages/1", {{"session_id", "s0"}, {"body", "x"}, {"expected_session", "s0"}});
  EXPECT_EQ(edit.status, 409);
}

TEST(Service, ConcurrentSendsAreSerialized) {
  Served s("calc-team");
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t)
    threads.emplace_back([&, t] {
      ApiClient api("127.0.0.1", s.port);
      for (int i = 0; i < 15; ++i)
        api.post(v1 + "/messages", {{"recipient", "user"}, {"body", std::to_string(t) + ":" + std::to_string(i)}});
    });
  for (auto& th : threads) th.join();
  const auto q = s.api->get(v1 + "/queue").body["queue"];
  ASSERT_EQ(q.size(), 90u);
  std::set<std::uint64_t> orders;
  for (const auto& e : q) orders.insert(e["enqueue_order"].get<std::uint64_t>());
  EXPECT_EQ(orders.size(), 90u);
  for (std::size_t i = 1; i < q.size(); ++i) EXPECT_LT(q[i - 1]["enqueue_order"], q[i]["enqueue_order"]);
}

TEST(Service, RunThenPause) {
  Served s("calc-team");
  for (int i = 0; i < 150; ++i) s.api->post(v1 + "/messages", {{"recipient", "user"}, {"body", "n"}});
  ASSERT_EQ(s.api->post(v1 + "/control/run").status, 202);
  auto again = s.api->post(v1 + "/control/run");
  EXPECT_TRUE(again.status == 409 || again.status == 202) << again.status;
  auto paused = s.api->post(v1 + "/control/pause");
  ASSERT_EQ(paused.status, 200);
  EXPECT_EQ(paused.body["mode"], "paused");
  EXPECT_TRUE(paused.body["in_flight"].is_null());
  const auto total = s.api->get(v1 + "/sessions/s0/history").body["total"].get<std::size_t>();
  EXPECT_EQ(total + paused.body["queue_length"].get<std::size_t>(), 150u);
}

TEST(Service, HandlerCrashDoesNotCrashService) {
  Served s("calc-team", [](DebugService& svc) { svc.runtime().register_agent(std::make_shared<CountingAgent>("crasher")); });
  SseReader a("127.0.0.1", s.port);
  ASSERT_TRUE(a.wait_subscribed());
  s.api->post(v1 + "/messages", {{"recipient", "crasher"}, {"body", "boom"}});
  auto r = s.api->post(v1 + "/control/step");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "handler-failed");
  ASSERT_EQ(r.body["errors"].size(), 1u);
  EXPECT_EQ(r.body["errors"][0]["kind"], "handler-error");
  EXPECT_EQ(s.api->get(v1 + "/control").status, 200);
  ASSERT_TRUE(a.wait_for(s.svc->events().last_event_seq()));
  bool error_envelope = false, runstate = false;
  for (const auto& e : a.events()) {
    if (e["event"] == "message-appended" && e["data"]["payload"]["item"]["kind"] == "handler-error")
      error_envelope = true;
    if (error_envelope && e["event"] == "runstate-changed") runstate = true;
  }
  EXPECT_TRUE(error_envelope);
  EXPECT_TRUE(runstate);
  // A run started after the crash still works.
  s.send_task();
  EXPECT_EQ(s.api->post(v1 + "/control/run").status, 202);
  s.wait_paused();
  EXPECT_EQ(s.api->post(v1 + "/sessions/s0/evaluate").body["verdict"]["status"], "pass");
}

TEST(Service, ConfigChangeReachesSecondClient) {
  Served s("assistant-canned");
  SseReader other("127.0.0.1", s.port);
  ASSERT_TRUE(other.wait_subscribed());
  auto card = s.api->get(v1 + "/agents/assistant/config").body["config"];
  for (const char* k : {"system_prompt", "model_name", "temperature"}) EXPECT_TRUE(card.contains(k)) << k;
  auto bad = s.api->put(v1 + "/agents/assistant/config", {{"temperature", 1.5}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["code"], "schema-violation");
  EXPECT_TRUE(bad.body["detail"].dump().find("temperature") != std::string::npos) << bad.body.dump();
  ASSERT_EQ(s.api->put(v1 + "/agents/assistant/config", {{"system_prompt", "Be brief."}}).status, 200);
  auto idx = other.wait_type("config-changed");
  ASSERT_TRUE(idx);
  const auto e = other.events()[*idx];
  EXPECT_EQ(e["data"]["payload"]["config"]["system_prompt"], "Be brief.");
}

TEST(Service, HistoryIncludesThoughtsAndPaginates) {
  Served s("calc-team");
  s.send_task();
  s.step_until_empty();
  auto h = s.api->get(v1 + "/sessions/s0/history").body;
  bool thought = false;
  for (const auto& item : h["items"]) thought = thought || item["type"] == "thought";
  EXPECT_TRUE(thought);
  auto page = s.api->get(v1 + "/sessions/s0/history?offset=100").body;
  EXPECT_TRUE(page["items"].empty());
  EXPECT_EQ(page["total"], h["total"]);
}

TEST(Service, ExportMatchesCapture) {
  Served s("calc-team");
  s.send_task();
  s.step_until_empty();
  auto r = s.api->get(v1 + "/export/s0");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["envelopes"].size(), 4u);
  EXPECT_EQ(r.body["team"], "calc-team");
}
