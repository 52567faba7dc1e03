#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace timetravel;
using namespace testing_support;

namespace {

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::internal, "none");
}

}  // namespace

TEST(Team, ShippedTeamsLoad) {
  for (const auto& name : shipped_teams()) {
    const TeamSpec t = team(name);
    EXPECT_EQ(t.name, name);
    EXPECT_TRUE(t.task);
    EXPECT_TRUE(t.file.is_absolute());
    EXPECT_NO_THROW(make_runtime(t)) << name;
  }
}

TEST(Team, ScenarioAnswers) {
  EXPECT_EQ(team("yankees-1977").task->expected, "519");
  EXPECT_EQ(team("yankees-1977-sorted-table").task->expected, "519");
  EXPECT_EQ(team("presidents-cities").task->expected, "Braintree, Honolulu");
  EXPECT_EQ(team("calc-team").task->expected, "4");
  for (const char* name : {"yankees-1977", "presidents-cities"}) {
    std::set<std::string> types;
    for (const auto& e : team(name).edits) types.insert(e.type);
    EXPECT_EQ(types, (std::set<std::string>{"add-specificity", "simplify", "modify-plan"})) << name;
  }
}

TEST(Team, YankeesRosterHasFiveRoles) {
  auto rt = make_runtime(team("yankees-1977"));
  std::set<std::string> types;
  for (const auto& d : rt->team()) types.insert(d.type);
  EXPECT_EQ(types, (std::set<std::string>{"orchestrator", "web_surfer", "file_surfer", "coder", "executor"}));
}

TEST(Team, MalformedFileCitesLine) {
  TempDir dir;
  const auto p = dir.write("bad.json", "{\n  \"team\": \"x\",\n  \"agents\": [,]\n}\n");
  Error e = error_of([&] { load_team_file(p); });
  EXPECT_EQ(e.code(), ErrorCode::parse_error);
  EXPECT_EQ(e.detail()["line"], 3);
  EXPECT_NE(std::string(e.what()).find(p.string() + ":3:"), std::string::npos) << e.what();
}

TEST(Team, MissingFileNamed) {
  Error e = error_of([] { load_team_file("/nowhere/team.json"); });
  EXPECT_EQ(e.code(), ErrorCode::not_found);
  EXPECT_NE(std::string(e.what()).find("/nowhere/team.json"), std::string::npos);
}

TEST(Team, MissingScriptPathNamed) {
  json doc = absolutized_team("calc-team");
  doc["agents"][0]["script"] = "/nowhere/script.json";
  Error e = error_of([&] { parse_team(doc, "/", "inline.json"); });
  EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  EXPECT_NE(std::string(e.what()).find("/nowhere/script.json"), std::string::npos);
}

TEST(Team, RejectsBadRosters) {
  json doc = absolutized_team("calc-team");
  json dup = doc;
  dup["agents"][2]["name"] = "orchestrator";
  EXPECT_NE(std::string(error_of([&] { parse_team(dup, "/"); }).what()).find("duplicate"), std::string::npos);
  json unknown = doc;
  unknown["agents"][1]["type"] = "wizard";
  EXPECT_NE(std::string(error_of([&] { parse_team(unknown, "/"); }).what()).find("wizard"), std::string::npos);
  json reserved = doc;
  reserved["agents"][1]["name"] = "user";
  EXPECT_NE(std::string(error_of([&] { parse_team(reserved, "/"); }).what()).find("reserved"), std::string::npos);
  json empty = doc;
  empty["agents"] = json::array();
  EXPECT_EQ(error_of([&] { parse_team(empty, "/"); }).code(), ErrorCode::invalid_argument);
  json bad_edit = doc;
  bad_edit["edits"] = {{{"seq", "five"}, {"body", "x"}}};
  EXPECT_EQ(error_of([&] { parse_team(bad_edit, "/"); }).code(), ErrorCode::invalid_argument);
}

TEST(Team, AgentConfigApplied) {
  json doc = absolutized_team("calc-team");
  doc["agents"][1]["config"] = {{"max_expression_length", 10}};
  auto rt = make_runtime(parse_team(doc, "/"));
  EXPECT_EQ(rt->get_config("calculator")["max_expression_length"], 10);
  doc["agents"][1]["config"] = {{"max_expression_length", -1}};
  EXPECT_EQ(error_of([&] { make_runtime(parse_team(doc, "/")); }).code(), ErrorCode::schema_violation);
}

TEST(Team, EnqueueTaskUsesFixture) {
  const TeamSpec t = team("calc-team");
  auto rt = make_runtime(t);
  auto q = enqueue_task(*rt, t);
  EXPECT_EQ(q.sender, "user");
  EXPECT_EQ(q.recipient, "BROADCAST");
  EXPECT_EQ(payload_body(q.payload), "2+2");
  TeamSpec no_task = t;
  no_task.task.reset();
  EXPECT_EQ(error_of([&] { enqueue_task(*rt, no_task); }).code(), ErrorCode::invalid_argument);
}
