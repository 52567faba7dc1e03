#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "rewind/agent.hpp"
#include "rewind/agents/corpus.hpp"
#include "rewind/agents/script.hpp"

namespace timetravel::agents {

struct VisitAction { std::string url; };
struct FindAction { std::string text; };
struct SortAction { std::string table; std::string column; bool descending = true; };
struct ReadRowAction { std::string table; std::size_t row = 1; };

using BrowserAction = std::variant<VisitAction, FindAction, SortAction, ReadRowAction>;

/// Parses exactly one canonical call such as `sort(batting, walks, desc)`.
std::optional<BrowserAction> parse_browser_action(std::string_view text);
std::string to_string(const BrowserAction& a);

/// Number of distinct browser actions an instruction asks for: canonical
/// calls plus action verbs (visit, find, sort, read, search, click, scroll).
std::size_t count_requested_actions(std::string_view instruction);

/// Browses the local fixture corpus one action per instruction.
///
/// Instructions are either a single canonical call or natural language that
/// the script maps to one (`then: {"action": "..."}`); the default rule
/// supplies the fallback action. Checkpointed state is the current URL, the
/// viewport row and any table sort orders. Visible rows are derived from the
/// corpus and never persisted.
class WebSurferAgent : public Agent {
 public:
  WebSurferAgent(AgentDescriptor descriptor, std::filesystem::path script_path, std::filesystem::path corpus_root);

  void handle(const Envelope& envelope, AgentContext& ctx) override;
  json save_state() const override;
  void load_state(const json& content) override;

  const std::optional<std::string>& current_url() const { return current_url_; }
  std::size_t viewport_index() const { return viewport_index_; }
  /// Rows currently in view; empty until derived by a dispatch.
  const std::string& viewport_text() const { return viewport_cache_; }

 protected:
  void apply_config(const json& merged) override;

 private:
  std::string execute(const BrowserAction& action);
  std::optional<Table> current_table(const Page& page, const std::string& table_id) const;
  void refresh_viewport();

  Script script_;
  Corpus corpus_;
  std::size_t viewport_rows_ = 3;

  std::optional<std::string> current_url_;
  std::size_t viewport_index_ = 0;
  /// table id -> (column, descending)
  std::map<std::string, std::pair<std::string, bool>> sort_orders_;

  std::string viewport_cache_;
};

AgentDescriptor web_surfer_descriptor(std::string name);

}  // namespace timetravel::agents
