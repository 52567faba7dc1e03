#include "rewind/agents/web_surfer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "rewind/error.hpp"

namespace timetravel::agents {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_args(std::string_view args) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= args.size(); ++i) {
    if (i == args.size() || args[i] == ',') {
      out.push_back(trim(args.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

const std::regex& call_pattern() {
  static const std::regex re(R"(\b(visit|find|sort|read_row)\s*\(([^()]*)\))", std::regex::icase);
  return re;
}

const std::set<std::string>& action_verbs() {
  static const std::set<std::string> verbs{"visit", "find", "sort", "read", "search", "click", "scroll", "navigate"};
  return verbs;
}

}  // namespace

std::optional<BrowserAction> parse_browser_action(std::string_view text) {
  static const std::regex whole(R"(^\s*(visit|find|sort|read_row)\s*\(([^()]*)\)\s*\.?\s*$)", std::regex::icase);
  std::string s(text);
  std::smatch sm;
  if (!std::regex_match(s, sm, whole)) return std::nullopt;
  const std::string name = to_lower(sm[1].str());
  const auto args = split_args(sm[2].str());
  if (name == "visit" && args.size() == 1 && !args[0].empty()) return VisitAction{args[0]};
  if (name == "find" && args.size() == 1 && !args[0].empty()) return FindAction{args[0]};
  if (name == "sort" && (args.size() == 2 || args.size() == 3)) {
    bool desc = true;
    if (args.size() == 3) {
      auto dir = to_lower(args[2]);
      if (dir == "asc" || dir == "ascending") desc = false;
      else if (dir != "desc" && dir != "descending") return std::nullopt;
    }
    return SortAction{args[0], args[1], desc};
  }
  if (name == "read_row" && args.size() == 2) {
    double n = 0;
    if (!parse_number(args[1], n) || n < 1 || n != static_cast<double>(static_cast<std::size_t>(n))) return std::nullopt;
    return ReadRowAction{args[0], static_cast<std::size_t>(n)};
  }
  return std::nullopt;
}

std::string to_string(const BrowserAction& a) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, VisitAction>) return "visit(" + x.url + ")";
        else if constexpr (std::is_same_v<T, FindAction>) return "find(" + x.text + ")";
        else if constexpr (std::is_same_v<T, SortAction>)
          return "sort(" + x.table + ", " + x.column + ", " + (x.descending ? "desc" : "asc") + ")";
        else return "read_row(" + x.table + ", " + std::to_string(x.row) + ")";
      },
      a);
}

std::size_t count_requested_actions(std::string_view instruction) {
  std::string text(instruction);
  std::size_t calls = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), call_pattern()); it != std::sregex_iterator(); ++it)
    ++calls;
  std::string rest = std::regex_replace(text, call_pattern(), " ");
  std::set<std::string> verbs;
  std::string word;
  auto flush = [&] {
    if (action_verbs().count(word)) verbs.insert(word);
    word.clear();
  };
  for (char c : rest) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return calls + verbs.size();
}

AgentDescriptor web_surfer_descriptor(std::string name) {
  return AgentDescriptor{std::move(name),
                         "web_surfer",
                         {"task"},
                         "Browses pages of the local corpus, one action per instruction",
                         {
                             {"script", ConfigField::Type::text, {}, {}, "instruction-to-action rules"},
                             {"corpus", ConfigField::Type::text, {}, {}, "page corpus directory"},
                             {"viewport_rows", ConfigField::Type::integer, 1, 50, "rows visible in the viewport"},
                         }};
}

WebSurferAgent::WebSurferAgent(AgentDescriptor descriptor, std::filesystem::path script_path,
                               std::filesystem::path corpus_root)
    : Agent(std::move(descriptor)), script_(Script::load(script_path)), corpus_(corpus_root) {
  init_config(json{{"script", script_path.string()}, {"corpus", corpus_root.string()}, {"viewport_rows", 3}});
}

void WebSurferAgent::apply_config(const json& merged) {
  Script script = merged["script"] != config()["script"] ? Script::load(merged["script"].get<std::string>()) : script_;
  Corpus corpus = merged["corpus"] != config()["corpus"] ? Corpus(merged["corpus"].get<std::string>()) : corpus_;
  script_ = std::move(script);
  corpus_ = std::move(corpus);
  viewport_rows_ = merged["viewport_rows"].get<std::size_t>();
  viewport_cache_.clear();
}

void WebSurferAgent::handle(const Envelope& envelope, AgentContext& ctx) {
  if (envelope.is_broadcast()) return;
  const std::string& body = envelope.body();

  const std::size_t requested = count_requested_actions(body);
  if (requested > 1) {
    ctx.reply(envelope, std::string(kinds::report),
              "single-task violation: I can only perform one browser action per instruction, but this asks for " +
                  std::to_string(requested) + ". Please send one action at a time.");
    return;
  }

  std::optional<BrowserAction> action = parse_browser_action(body);
  if (!action) {
    const Rule& rule = script_.match(envelope, json::object());
    if (rule.then.contains("action")) {
      const auto text = rule.then["action"].get<std::string>();
      action = parse_browser_action(text);
      if (!action) throw Error(ErrorCode::parse_error, "script rule '" + rule.name + "' has a bad action: " + text);
    }
  }
  if (!action) {
    ctx.reply(envelope, std::string(kinds::report), "I could not work out which browser action to take.");
    return;
  }
  ctx.think("Next action: " + to_string(*action));
  ctx.reply(envelope, std::string(kinds::report), execute(*action));
  refresh_viewport();
}

std::optional<Table> WebSurferAgent::current_table(const Page& page, const std::string& table_id) const {
  auto it = page.tables.find(table_id);
  if (it == page.tables.end()) return std::nullopt;
  Table t = it->second;
  auto order = sort_orders_.find(table_id);
  if (order == sort_orders_.end()) return t;
  auto col = t.column_index(order->second.first);
  if (!col) return t;
  const bool desc = order->second.second;
  std::stable_sort(t.rows.begin(), t.rows.end(), [&](const auto& a, const auto& b) {
    double x = 0, y = 0;
    const std::string& ca = a.at(*col);
    const std::string& cb = b.at(*col);
    if (parse_number(ca, x) && parse_number(cb, y)) return desc ? x > y : x < y;
    return desc ? ca > cb : ca < cb;
  });
  return t;
}

std::string WebSurferAgent::execute(const BrowserAction& action) {
  if (auto visit = std::get_if<VisitAction>(&action)) {
    auto page = corpus_.find(visit->url);
    if (!page) return "page not found: " + visit->url;
    current_url_ = visit->url;
    viewport_index_ = 0;
    sort_orders_.clear();
    std::string out = "Visited " + page->url + ": " + page->title + ".";
    if (!page->text.empty()) out += " " + page->text;
    if (!page->table_order.empty()) {
      out += " Tables:";
      for (std::size_t i = 0; i < page->table_order.size(); ++i) {
        const auto& id = page->table_order[i];
        out += (i ? ", " : " ") + id + " (" + std::to_string(page->tables.at(id).rows.size()) + " rows)";
      }
      out += ".";
    }
    if (!page->links.empty()) {
      out += " Links:";
      for (std::size_t i = 0; i < page->links.size(); ++i) out += (i ? ", " : " ") + page->links[i];
      out += ".";
    }
    return out;
  }

  if (!current_url_) return "No page is open. Visit a page first.";
  auto page = corpus_.find(*current_url_);
  if (!page) return "page not found: " + *current_url_;

  if (auto find = std::get_if<FindAction>(&action)) {
    for (const auto& id : page->table_order) {
      auto t = current_table(*page, id);
      for (std::size_t r = 0; r < t->rows.size(); ++r) {
        for (const auto& cell : t->rows[r]) {
          if (!contains_ci(cell, find->text)) continue;
          viewport_index_ = r;
          return "Found '" + find->text + "' in table " + id + ", row " + std::to_string(r + 1) + ": " + t->format_row(r);
        }
      }
    }
    if (contains_ci(page->text, find->text)) return "Found '" + find->text + "' in the page text of " + page->url + ".";
    return "'" + find->text + "' not found on " + page->url;
  }

  if (auto sort = std::get_if<SortAction>(&action)) {
    auto base = page->tables.find(sort->table);
    if (base == page->tables.end()) return "table '" + sort->table + "' not found on " + page->url;
    if (!base->second.column_index(sort->column))
      return "table '" + sort->table + "' has no column '" + sort->column + "'";
    sort_orders_[sort->table] = {sort->column, sort->descending};
    viewport_index_ = 0;
    auto t = current_table(*page, sort->table);
    std::string out = "Sorted table " + sort->table + " by " + sort->column + " (" +
                      (sort->descending ? "descending" : "ascending") + ").";
    if (!t->rows.empty()) {
      out += " First row: " + t->format_row(0) + ".";
      out += " Last row: " + t->format_row(t->rows.size() - 1) + ".";
    }
    return out;
  }

  const auto& read = std::get<ReadRowAction>(action);
  auto t = current_table(*page, read.table);
  if (!t) return "table '" + read.table + "' not found on " + page->url;
  if (read.row > t->rows.size())
    return "table " + read.table + " has only " + std::to_string(t->rows.size()) + " rows";
  viewport_index_ = read.row - 1;
  return "Row " + std::to_string(read.row) + " of table " + read.table + ": " + t->format_row(read.row - 1);
}

void WebSurferAgent::refresh_viewport() {
  viewport_cache_.clear();
  if (!current_url_) return;
  auto page = corpus_.find(*current_url_);
  if (!page || page->table_order.empty()) return;
  auto t = current_table(*page, page->table_order.front());
  for (std::size_t r = viewport_index_; r < t->rows.size() && r < viewport_index_ + viewport_rows_; ++r)
    viewport_cache_ += t->format_row(r) + "\n";
}

json WebSurferAgent::save_state() const {
  json sorts = json::object();
  for (const auto& [table, order] : sort_orders_)
    sorts[table] = json{{"column", order.first}, {"descending", order.second}};
  return json{{"current_url", current_url_ ? json(*current_url_) : json(nullptr)},
              {"viewport_index", viewport_index_},
              {"sort_orders", std::move(sorts)}};
}

void WebSurferAgent::load_state(const json& content) {
  const auto& url = content.at("current_url");
  current_url_ = url.is_null() ? std::nullopt : std::optional<std::string>(url.get<std::string>());
  viewport_index_ = content.at("viewport_index").get<std::size_t>();
  sort_orders_.clear();
  for (const auto& [table, order] : content.at("sort_orders").items())
    sort_orders_[table] = {order.at("column").get<std::string>(), order.at("descending").get<bool>()};
  viewport_cache_.clear();
}

}  // namespace timetravel::agents
