#include "rewind/agents/file_surfer.hpp"

#include <algorithm>
#include <regex>

#include "rewind/agents/corpus.hpp"
#include "rewind/agents/script.hpp"
#include "rewind/error.hpp"

namespace fs = std::filesystem;

namespace timetravel::agents {

AgentDescriptor file_surfer_descriptor(std::string name) {
  return AgentDescriptor{std::move(name),
                         "file_surfer",
                         {"task"},
                         "Reads and queries local data files",
                         {{"root", ConfigField::Type::text, {}, {}, "directory the queries resolve against"}}};
}

FileSurferAgent::FileSurferAgent(AgentDescriptor descriptor, fs::path root)
    : Agent(std::move(descriptor)), root_(std::move(root)) {
  init_config(json{{"root", root_.string()}});
}

void FileSurferAgent::apply_config(const json& merged) {
  fs::path root = merged["root"].get<std::string>();
  if (!fs::is_directory(root)) throw Error(ErrorCode::not_found, "file_surfer root not found: " + root.string());
  root_ = std::move(root);
}

namespace {

std::vector<std::string> args_of(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& a : out) {
    auto b = a.find_first_not_of(" \t");
    auto e = a.find_last_not_of(" \t");
    a = b == std::string::npos ? "" : a.substr(b, e - b + 1);
  }
  return out;
}

double numeric(const std::string& s) {
  double v = 0;
  return parse_number(s, v) ? v : 0.0;
}

}  // namespace

std::string FileSurferAgent::run_query(std::string_view query) {
  static const std::regex call(R"(^\s*(open|lookup|extremes)\s*\(([^()]*)\)\s*$)");
  std::smatch m;
  std::string q(query);
  if (!std::regex_match(q, m, call)) return "error: unsupported file query '" + q + "'";
  const std::string op = m[1].str();
  const auto args = args_of(m[2].str());
  if (args.empty() || args[0].empty()) return "error: " + op + " needs a file path";

  const fs::path path = root_ / args[0];
  if (!fs::is_regular_file(path)) return "not found: " + args[0];
  Table t = read_csv(path);
  current_file_ = args[0];

  if (op == "open") {
    std::string out = "Opened " + args[0] + ": " + std::to_string(t.rows.size()) + " rows. Columns:";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? ", " : " ") + t.columns[i];
    out += ".";
    return out;
  }

  if (args.size() < 3) return "error: " + op + " needs (path, column, field)";
  auto col = t.column_index(args[1]);
  auto field = t.column_index(args[2]);
  if (!col || !field) return "error: unknown column in " + args[0];
  if (t.rows.empty()) return "error: " + args[0] + " has no rows";

  auto by_col = [&](const auto& a, const auto& b) { return numeric(a.at(*col)) < numeric(b.at(*col)); };
  if (op == "lookup") {
    auto it = std::max_element(t.rows.begin(), t.rows.end(), by_col);
    return t.format_row(static_cast<std::size_t>(it - t.rows.begin()));
  }

  auto [lo, hi] = std::minmax_element(t.rows.begin(), t.rows.end(), by_col);
  std::vector<std::string> values{lo->at(*field), hi->at(*field)};
  if (args.size() > 3 && args[3] == "alphabetical") std::sort(values.begin(), values.end());
  return args[2] + "=" + values[0] + "; " + args[2] + "=" + values[1];
}

void FileSurferAgent::handle(const Envelope& envelope, AgentContext& ctx) {
  if (envelope.is_broadcast()) return;
  const std::string query = extract_code_block(envelope.body()).value_or(envelope.body());
  ctx.reply(envelope, std::string(kinds::report), run_query(query));
}

json FileSurferAgent::save_state() const {
  return json{{"current_file", current_file_ ? json(*current_file_) : json(nullptr)}};
}

void FileSurferAgent::load_state(const json& content) {
  const auto& f = content.at("current_file");
  current_file_ = f.is_null() ? std::nullopt : std::optional<std::string>(f.get<std::string>());
}

}  // namespace timetravel::agents
