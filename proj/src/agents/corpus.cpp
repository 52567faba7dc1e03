#include "rewind/agents/corpus.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rewind/error.hpp"

namespace fs = std::filesystem;

namespace timetravel::agents {

bool parse_number(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

std::string Table::format_row(std::size_t row) const {
  std::string out;
  const auto& cells = rows.at(row);
  for (std::size_t i = 0; i < columns.size() && i < cells.size(); ++i) {
    if (i) out += "; ";
    out += columns[i] + "=" + cells[i];
  }
  return out;
}

namespace {

std::string cell_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

Page page_from_json(const json& j) {
  Page p;
  p.url = j.at("url").get<std::string>();
  p.title = j.value("title", p.url);
  p.text = j.value("text", "");
  if (j.contains("links"))
    for (const auto& l : j["links"]) p.links.push_back(l.get<std::string>());
  if (j.contains("tables")) {
    for (const auto& t : j["tables"]) {
      Table table;
      for (const auto& c : t.at("columns")) table.columns.push_back(c.get<std::string>());
      for (const auto& r : t.at("rows")) {
        std::vector<std::string> row;
        for (const auto& cell : r) row.push_back(cell_text(cell));
        table.rows.push_back(std::move(row));
      }
      std::string id = t.at("id").get<std::string>();
      p.table_order.push_back(id);
      p.tables.emplace(id, std::move(table));
    }
  }
  return p;
}

Corpus::Corpus(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_))
    throw Error(ErrorCode::not_found, "corpus directory not found: " + root_.string(), json{{"path", root_.string()}});
}

std::map<std::string, fs::path> Corpus::scan() const {
  std::map<std::string, fs::path> index;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file() || it->path().extension() != ".json") continue;
    std::ifstream in(it->path());
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("url")) continue;
    index.emplace(doc["url"].get<std::string>(), it->path());
  }
  return index;
}

std::optional<Page> Corpus::find(const std::string& url) const {
  auto index = scan();
  auto it = index.find(url);
  if (it == index.end()) return std::nullopt;
  std::ifstream in(it->second);
  auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) return std::nullopt;
  return page_from_json(doc);
}

std::vector<std::string> Corpus::urls() const {
  std::vector<std::string> out;
  for (const auto& [url, _] : scan()) out.push_back(url);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "file not found: " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    t.rows.push_back(split_csv_line(line));
  }
  return t;
}

}  // namespace timetravel::agents
