#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rewind/envelope.hpp"

namespace timetravel::agents {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  /// "col=value; col=value"
  std::string format_row(std::size_t row) const;
};

struct Page {
  std::string url;
  std::string title;
  std::string text;
  std::vector<std::string> links;
  std::map<std::string, Table> tables;
  /// table ids in document order
  std::vector<std::string> table_order;
};

Page page_from_json(const json& j);

/// Local stand-in for the web: a directory of JSON page documents, each
/// carrying its own "url". Pages are read from disk on every lookup, so a
/// changed corpus is picked up on the next dispatch.
class Corpus {
 public:
  explicit Corpus(std::filesystem::path root);

  std::optional<Page> find(const std::string& url) const;
  std::vector<std::string> urls() const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::map<std::string, std::filesystem::path> scan() const;

  std::filesystem::path root_;
};

/// Plain comma-separated file with a header row; no quoting.
Table read_csv(const std::filesystem::path& path);

bool parse_number(std::string_view s, double& out);

}  // namespace timetravel::agents
