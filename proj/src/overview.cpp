#include "rewind/overview.hpp"

#include "rewind/error.hpp"

namespace timetravel {

std::string_view to_string(ColorDimension d) {
  switch (d) {
    case ColorDimension::kind: return "kind";
    case ColorDimension::sender: return "sender";
    case ColorDimension::recipient: return "recipient";
  }
  return "kind";
}

ColorDimension color_dimension_from_string(std::string_view s) {
  if (s == "kind") return ColorDimension::kind;
  if (s == "sender") return ColorDimension::sender;
  if (s == "recipient") return ColorDimension::recipient;
  throw Error(ErrorCode::invalid_argument, "unknown color dimension '" + std::string(s) + "'",
              json{{"allowed", {"kind", "sender", "recipient"}}});
}

std::vector<OverviewColumn> build_overview(const SessionTree& tree) {
  std::vector<OverviewColumn> columns;
  for (const Session* s : tree.sessions()) {
    OverviewColumn col;
    col.session_id = s->id;
    col.parent_id = s->parent_id;
    col.fork_seq = s->fork_seq;
    col.verdict = s->verdict;
    for (const auto& e : tree.lineage(s->id)) {
      OverviewCell cell;
      cell.seq = e->seq;
      cell.message_id = e->message_id;
      cell.kind = e->kind;
      cell.sender = e->sender;
      cell.recipient = e->recipient;
      cell.inherited = s->fork_seq && e->seq < *s->fork_seq;
      cell.edited = s->fork_seq && e->seq == *s->fork_seq && e->provenance == Provenance::edited;
      col.cells.push_back(std::move(cell));
    }
    columns.push_back(std::move(col));
  }
  return columns;
}

int ColorPalette::key_for(ColorDimension dimension, const std::string& value) {
  auto& keys = keys_[dimension];
  auto [it, inserted] = keys.emplace(value, static_cast<int>(keys.size()));
  return it->second;
}

int ColorPalette::color_index(const OverviewCell& cell, ColorDimension dimension) {
  std::lock_guard lock(mutex_);
  switch (dimension) {
    case ColorDimension::kind: return key_for(dimension, cell.kind);
    case ColorDimension::sender: return key_for(dimension, cell.sender);
    case ColorDimension::recipient: return key_for(dimension, cell.recipient);
  }
  return 0;
}

int ColorPalette::color_index(const OverviewCell& cell, std::string_view dimension) {
  return color_index(cell, color_dimension_from_string(dimension));
}

void ColorPalette::observe(const std::vector<OverviewColumn>& columns) {
  for (const auto& col : columns)
    for (const auto& cell : col.cells)
      for (auto d : {ColorDimension::kind, ColorDimension::sender, ColorDimension::recipient}) color_index(cell, d);
}

std::map<std::string, int> ColorPalette::mapping(ColorDimension dimension) const {
  std::lock_guard lock(mutex_);
  auto it = keys_.find(dimension);
  return it == keys_.end() ? std::map<std::string, int>{} : it->second;
}

json to_json(const OverviewColumn& c) {
  json cells = json::array();
  for (const auto& cell : c.cells) {
    cells.push_back(json{{"seq", cell.seq},
                         {"message_id", cell.message_id},
                         {"kind", cell.kind},
                         {"sender", cell.sender},
                         {"recipient", cell.recipient},
                         {"inherited", cell.inherited},
                         {"edited", cell.edited}});
  }
  return json{{"session_id", c.session_id},
              {"parent_id", c.parent_id ? json(*c.parent_id) : json(nullptr)},
              {"fork_seq", c.fork_seq ? json(*c.fork_seq) : json(nullptr)},
              {"verdict", to_json(c.verdict)},
              {"cells", std::move(cells)}};
}

json overview_to_json(const std::vector<OverviewColumn>& columns, ColorPalette& palette, ColorDimension dimension) {
  palette.observe(columns);
  json cols = json::array();
  for (const auto& c : columns) {
    json j = to_json(c);
    for (std::size_t i = 0; i < c.cells.size(); ++i) j["cells"][i]["color_key"] = palette.color_index(c.cells[i], dimension);
    cols.push_back(std::move(j));
  }
  json palettes = json::object();
  for (auto d : {ColorDimension::kind, ColorDimension::sender, ColorDimension::recipient})
    palettes[std::string(to_string(d))] = palette.mapping(d);
  return json{{"dimension", to_string(dimension)},
              {"columns", std::move(cols)},
              {"palette", std::move(palettes)},
              {"max_display_columns", kMaxDisplayColumns}};
}

}  // namespace timetravel
