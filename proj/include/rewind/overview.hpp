#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rewind/envelope.hpp"
#include "rewind/session_tree.hpp"

namespace timetravel {

enum class ColorDimension { kind, sender, recipient };

std::string_view to_string(ColorDimension d);
/// Throws Error(invalid_argument) for anything but kind/sender/recipient.
ColorDimension color_dimension_from_string(std::string_view s);

struct OverviewCell {
  Seq seq = 0;
  std::string message_id;
  std::string kind;
  std::string sender;
  std::string recipient;
  bool inherited = false;
  bool edited = false;
};

struct OverviewColumn {
  std::string session_id;
  std::optional<std::string> parent_id;
  std::optional<Seq> fork_seq;
  std::vector<OverviewCell> cells;
  Verdict verdict;
};

inline constexpr std::size_t kMaxDisplayColumns = 12;

/// One column per session in creation order; cells are the lineage
/// envelopes (thoughts excluded), so rows line up by seq across forks.
std::vector<OverviewColumn> build_overview(const SessionTree& tree);

/// Categorical color keys assigned in first-seen order per dimension.
/// Keys never change for the lifetime of the palette.
class ColorPalette {
 public:
  int color_index(const OverviewCell& cell, ColorDimension dimension);
  int color_index(const OverviewCell& cell, std::string_view dimension);
  /// Assigns keys to every cell in `columns`, column by column.
  void observe(const std::vector<OverviewColumn>& columns);
  std::map<std::string, int> mapping(ColorDimension dimension) const;

 private:
  int key_for(ColorDimension dimension, const std::string& value);

  mutable std::mutex mutex_;
  std::map<ColorDimension, std::map<std::string, int>> keys_;
};

json to_json(const OverviewColumn& c);
json overview_to_json(const std::vector<OverviewColumn>& columns, ColorPalette& palette, ColorDimension dimension);

}  // namespace timetravel
