#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rewind/agent.hpp"

namespace timetravel::agents {

/// Answers queries against CSV files under a root directory:
///   open(path)
///   lookup(path, by_column, field)          row with the largest by_column
///   extremes(path, column, field[, alphabetical])
/// The query may arrive inside a fenced code block. State is the last
/// opened file.
class FileSurferAgent : public Agent {
 public:
  FileSurferAgent(AgentDescriptor descriptor, std::filesystem::path root);

  void handle(const Envelope& envelope, AgentContext& ctx) override;
  json save_state() const override;
  void load_state(const json& content) override;

  const std::optional<std::string>& current_file() const { return current_file_; }

 protected:
  void apply_config(const json& merged) override;

 private:
  std::string run_query(std::string_view query);

  std::filesystem::path root_;
  std::optional<std::string> current_file_;
};

AgentDescriptor file_surfer_descriptor(std::string name);

}  // namespace timetravel::agents
