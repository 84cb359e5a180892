#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "darklabel/persistence.hpp"
#include "darklabel/types.hpp"

namespace darklabel {

/// One workbook on disk:
///   <dir>/workbook.json        the workbook document
///   <dir>/actions.jsonl        append-only {ts, actor, op, params_digest}
///   <dir>/evaluations/<k>.json stored session evaluations, k = 1, 2, ...
class WorkbookDir {
 public:
  explicit WorkbookDir(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& path() const noexcept { return dir_; }
  std::filesystem::path workbook_file() const { return dir_ / "workbook.json"; }
  std::filesystem::path action_log() const { return dir_ / "actions.jsonl"; }
  bool exists() const;

  Workbook load() const;
  void save(const Workbook& wb) const;
  void log_action(const std::string& actor, const std::string& op, const Json& params) const;

  std::size_t save_evaluation(const Json& evaluation) const;
  Json load_evaluation(std::size_t k) const;

 private:
  std::filesystem::path dir_;
};

/// Directory of workbooks, one subdirectory per id.
class WorkbookStore {
 public:
  explicit WorkbookStore(std::filesystem::path root);

  /// Ids are [A-Za-z0-9_-]{1,64}. Throws BadRequest for anything else.
  static void check_id(const std::string& id);

  std::vector<std::string> list() const;
  WorkbookDir dir(const std::string& id) const;
  bool contains(const std::string& id) const;
  void remove(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

}  // namespace darklabel
