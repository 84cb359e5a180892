#include "darklabel/store.hpp"

#include <algorithm>
#include <fstream>

#include "darklabel/csv.hpp"
#include "darklabel/digest.hpp"
#include "darklabel/error.hpp"
#include "darklabel/text.hpp"

namespace fs = std::filesystem;

namespace darklabel {

bool WorkbookDir::exists() const { return fs::exists(workbook_file()); }

Workbook WorkbookDir::load() const {
  if (!exists()) throw Error(ErrorCode::UnknownWorkbook, "no workbook at " + dir_.string());
  return load_workbook(workbook_file().string());
}

void WorkbookDir::save(const Workbook& wb) const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir_.string() + ": " + ec.message());
  save_workbook(wb, workbook_file().string());
}

void WorkbookDir::log_action(const std::string& actor, const std::string& op,
                             const Json& params) const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  Json line{{"ts", text::now_iso8601()},
            {"actor", actor},
            {"op", op},
            {"params_digest", sha256_hex(params.dump())}};
  std::ofstream out(action_log(), std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + action_log().string());
  out << line.dump() << '\n';
}

std::size_t WorkbookDir::save_evaluation(const Json& evaluation) const {
  const auto eval_dir = dir_ / "evaluations";
  fs::create_directories(eval_dir);
  std::size_t k = 1;
  while (fs::exists(eval_dir / (std::to_string(k) + ".json"))) ++k;
  csv::write_file((eval_dir / (std::to_string(k) + ".json")).string(), evaluation.dump(2) + "\n");
  return k;
}

Json WorkbookDir::load_evaluation(std::size_t k) const {
  const auto file = dir_ / "evaluations" / (std::to_string(k) + ".json");
  if (!fs::exists(file))
    throw Error(ErrorCode::UnknownEvaluation, "no such evaluation", std::to_string(k));
  return Json::parse(csv::read_file(file.string()));
}

WorkbookStore::WorkbookStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create state directory " + root_.string());
}

void WorkbookStore::check_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 64 &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
                  });
  if (!ok) throw Error(ErrorCode::BadRequest, "workbook ids are 1-64 chars of [A-Za-z0-9_-]", id);
}

std::vector<std::string> WorkbookStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_))
    if (entry.is_directory() && fs::exists(entry.path() / "workbook.json"))
      ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

WorkbookDir WorkbookStore::dir(const std::string& id) const {
  check_id(id);
  return WorkbookDir(root_ / id);
}

bool WorkbookStore::contains(const std::string& id) const { return dir(id).exists(); }

void WorkbookStore::remove(const std::string& id) const {
  auto d = dir(id);
  if (!d.exists()) throw Error(ErrorCode::UnknownWorkbook, "no such workbook", id);
  fs::remove_all(d.path());
}

}  // namespace darklabel
