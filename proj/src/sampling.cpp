#include "darklabel/sampling.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "darklabel/error.hpp"
#include "darklabel/random.hpp"

namespace darklabel {

namespace {

void require_indexed(const Workbook& wb) {
  if (wb.dataset.empty()) throw Error(ErrorCode::EmptyDataset, "dataset is empty");
  for (const auto& r : wb.dataset)
    if (!r.data_id) throw Error(ErrorCode::NotIndexed, "dataset has unindexed rows; run index");
}

std::vector<SampleEntry> pinned_entries(const Workbook& wb) {
  std::vector<SampleEntry> out;
  for (const auto& e : wb.working_sample)
    if (e.keep_pin) out.push_back(e);
  return out;
}

// Appends every dataset row whose group is selected, skipping ids already present.
void append_groups(const Workbook& wb, const std::set<std::string>& groups,
                   std::vector<SampleEntry>& sample) {
  std::set<std::int64_t> present;
  for (const auto& e : sample) present.insert(e.data_id);
  for (const auto& row : wb.dataset) {
    if (!groups.count(row.group_id) || present.count(*row.data_id)) continue;
    sample.push_back({*row.data_id, row.group_id, row.text, false});
  }
}

}  // namespace

std::vector<std::string> group_order(const Workbook& wb) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& r : wb.dataset)
    if (seen.insert(r.group_id).second) order.push_back(r.group_id);
  return order;
}

std::size_t random_sample(Workbook& wb, std::size_t n_groups, std::uint64_t seed) {
  require_indexed(wb);
  const auto groups = group_order(wb);
  auto sample = pinned_entries(wb);
  std::set<std::string> pinned_groups;
  for (const auto& e : sample) pinned_groups.insert(e.group_id);

  std::vector<std::string> eligible;
  for (const auto& g : groups)
    if (!pinned_groups.count(g)) eligible.push_back(g);
  if (n_groups < 1 || n_groups > groups.size())
    throw Error(ErrorCode::OutOfRange, "group count must be between 1 and the number of groups",
                std::to_string(groups.size()));
  if (n_groups > eligible.size())
    throw Error(ErrorCode::OutOfRange, "not enough unpinned groups to sample from",
                std::to_string(eligible.size()));

  SeededRng rng(seed);
  std::set<std::string> chosen;
  for (auto i : rng.choose(eligible.size(), n_groups)) chosen.insert(eligible[i]);
  append_groups(wb, chosen, sample);
  wb.working_sample = std::move(sample);
  return wb.working_sample.size();
}

std::size_t sequential_sample(Workbook& wb, const GroupRange& range) {
  require_indexed(wb);
  const auto groups = group_order(wb);
  auto pos = [&](const std::string& g) {
    auto it = std::find(groups.begin(), groups.end(), g);
    if (it == groups.end()) throw Error(ErrorCode::UnknownGroup, "unknown group id", g);
    return static_cast<std::size_t>(it - groups.begin());
  };
  const auto from = pos(range.from_group);
  const auto to = pos(range.to_group);
  if (from > to)
    throw Error(ErrorCode::InvertedRange, "range start comes after range end",
                range.from_group + ".." + range.to_group);
  std::set<std::string> selected(groups.begin() + static_cast<std::ptrdiff_t>(from),
                                 groups.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  auto sample = pinned_entries(wb);
  append_groups(wb, selected, sample);
  wb.working_sample = std::move(sample);
  return wb.working_sample.size();
}

void clear_sample(Workbook& wb) { wb.working_sample.clear(); }

}  // namespace darklabel
