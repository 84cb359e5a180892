#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darklabel/types.hpp"

namespace darklabel {

/// Inclusive range of group ids, ordered by first appearance in the dataset.
struct GroupRange {
  std::string from_group;
  std::string to_group;
};

/// Distinct group ids in first-appearance order.
std::vector<std::string> group_order(const Workbook& wb);

/// Keeps pinned entries and adds every row of `n_groups` groups drawn
/// uniformly without replacement from the groups that hold no pinned entry.
/// Pinned groups do not count toward `n_groups`. Returns the sample size.
std::size_t random_sample(Workbook& wb, std::size_t n_groups, std::uint64_t seed);

std::size_t sequential_sample(Workbook& wb, const GroupRange& range);

/// Empties the working sample, pins included.
void clear_sample(Workbook& wb);

}  // namespace darklabel
