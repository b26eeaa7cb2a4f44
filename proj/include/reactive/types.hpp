#pragma once

#include <cstdint>
#include <map>

namespace reactive {

using RankId = int;
using TaskId = std::uint64_t;

/// Per-target task counts, keyed by destination rank. Absent means zero.
using QuotaMap = std::map<RankId, int>;

}  // namespace reactive
