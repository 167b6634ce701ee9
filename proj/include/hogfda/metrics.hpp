// hogfda/metrics.hpp
#pragma once

#include <vector>

namespace hogfda {

// Adjusted Rand index between two labelings of the same items. Labels are
// arbitrary non-negative integers. Returns 1 when both partitions are trivial
// and identical.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace hogfda
