// hogfda/parallel.hpp
#pragma once

#include <cstddef>
#include <functional>

namespace hogfda {

// Process-wide worker count used by parallel_for (default 1).
void set_worker_count(int n);
int worker_count();

// Calls body(i) for i in [0, n). Work items must write to disjoint outputs;
// exceptions are rethrown on the caller (lowest failing index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hogfda
