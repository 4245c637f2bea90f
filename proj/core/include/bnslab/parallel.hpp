#pragma once

#include <cstddef>
#include <functional>

namespace bnslab {

/// Worker count used by parallel_for. Defaults to BNSLAB_THREADS, else 1.
int thread_count();
void set_thread_count(int n);

/// Splits [0,n) into contiguous chunks, one per worker; fn(begin, end).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bnslab
