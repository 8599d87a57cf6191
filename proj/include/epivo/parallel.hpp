#pragma once

#include <functional>

namespace epivo {

// Worker count from EPIVO_THREADS (default 1), clamped to hardware threads.
int thread_count();

// Runs fn(row) for row in [0, rows). Rows are distributed over
// thread_count() workers; callers must only write row-disjoint state so the
// result is schedule-independent.
void parallel_rows(int rows, const std::function<void(int)>& fn);

}  // namespace epivo
