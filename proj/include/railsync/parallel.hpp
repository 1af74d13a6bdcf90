#pragma once

#include <cstddef>
#include <functional>

namespace railsync {

// Runs fn(i) for i in [0, n) on up to `threads` workers with static block
// partitioning. Each item must write only to its own result slot; reductions
// happen after the join, in index order, so output is schedule-independent.
// Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// Same, but hands the worker index to fn so it can reuse per-worker scratch
// space. The scratch must be reset per item; outputs may not depend on which
// worker ran the item.
void parallel_for_workers(std::size_t n, unsigned threads,
                          const std::function<void(unsigned, std::size_t)>& fn);

unsigned default_thread_count();

}  // namespace railsync
