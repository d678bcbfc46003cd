#pragma once

#include <functional>

namespace sdigs {

// Runs fn(i) for i in [0, jobs) on up to `threads` worker threads.
// Jobs are assigned in contiguous blocks. Callers are responsible for making
// job outputs disjoint; result bits must not depend on the thread count, and
// every parallel site in this codebase is structured so they do not.
// threads <= 1 runs inline on the calling thread.
void parallel_for(int64_t jobs, int threads,
                  const std::function<void(int64_t)>& fn);

}  // namespace sdigs
