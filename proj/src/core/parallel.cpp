#include "sdigs/core/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sdigs {

void parallel_for(int64_t jobs, int threads,
                  const std::function<void(int64_t)>& fn) {
  if (jobs <= 0) return;
  int workers = std::min<int64_t>(std::max(threads, 1), jobs);
  if (workers <= 1) {
    for (int64_t i = 0; i < jobs; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    int64_t begin = jobs * w / workers;
    int64_t end = jobs * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sdigs
