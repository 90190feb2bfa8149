#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rampsvm::util {

/// Runs fn(i) for i in [0, count), fanning out over up to `threads` workers.
/// Results must be written to per-index slots by the caller; the iteration
/// order inside a worker is ascending, so single-threaded runs are plain
/// loops. Exceptions are captured and rethrown on the calling thread.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  std::mutex mu;
  std::exception_ptr error;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rampsvm::util
