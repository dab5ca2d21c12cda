#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cma {

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs) return jobs;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs f(i) for i in [0, count) on up to `jobs` threads; rethrows the first exception.
template <class F>
void parallel_for(size_t count, unsigned jobs, F&& f) {
  jobs = std::min<size_t>(resolve_jobs(jobs), std::max<size_t>(count, 1));
  if (jobs <= 1) {
    for (size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (size_t i; (i = next++) < count;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cma
