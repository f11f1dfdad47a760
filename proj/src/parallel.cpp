#include "cdg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cdg {

int thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  hw = std::max(hw, 1);
  if (const char* env = std::getenv("CDG_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1)
        return std::min(cap, hw);
    } catch (const std::exception&) {
    }
  }
  return hw;
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int t = 1; t < workers; ++t)
    pool.emplace_back(run);
  run();
  pool.clear();
  if (error)
    std::rethrow_exception(error);
}

} // namespace cdg
