#include "epivo/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace epivo {

int thread_count() {
  static const int cached = [] {
    const char* env = std::getenv("EPIVO_THREADS");
    int n = 1;
    if (env != nullptr) {
      n = std::atoi(env);
      if (n < 1) n = 1;
    }
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw > 0 && n > hw) n = hw;
    return n;
  }();
  return cached;
}

void parallel_rows(int rows, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), rows);
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      int r;
      while ((r = next.fetch_add(1)) < rows) fn(r);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace epivo
