#include "localmart/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace localmart {

std::size_t worker_count() {
  if (const char* env = std::getenv("LOCALMART_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  // Small batches are not worth a thread.
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, n / 64));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  constexpr std::size_t block = 1024;
  const std::size_t n_blocks = (n + block - 1) / block;
  std::vector<double> sums(n_blocks, 0.0);
  parallel_for(n_blocks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      double acc = 0.0;
      for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) acc += term(i);
      sums[b] = acc;
    }
  });
  while (sums.size() > 1) {
    std::vector<double> next((sums.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = 2 * i + 1 < sums.size() ? sums[2 * i] + sums[2 * i + 1] : sums[2 * i];
    }
    sums = std::move(next);
  }
  return sums.empty() ? 0.0 : sums.front();
}

}  // namespace localmart
