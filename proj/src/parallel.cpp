#include "scehg/parallel.hpp"

#include "scehg/types.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace scehg {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int resolve_threads(const std::string& spec) {
  if (spec.empty() || spec == "auto") return resolve_threads(0);
  try {
    size_t pos = 0;
    int value = std::stoi(spec, &pos);
    if (pos != spec.size() || value < 1) throw std::invalid_argument(spec);
    return value;
  } catch (const std::exception&) {
    throw InvalidInput("--threads expects 'auto' or a positive integer, got '" + spec + "'");
  }
}

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& body) {
  if (n_tasks <= 0) return;
  threads = std::min(resolve_threads(threads), n_tasks);
  if (threads <= 1) {
    for (int i = 0; i < n_tasks; ++i) body(i);
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<size_t>(n_tasks));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        body(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace scehg
