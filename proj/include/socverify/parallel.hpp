#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace socv {

/// Worker cap: SOC_VERIFY_THREADS if set to a positive integer, else the hardware concurrency.
inline std::size_t thread_cap() {
  if (const char* env = std::getenv("SOC_VERIFY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// results[i] = fn(i). Each slot is written by exactly one worker, so the output does not
/// depend on scheduling. The exception of the lowest failing index is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn, std::size_t workers = thread_cap())
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  workers = std::max<std::size_t>(1, std::min(workers, count));
  auto work = [&](std::size_t tid) {
    for (std::size_t i = tid; i < count; i += workers) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

} // namespace socv
