#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace convfold {

/// Evaluates fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
/// jobs == 0 uses the hardware concurrency.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn, unsigned jobs = 0) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  auto collect = [&] {
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
    return collect();
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += jobs) slots[i].emplace(fn(i));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return collect();
}

}  // namespace convfold
