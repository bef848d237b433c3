#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace bellfield {

/// Runs body(i) for i in [0, n) on up to `workers` threads, in contiguous
/// chunks. Bodies must write only to slots owned by their index. The first
/// exception (by chunk order) is rethrown after all threads finish.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body &&body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end)
        break;
      pool.emplace_back([begin, end, &body, &error = errors[w]] {
        try {
          for (std::size_t i = begin; i < end; ++i)
            body(i);
        } catch (...) {
          error = std::current_exception();
        }
      });
    }
  }
  for (const auto &error : errors)
    if (error)
      std::rethrow_exception(error);
}

} // namespace bellfield
