#pragma once

// Deterministic parallel loops. Work is split into chunks whose boundaries
// depend only on the problem size; partial results are combined with a fixed
// pairwise tree, so results are bit-identical for any thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace hphi {

inline void set_num_threads(int k) {
  if (k > 0) omp_set_num_threads(k);
}

inline int num_threads() { return omp_get_max_threads(); }

// Exceptions thrown by body are captured; the one from the lowest index is
// rethrown after the loop.
template <class F>
void parallel_for(std::size_t count, F&& body) {
  const auto n = static_cast<long long>(count);
  std::exception_ptr first;
  long long first_index = n;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(hphi_parallel_for_error)
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

// Pairwise tree reduction in place; the topology depends only on parts.size().
template <class T, class Add>
T tree_reduce(std::vector<T> parts, Add&& add) {
  if (parts.empty()) return T{};
  std::size_t len = parts.size();
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) parts[i] = add(parts[i], parts[i + half]);
    len = half;
  }
  return parts.front();
}

struct ChunkPlan {
  std::size_t count = 0;
  std::size_t chunk = 1;
  std::size_t chunks() const { return count == 0 ? 0 : (count + chunk - 1) / chunk; }
  std::size_t begin(std::size_t c) const { return c * chunk; }
  std::size_t end(std::size_t c) const { return std::min(count, (c + 1) * chunk); }
};

// Chunk size chosen from the problem size alone (never from thread count).
inline ChunkPlan plan_chunks(std::size_t count, std::size_t max_chunks = 256,
                             std::size_t min_chunk = 256) {
  ChunkPlan p;
  p.count = count;
  p.chunk = std::max(min_chunk, (count + max_chunks - 1) / std::max<std::size_t>(1, max_chunks));
  return p;
}

// Sum of term(i) for i in [0, count), evaluated in fixed chunks, each chunk
// summed sequentially, chunks combined by tree_reduce.
template <class T, class Term>
T deterministic_sum(std::size_t count, Term&& term) {
  const ChunkPlan plan = plan_chunks(count);
  std::vector<T> parts(plan.chunks(), T{});
  parallel_for(plan.chunks(), [&](std::size_t c) {
    T acc{};
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) acc += term(i);
    parts[c] = acc;
  });
  return tree_reduce(std::move(parts), [](const T& a, const T& b) { return a + b; });
}

}  // namespace hphi
