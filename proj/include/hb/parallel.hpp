#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hb {

// Upper bound on worker threads; HB_THREADS overrides the hardware count.
int thread_cap();

// Runs body(chunk) for chunk in [0, chunks) on up to thread_cap() threads.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

constexpr std::size_t kChunk = 64;

// Sum of term(i, acc) over i in [0, n). Partial sums are formed over fixed
// chunks and combined pairwise in index order, so the result does not depend
// on the number of threads.
template <class Acc, class Zero, class Term>
Acc chunked_sum(std::size_t n, Zero zero, Term term) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks == 0) return zero();
  std::vector<Acc> partial(chunks);
  parallel_chunks(chunks, [&](std::size_t c) {
    Acc acc = zero();
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) term(i, acc);
    partial[c] = std::move(acc);
  });
  for (std::size_t stride = 1; stride < chunks; stride *= 2)
    for (std::size_t i = 0; i + stride < chunks; i += 2 * stride) partial[i] += partial[i + stride];
  return std::move(partial[0]);
}

}  // namespace hb
