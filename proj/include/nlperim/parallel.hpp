#pragma once

#include <cstddef>
#include <functional>

namespace nlp {

/// Number of worker threads used by the parallel loops (0 = hardware default).
void set_worker_count(unsigned n);
unsigned worker_count();

/// Runs body(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
/// Chunk boundaries depend only on n and chunk, never on the worker count, so
/// callers that store per-chunk partials and combine them in index order get
/// bit-identical results for any number of workers.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) { return chunk == 0 ? 0 : (n + chunk - 1) / chunk; }

}  // namespace nlp
