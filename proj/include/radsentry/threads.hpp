#pragma once

#include <cstddef>
#include <functional>

namespace radsentry {

// Resolves a thread-count request: values >= 1 are taken as-is, anything
// else falls back to the RADSENTRY_THREADS environment variable and finally
// to the hardware concurrency.
int resolve_threads(int requested);

// Runs fn(chunk_index, begin, end) over [0, n_items) split into fixed-size
// chunks. Chunk boundaries depend only on n_items and chunk_size, never on
// the worker count, so per-chunk results merged in chunk order are
// bit-identical for any number of threads. fn must only write to
// chunk-private or chunk-indexed storage.
void parallel_chunks(std::size_t n_items, std::size_t chunk_size, int threads,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

}  // namespace radsentry
