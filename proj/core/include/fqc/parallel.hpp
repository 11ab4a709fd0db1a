#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fqc {

// Worker count used when a caller passes threads <= 0.
int default_threads();
void set_default_threads(int n);

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, n). Chunking does not depend on the
// thread count, so callers reducing the per-chunk results in index order get identical bits for any
// number of workers.
void for_each_chunk(std::size_t n, std::size_t chunk, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

}  // namespace fqc
