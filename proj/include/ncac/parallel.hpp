#pragma once

#include <cstdint>
#include <functional>

namespace ncac {

// Effective worker count: requested if > 0, else hardware concurrency, both
// capped by the NCAC_THREADS environment variable when it is set.
int thread_count(int requested);

// Runs chunk_fn(begin, end) over contiguous chunks of [begin, end), one chunk
// per worker. Chunk boundaries depend only on the range and worker count, and
// callers merge per-chunk results in chunk order, so results do not depend on
// scheduling. With one worker this degenerates to a plain call.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& chunk_fn,
                  int threads);

} // namespace ncac
