#include "ncac/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ncac {

int thread_count(int requested) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("NCAC_THREADS")) {
        try {
            int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (...) {
            // Unparseable NCAC_THREADS is ignored rather than fatal.
        }
    }
    return n;
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& chunk_fn,
                  int threads) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;
    int workers = std::min<std::int64_t>(thread_count(threads), total);
    if (workers <= 1) {
        chunk_fn(begin, end);
        return;
    }
    // Static contiguous split; the first (total % workers) chunks get one
    // extra item.
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::int64_t base = total / workers;
    const std::int64_t extra = total % workers;
    std::int64_t lo = begin;
    for (int w = 0; w < workers; ++w) {
        std::int64_t hi = lo + base + (w < extra ? 1 : 0);
        pool.emplace_back([&chunk_fn, lo, hi] { chunk_fn(lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

} // namespace ncac
