#include "nlperim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nlp {

namespace {
std::atomic<unsigned> g_workers{0};
}

void set_worker_count(unsigned n) { g_workers = n; }

unsigned worker_count() {
    unsigned n = g_workers.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    if (chunk == 0) chunk = n;
    const std::size_t nchunks = chunk_count(n, chunk);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), nchunks));
    auto run_one = [&](std::size_t c) { body(c, c * chunk, std::min(n, (c + 1) * chunk)); };
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) run_one(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= nchunks) return;
                try {
                    run_one(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    next = nchunks;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace nlp
