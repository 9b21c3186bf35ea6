#include "qlab/common.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace qlab {

namespace {
int g_threads = 0;
}

int default_thread_count() {
    if (g_threads > 0) return g_threads;
    if (const char* env = std::getenv("QLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

void set_default_thread_count(int threads) { g_threads = threads; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads) {
    int n = threads > 0 ? threads : default_thread_count();
    n = std::min<std::size_t>(n, count);
    if (n <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qlab
