#include "hdrest/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace hdrest {
namespace {
std::atomic<std::size_t> g_workers{0};

std::size_t default_workers() {
    if (const char* env = std::getenv("HDREST_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}
}  // namespace

std::size_t worker_count() {
    const std::size_t w = g_workers.load();
    return w ? w : default_workers();
}

void set_worker_count(std::size_t n) { g_workers.store(n); }

}  // namespace hdrest
