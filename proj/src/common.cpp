#include "ebs/common.hpp"

#include <cstdlib>
#include <thread>

namespace ebs {

unsigned worker_count() {
    if (const char* env = std::getenv("DARBOUX_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

}  // namespace ebs
