#include "mfl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace mfl {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MFL_THREADS")) {
        try {
            const unsigned long v = std::stoul(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace mfl
