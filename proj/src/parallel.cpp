#include "onsager/parallel.hpp"

#include <cstdlib>
#include <string>

namespace onsager {

int worker_count() {
    static const int count = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        if (const char* env = std::getenv("ONSAGER_THREADS")) {
            try {
                const int cap = std::stoi(env);
                if (cap > 0) return std::min(cap, hw);
            } catch (const std::exception&) {
            }
        }
        return hw;
    }();
    return count;
}

}  // namespace onsager
