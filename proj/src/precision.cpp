#include "eulerlab/real.hpp"

#include <cstdlib>

namespace eulerlab {

int selected_digits() {
    const char* env = std::getenv("EULERLAB_DIGITS");
    if (!env) return 50;
    int v = std::atoi(env);
    return v >= 100 ? 100 : 50;
}

}  // namespace eulerlab
