#include "asympode/parallel.hpp"

#include <omp.h>

#include <cstdlib>

namespace asympode {

namespace {

int& limit_storage() {
    static int limit = [] {
        if (const char* env = std::getenv("ASYMPODE_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) return n;
        }
        return omp_get_max_threads();
    }();
    return limit;
}

}  // namespace

int thread_limit() { return limit_storage(); }

void set_thread_limit(int n) { limit_storage() = n > 0 ? n : omp_get_max_threads(); }

}  // namespace asympode
