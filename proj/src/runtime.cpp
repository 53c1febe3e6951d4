#include "drwr/runtime.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>

namespace drwr {

namespace {
int g_cap = 0;
}

void set_thread_cap(int n) { g_cap = n < 0 ? 0 : n; }

int thread_count() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("DRWR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  if (g_cap > 0) n = std::min(n, g_cap);
  return std::max(1, n);
}

}  // namespace drwr
