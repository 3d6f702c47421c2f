#include "usdbf/util/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace usdbf {

namespace {
int g_threads = 0;  // 0 = hardware default
}

void set_num_threads(int n) { g_threads = std::max(0, n); }

int num_threads() {
  if (g_threads > 0) return g_threads;
  return omp_get_max_threads();
}

namespace detail {

void parallel_for_impl(std::int64_t begin, std::int64_t end,
                       void (*body)(std::int64_t, void*), void* ctx) {
  const std::int64_t n = end - begin;
  if (n <= 0) return;
  const int threads = std::min<std::int64_t>(num_threads(), n);
  if (threads <= 1) {
    for (std::int64_t i = begin; i < end; ++i) body(i, ctx);
    return;
  }
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t i = begin; i < end; ++i) body(i, ctx);
}

}  // namespace detail
}  // namespace usdbf
