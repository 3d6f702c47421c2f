#pragma once

#include <cstdint>

// Thin wrapper around OpenMP. All parallel loops in this library write
// disjoint outputs per iteration and reduce in a fixed order afterwards,
// so results are bit-identical for any thread count.

namespace usdbf {

// 0 restores the hardware default.
void set_num_threads(int n);
int num_threads();

namespace detail {
void parallel_for_impl(std::int64_t begin, std::int64_t end,
                       void (*body)(std::int64_t, void*), void* ctx);
}

template <typename F>
void parallel_for(std::int64_t begin, std::int64_t end, F&& f) {
  auto thunk = [](std::int64_t i, void* ctx) { (*static_cast<F*>(ctx))(i); };
  detail::parallel_for_impl(begin, end, thunk, &f);
}

}  // namespace usdbf
