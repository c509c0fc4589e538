#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hopflab {

/// Every batch kernel runs in either mode and must produce bitwise-identical
/// results; the serial path is the reference the parallel one is tested
/// against.
enum class ExecMode { kSerial, kParallel };

/// Worker count: OpenMP maximum, capped by the HOPFLAB_THREADS environment
/// variable when set.
int max_threads();

/// Exceptions must not unwind out of an OpenMP region; the first one thrown
/// by any iteration is captured and rethrown after the loop.
template <class F>
void parallel_for(ExecMode mode, std::size_t n, F&& body) {
  std::exception_ptr first_error;
#ifdef _OPENMP
  if (mode == ExecMode::kParallel && n > 1) {
    std::mutex error_mutex;
    const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  (void)mode;
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace hopflab
