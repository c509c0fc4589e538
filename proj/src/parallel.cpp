#include "hopflab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hopflab {

int max_threads() {
#ifdef _OPENMP
  static const int cached = [] {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("HOPFLAB_THREADS")) {
      try {
        int cap = std::stoi(env);
        if (cap >= 1 && cap < n) n = cap;
      } catch (...) {
      }
    }
    return n;
  }();
  return cached;
#else
  return 1;
#endif
}

}  // namespace hopflab
