#include "mirrornoise/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace mirrornoise {

int thread_count() {
  if (const char* env = std::getenv("MIRRORNOISE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
      // unparsable: fall through to the default
    }
  }
  return omp_get_max_threads();
}

}  // namespace mirrornoise
