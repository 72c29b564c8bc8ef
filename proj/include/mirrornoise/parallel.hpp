#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace mirrornoise {

// Every kernel that loops over independent points takes one of these.
// Serial is the reference path; Parallel must produce identical results.
enum class Exec { Serial, Parallel };

// Worker count: MIRRORNOISE_THREADS if set and positive, else the OpenMP
// default. Read on every call so tests can vary it.
int thread_count();

// Runs body(i) for i in [0, n). Results must be written by index. If any
// iteration throws, the exception from the lowest index is rethrown, so
// error reporting does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mirrornoise
