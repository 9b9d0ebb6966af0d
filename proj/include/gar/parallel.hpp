#pragma once

#include <atomic>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gar::par {

namespace detail {
inline std::atomic<int>& jobs_slot() {
  static std::atomic<int> jobs{0};  // 0 = hardware default
  return jobs;
}
}  // namespace detail

inline void set_max_jobs(int jobs) { detail::jobs_slot().store(jobs); }
inline int max_jobs() { return detail::jobs_slot().load(); }

inline int effective_jobs() {
  int jobs = max_jobs();
#ifdef _OPENMP
  if (jobs <= 0) jobs = omp_get_max_threads();
#else
  if (jobs <= 0) jobs = 1;
#endif
  return jobs;
}

// Serial reference path. parallel_for must produce identical results for
// any jobs count; tests compare the two.
template <typename F>
void serial_for(std::ptrdiff_t n, F&& f) {
  for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
}

// OpenMP kernel over independent iterations. f(i) may only write to
// per-index slots of shared outputs and must not throw (catch inside).
template <typename F>
void parallel_for(std::ptrdiff_t n, F&& f) {
#ifdef _OPENMP
  const int jobs = effective_jobs();
  if (jobs > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
    return;
  }
#endif
  serial_for(n, f);
}

}  // namespace gar::par
