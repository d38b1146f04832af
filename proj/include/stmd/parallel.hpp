// Copyright 2026 The STMD Tracker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stmd {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

/// Runs f(i) for i in [0, n). Iterations must be independent.
template <class F>
void parallel_for(std::int64_t n, F&& f, int threads = 0) {
#ifdef _OPENMP
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1 && n > 1)
  for (std::int64_t i = 0; i < n; ++i) f(i);
#else
  (void)threads;
  for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

/// Dynamic schedule for uneven work items (whole sequences, whole samples).
template <class F>
void parallel_for_dynamic(std::int64_t n, F&& f, int threads = 0) {
#ifdef _OPENMP
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt) if (nt > 1 && n > 1)
  for (std::int64_t i = 0; i < n; ++i) f(i);
#else
  (void)threads;
  for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

}  // namespace stmd
