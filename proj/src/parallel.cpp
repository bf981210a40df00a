/*
 * Copyright 2026 The msfi-eval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "msfi/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace msfi {

namespace {
std::atomic<int> g_jobs{0};
}

int jobs() {
  const int n = g_jobs.load();
  return n > 0 ? n : omp_get_max_threads();
}

void set_jobs(int n) { g_jobs.store(n > 0 ? n : 0); }

}  // namespace msfi
