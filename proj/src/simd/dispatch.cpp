// Copyright 2026 The mipscreen Authors.
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

#include <atomic>

#include "mipscreen/error.hpp"
#include "mipscreen/simd/kernels.hpp"

namespace mipscreen::simd {

#ifndef MIPSCREEN_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#ifndef MIPSCREEN_HAVE_NEON
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(MIPSCREEN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &scalar_kernels();
    case Backend::kAvx2:
      return cpu_has_avx2() ? avx2_kernels() : nullptr;
    case Backend::kNeon:
      return neon_kernels();  // NEON is baseline on aarch64
  }
  return nullptr;
}

const KernelTable* pick_default() {
  if (const auto* t = table_for(Backend::kAvx2)) return t;
  if (const auto* t = table_for(Backend::kNeon)) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

bool backend_available(Backend backend) { return table_for(backend) != nullptr; }

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

Backend active_backend() { return kernels().backend; }

void set_backend(Backend backend) {
  const KernelTable* table = table_for(backend);
  if (table == nullptr) {
    throw InvalidArgument("kernel backend '" + std::string(backend_name(backend)) +
                          "' is not available on this host");
  }
  active().store(table, std::memory_order_release);
}

}  // namespace mipscreen::simd
