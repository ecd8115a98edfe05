#include "hsgd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace hsgd::kernels {

namespace {

const KernelTable kScalar{
    &detail::l1_distance_scalar,
    &detail::sum_i64_scalar,
    &detail::adjacent_difference_scalar,
    &detail::refine_interval_mask_scalar,
};

#if defined(HSGD_HAVE_AVX2)
const KernelTable kAvx2{
    &detail::l1_distance_avx2,
    &detail::sum_i64_avx2,
    &detail::adjacent_difference_avx2,
    &detail::refine_interval_mask_avx2,
};
#endif

bool cpu_has_avx2() {
#if defined(HSGD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("HSGD_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(HSGD_HAVE_AVX2)
  return cpu_has_avx2() ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

const KernelTable& active() {
  if (active_isa() == Isa::avx2) {
    if (const auto* table = avx2_table()) {
      return *table;
    }
  }
  return kScalar;
}

bool set_active(Isa isa) {
  if (isa == Isa::avx2 && avx2_table() == nullptr) {
    return false;
  }
  current().store(isa, std::memory_order_relaxed);
  return true;
}

}  // namespace hsgd::kernels
