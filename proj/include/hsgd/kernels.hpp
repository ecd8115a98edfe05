#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2 version; the active table is picked once at startup from
// the CPU features and can be pinned with HSGD_SIMD=scalar.

#include <cstdint>
#include <span>
#include <string_view>

namespace hsgd::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  // Σ |a[i] - b[i]|
  double (*l1_distance)(std::span<const double> a, std::span<const double> b);
  // Σ values[i]
  std::int64_t (*sum_i64)(std::span<const std::int64_t> values);
  // out[i] = in[i + 1] - in[i]; out.size() == in.size() - 1
  void (*adjacent_difference)(std::span<const double> in, std::span<double> out);
  // mask[i] &= (lo <= xs[i] && xs[i] < hi); NaN never matches.
  void (*refine_interval_mask)(std::span<const double> xs, double lo, double hi,
                               std::span<std::uint8_t> mask);
};

const KernelTable& scalar_table();
// Null when the build or the CPU lacks AVX2.
const KernelTable* avx2_table();

Isa active_isa();
const KernelTable& active();
// Forces a table; returns false if the ISA is unavailable. For tests and
// benchmarking.
bool set_active(Isa isa);

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  return active().l1_distance(a, b);
}
inline std::int64_t sum_i64(std::span<const std::int64_t> values) {
  return active().sum_i64(values);
}
inline void adjacent_difference(std::span<const double> in, std::span<double> out) {
  active().adjacent_difference(in, out);
}
inline void refine_interval_mask(std::span<const double> xs, double lo, double hi,
                                 std::span<std::uint8_t> mask) {
  active().refine_interval_mask(xs, lo, hi, mask);
}

}  // namespace hsgd::kernels
