#pragma once

#include <cstdint>
#include <span>

namespace hsgd::kernels::detail {

double l1_distance_scalar(std::span<const double> a, std::span<const double> b);
std::int64_t sum_i64_scalar(std::span<const std::int64_t> values);
void adjacent_difference_scalar(std::span<const double> in, std::span<double> out);
void refine_interval_mask_scalar(std::span<const double> xs, double lo, double hi,
                                 std::span<std::uint8_t> mask);

#if defined(HSGD_HAVE_AVX2)
double l1_distance_avx2(std::span<const double> a, std::span<const double> b);
std::int64_t sum_i64_avx2(std::span<const std::int64_t> values);
void adjacent_difference_avx2(std::span<const double> in, std::span<double> out);
void refine_interval_mask_avx2(std::span<const double> xs, double lo, double hi,
                               std::span<std::uint8_t> mask);
#endif

}  // namespace hsgd::kernels::detail
