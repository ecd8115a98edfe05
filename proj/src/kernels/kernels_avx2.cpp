// Compiled with -mavx2; only reached after a runtime CPU check.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>

namespace hsgd::kernels::detail {

double l1_distance_avx2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, diff));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    sum += std::fabs(a[i] - b[i]);
  }
  return sum;
}

std::int64_t sum_i64_avx2(std::span<const std::int64_t> values) {
  const std::size_t n = values.size();
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_epi64(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values.data() + i)));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::int64_t sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    sum += values[i];
  }
  return sum;
}

void adjacent_difference_avx2(std::span<const double> in, std::span<double> out) {
  if (in.size() < 2) {
    return;
  }
  const std::size_t m = in.size() - 1;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d next = _mm256_loadu_pd(in.data() + i + 1);
    const __m256d cur = _mm256_loadu_pd(in.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_sub_pd(next, cur));
  }
  for (; i < m; ++i) {
    out[i] = in[i + 1] - in[i];
  }
}

void refine_interval_mask_avx2(std::span<const double> xs, double lo, double hi,
                               std::span<std::uint8_t> mask) {
  const std::size_t n = xs.size();
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xs.data() + i);
    const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(x, vlo, _CMP_GE_OQ), _mm256_cmp_pd(x, vhi, _CMP_LT_OQ));
    const int bits = _mm256_movemask_pd(inside);
    for (int lane = 0; lane < 4; ++lane) {
      mask[i + lane] = static_cast<std::uint8_t>(mask[i + lane] & ((bits >> lane) & 1));
    }
  }
  for (; i < n; ++i) {
    const bool inside = xs[i] >= lo && xs[i] < hi;
    mask[i] = static_cast<std::uint8_t>(mask[i] & (inside ? 1 : 0));
  }
}

}  // namespace hsgd::kernels::detail
