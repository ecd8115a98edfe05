#include "kernels_impl.hpp"

#include <cmath>

namespace hsgd::kernels::detail {

double l1_distance_scalar(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::fabs(a[i] - b[i]);
  }
  return sum;
}

std::int64_t sum_i64_scalar(std::span<const std::int64_t> values) {
  std::int64_t sum = 0;
  for (auto v : values) {
    sum += v;
  }
  return sum;
}

void adjacent_difference_scalar(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i + 1 < in.size(); ++i) {
    out[i] = in[i + 1] - in[i];
  }
}

void refine_interval_mask_scalar(std::span<const double> xs, double lo, double hi,
                                 std::span<std::uint8_t> mask) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const bool inside = xs[i] >= lo && xs[i] < hi;
    mask[i] = static_cast<std::uint8_t>(mask[i] & (inside ? 1 : 0));
  }
}

}  // namespace hsgd::kernels::detail
