#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsgd/classifier.hpp"
#include "hsgd/error.hpp"
#include "hsgd/kernels.hpp"

namespace hsgd {

namespace {

int deadband_sign(double v, double tolerance) {
  if (v > tolerance) return 1;
  if (v < -tolerance) return -1;
  return 0;
}

// Index of the sample at which each sign change of `signs` takes effect.
// Zero entries are flat and skipped; `offset` maps entry i to its sample.
std::vector<std::size_t> sign_changes(const std::vector<int>& signs, std::size_t offset, bool at_previous) {
  std::vector<std::size_t> out;
  int last = 0;
  std::size_t last_index = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 0) {
      continue;
    }
    if (last != 0 && signs[i] != last) {
      out.push_back((at_previous ? last_index : i) + offset);
    }
    last = signs[i];
    last_index = i;
  }
  return out;
}

}  // namespace

std::string_view to_string(Trend trend) {
  switch (trend) {
    case Trend::monotone_increasing: return "monotone-increasing";
    case Trend::monotone_decreasing: return "monotone-decreasing";
    case Trend::non_monotone: return "non-monotone";
    case Trend::constant: return "constant";
  }
  return "unknown";
}

DynamicsProfile recognize_dynamics(std::span<const double> series, double tolerance) {
  if (series.size() < 3) {
    throw Error(ErrorCode::series_too_short, "need at least 3 samples, got " + std::to_string(series.size()));
  }
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::precondition_violated, "tolerance must be nonnegative");
  }
  DynamicsProfile profile;
  const std::size_t n = series.size();

  std::vector<double> first(n - 1);
  kernels::adjacent_difference(series, first);
  std::vector<double> second(n - 2);
  kernels::adjacent_difference(first, second);

  std::vector<int> s1(first.size());
  std::transform(first.begin(), first.end(), s1.begin(), [&](double v) { return deadband_sign(v, tolerance); });
  std::vector<int> s2(second.size());
  std::transform(second.begin(), second.end(), s2.begin(), [&](double v) { return deadband_sign(v, tolerance); });

  const bool rises = std::find(s1.begin(), s1.end(), 1) != s1.end();
  const bool falls = std::find(s1.begin(), s1.end(), -1) != s1.end();
  if (rises && falls) {
    profile.trend = Trend::non_monotone;
  } else if (rises) {
    profile.trend = Trend::monotone_increasing;
  } else if (falls) {
    profile.trend = Trend::monotone_decreasing;
  } else {
    profile.trend = Trend::constant;
  }

  // first[i] spans samples i..i+1: the extremum is the sample closing the
  // last run before the sign flips.
  profile.critical_points = sign_changes(s1, 1, true);
  // second[i] is centred on sample i+1: the inflexion is the first sample
  // whose curvature has the new sign.
  profile.inflexions = sign_changes(s2, 1, false);

  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  profile.min_value = *lo;
  profile.max_value = *hi;

  // Mean crossings: a sample within tolerance of the mean counts as a
  // crossing (runs of such samples count once); a strict sign flip between
  // neighbours counts at their midpoint.
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> crossings;
  int prev_sign = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const int sign = deadband_sign(series[i] - mean, tolerance);
    if (sign == 0) {
      if (prev_sign != 0) {
        crossings.push_back(static_cast<double>(i));
      }
    } else if (prev_sign != 2 && prev_sign != 0 && prev_sign != sign) {
      crossings.push_back(static_cast<double>(i) - 0.5);
    }
    prev_sign = sign;
  }
  profile.mean_crossings = crossings.size();
  if (crossings.size() >= 4) {
    double min_gap = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    for (std::size_t i = 1; i < crossings.size(); ++i) {
      const double gap = crossings[i] - crossings[i - 1];
      min_gap = std::min(min_gap, gap);
      max_gap = std::max(max_gap, gap);
    }
    if (max_gap <= 2.0 * min_gap) {
      profile.cyclic = true;
      profile.period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    }
  }
  return profile;
}

}  // namespace hsgd
