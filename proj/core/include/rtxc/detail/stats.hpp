#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rtxc::detail {

// median by nth_element; scratch is modified
inline double median_inplace(std::vector<double>& scratch) {
  if (scratch.empty()) throw std::invalid_argument("median of empty range");
  const size_t n = scratch.size();
  auto mid = scratch.begin() + n / 2;
  std::nth_element(scratch.begin(), mid, scratch.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(scratch.begin(), mid);
  return 0.5 * (lo + hi);
}

inline double median(std::vector<double> values) { return median_inplace(values); }

// median absolute deviation from the median
inline double mad(const std::vector<double>& values) {
  std::vector<double> scratch(values);
  const double m = median_inplace(scratch);
  for (auto& v : scratch) v = std::abs(v - m);
  return median_inplace(scratch);
}

// linear-interpolated percentile, p in [0, 100]
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty range");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// population (1/n) covariance
inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size());
}

inline double variance(const std::vector<double>& a) { return covariance(a, a); }

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double va = variance(a), vb = variance(b);
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return covariance(a, b) / std::sqrt(va * vb);
}

}  // namespace rtxc::detail
