#include "rtxc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

namespace rtxc::sampling {

namespace {

constexpr double kGoldenFraction = 0.6180339887498948482;  // (sqrt(5)-1)/2

double frac(double x) { return x - std::floor(x); }

// Variable-density template over t in [-1, 1] (t = distance from the k-space
// center in units of ny/2). alpha is the center:edge density ratio and s the
// falloff exponent. Normalized so the mean over [-1, 1] is 1; the edge floor
// keeps the warped inter-line spacing below twice the mean spacing, which is
// what bounds intra-frame jumps.
struct DensityTemplate {
  double alpha, s, norm;

  DensityTemplate(double alpha_, double s_) : alpha(alpha_), s(s_) {
    norm = 1.0 + (alpha - 1.0) / (s + 1.0);  // integral of 1+(alpha-1)(1-|t|)^s over a half
  }

  double rho(double t) const {
    const double a = std::min(std::abs(t), 1.0);
    return (1.0 + (alpha - 1.0) * std::pow(1.0 - a, s)) / norm;
  }

  // CDF over [-1, 1] mapped to [0, 1]
  double cdf(double t) const {
    const double a = std::abs(std::clamp(t, -1.0, 1.0));
    const double half =
        0.5 * (a + (alpha - 1.0) / (s + 1.0) * (1.0 - std::pow(1.0 - a, s + 1.0))) / norm;
    return t >= 0.0 ? 0.5 + half : 0.5 - half;
  }

  // inverse CDF by bisection (smooth monotone, 60 iterations ~ 1e-18)
  double quantile(double u) const {
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

// Map a warped coordinate t in [-1, 1] to a line index in [0, ny).
int to_line(double t, int ny) {
  const int k = static_cast<int>(std::lround((t + 1.0) * 0.5 * (ny - 1)));
  return std::clamp(k, 0, ny - 1);
}

// Make a non-decreasing line list strictly increasing without leaving
// [0, ny). Collisions are pushed upward; the cap pass keeps the tail inside
// the grid (requires lines.size() <= ny).
void dedupe_monotone(std::vector<int>& lines, int ny) {
  const int n = static_cast<int>(lines.size());
  for (int i = 1; i < n; ++i) lines[i] = std::max(lines[i], lines[i - 1] + 1);
  for (int i = n - 1; i >= 0; --i) lines[i] = std::min(lines[i], ny - n + i);
  for (int i = 1; i < n; ++i) lines[i] = std::max(lines[i], lines[i - 1] + 1);
}

// Insert the central line into a strictly increasing list. If the center is
// already sampled, spend the spare line on the nearest free neighbor of the
// center, keeping the per-frame line count fixed and the calibration region
// dense; splitting a central gap can only improve the jump bound.
void insert_center(std::vector<int>& lines, int center, int ny) {
  int extra = center;
  if (std::binary_search(lines.begin(), lines.end(), center)) {
    extra = -1;
    for (int d = 1; d < ny && extra < 0; ++d) {
      if (center - d >= 0 && !std::binary_search(lines.begin(), lines.end(), center - d))
        extra = center - d;
      else if (center + d < ny && !std::binary_search(lines.begin(), lines.end(), center + d))
        extra = center + d;
    }
    if (extra < 0) return;  // fully sampled frame
  }
  lines.insert(std::upper_bound(lines.begin(), lines.end(), extra), extra);
}

}  // namespace

double SamplingPattern::realized_r() const {
  double total = 0.0;
  for (const auto& f : lines) total += static_cast<double>(f.size());
  if (total == 0.0) return 0.0;
  return static_cast<double>(ny) * static_cast<double>(frames) / total;
}

bool SamplingPattern::frame_has_line(int frame, int line) const {
  const auto& f = lines.at(frame);
  return std::find(f.begin(), f.end(), line) != f.end();
}

std::vector<uint8_t> SamplingPattern::mask_matrix() const {
  std::vector<uint8_t> m(static_cast<size_t>(frames) * ny, 0);
  for (int f = 0; f < frames; ++f)
    for (int k : lines[f]) m[static_cast<size_t>(f) * ny + k] = 1;
  return m;
}

std::vector<int> SamplingPattern::line_counts() const {
  std::vector<int> counts(ny, 0);
  for (const auto& f : lines)
    for (int k : f) ++counts[k];
  return counts;
}

void SamplingPattern::validate(bool require_center) const {
  if (ny <= 0 || frames <= 0 || static_cast<int>(lines.size()) != frames)
    throw std::invalid_argument("SamplingPattern: inconsistent dimensions");
  for (int f = 0; f < frames; ++f) {
    std::vector<int> sorted(lines[f]);
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= ny))
      throw std::invalid_argument("SamplingPattern: line index out of range");
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("SamplingPattern: duplicate line within frame " +
                                  std::to_string(f));
    if (require_center && !std::binary_search(sorted.begin(), sorted.end(), center_line()))
      throw std::invalid_argument("SamplingPattern: frame " + std::to_string(f) +
                                  " misses the central line");
  }
}

SamplingPattern gro_generate(int ny, int lines_per_frame, int frames, double s, double alpha) {
  if (lines_per_frame < 4)
    throw std::invalid_argument("gro_generate: need at least 4 lines per frame");
  if (lines_per_frame > ny)
    throw std::invalid_argument("gro_generate: lines_per_frame exceeds ny");
  if (frames < 1) throw std::invalid_argument("gro_generate: frames must be >= 1");

  const DensityTemplate density(alpha, s);
  const int n = lines_per_frame;

  SamplingPattern p;
  p.ny = ny;
  p.frames = frames;
  p.lines_per_frame = n;
  p.nominal_r = static_cast<double>(ny) / n;
  p.density_exponent = s;
  p.center_weight = alpha;
  p.lines.resize(frames);

  // n-1 stratified samples of the warped template slide with the golden
  // offset (covering every line over a handful of frames); the n-th line is
  // always the k-space center.
  const int comb = n - 1;
  for (int f = 0; f < frames; ++f) {
    const double offset = frac(static_cast<double>(f) * kGoldenFraction);
    std::vector<int>& lines = p.lines[f];
    lines.resize(comb);
    for (int i = 0; i < comb; ++i) {
      const double u = (static_cast<double>(i) + offset) / static_cast<double>(comb);
      lines[i] = to_line(density.quantile(u), ny);
    }
    dedupe_monotone(lines, ny);
    insert_center(lines, p.center_line(), ny);
  }
  return p;
}

ReadoutOrder cava_generate(int ny, long total_readouts, double s) {
  if (total_readouts < ny)
    throw std::invalid_argument("cava_generate: need at least ny readouts");

  // Mild variable density: the aggregate per-line budget must stay close to
  // uniform (retrospective binning at any frame length has to land near the
  // nominal rate), so the center weighting is fixed and only the falloff
  // shape follows s.
  const double kCenterWeight = 1.15;
  const DensityTemplate density(kCenterWeight, s);
  const long n = total_readouts;
  const int center = ny / 2;

  // Per-line visit budget: largest-remainder apportionment of the density
  // mass, then the count multiset is re-dealt outward from the center so the
  // aggregate density is exactly non-increasing in |k - center|.
  std::vector<double> mass(ny);
  double total_mass = 0.0;
  for (int k = 0; k < ny; ++k) {
    const double t = (2.0 * k - (ny - 1)) / static_cast<double>(ny - 1);
    mass[k] = density.rho(t);
    total_mass += mass[k];
  }
  std::vector<long> counts(ny);
  std::vector<std::pair<double, int>> remainders(ny);
  long assigned = 0;
  for (int k = 0; k < ny; ++k) {
    const double exact = static_cast<double>(n) * mass[k] / total_mass;
    counts[k] = static_cast<long>(std::floor(exact));
    assigned += counts[k];
    remainders[k] = {exact - std::floor(exact), k};
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (long i = 0; i < n - assigned; ++i) ++counts[remainders[i].second];

  std::vector<int> by_distance(ny);
  for (int k = 0; k < ny; ++k) by_distance[k] = k;
  std::sort(by_distance.begin(), by_distance.end(), [&](int a, int b) {
    const int da = std::abs(a - center), db = std::abs(b - center);
    return da != db ? da < db : a < b;
  });
  std::vector<long> sorted_counts(counts);
  std::sort(sorted_counts.begin(), sorted_counts.end(), std::greater<>());
  for (int i = 0; i < ny; ++i) counts[by_distance[i]] = sorted_counts[i];

  // Golden-phased rate-proportional scheduling: line k is visited at the
  // fluid times (m + frac(k*phi)) / counts[k], m = 0..counts[k)-1, served
  // earliest-deadline-first. Every line's visits are evenly spaced at its own
  // rate, so any contiguous readout block is itself a valid variable-density
  // pattern and block line-diversity stays near the maximum.
  struct Visit {
    double time;
    int line;
    bool operator>(const Visit& other) const {
      return time != other.time ? time > other.time : line > other.line;
    }
  };
  std::priority_queue<Visit, std::vector<Visit>, std::greater<>> queue;
  std::vector<long> served(ny, 0);
  for (int k = 0; k < ny; ++k)
    if (counts[k] > 0)
      queue.push({frac(static_cast<double>(k) * kGoldenFraction) / counts[k], k});

  ReadoutOrder order;
  order.ny = ny;
  order.density_exponent = s;
  order.center_weight = kCenterWeight;
  order.order.reserve(n);
  while (!queue.empty()) {
    const Visit v = queue.top();
    queue.pop();
    order.order.push_back(v.line);
    if (++served[v.line] < counts[v.line])
      queue.push({(static_cast<double>(served[v.line]) +
                   frac(static_cast<double>(v.line) * kGoldenFraction)) /
                      counts[v.line],
                  v.line});
  }
  return order;
}

SamplingPattern cava_rebin(const ReadoutOrder& order, int lines_per_frame) {
  if (lines_per_frame <= 0 || static_cast<size_t>(lines_per_frame) > order.order.size())
    throw std::invalid_argument("cava_rebin: invalid lines_per_frame");

  SamplingPattern p;
  p.ny = order.ny;
  p.lines_per_frame = lines_per_frame;
  p.frames = static_cast<int>(order.order.size() / lines_per_frame);
  p.nominal_r = static_cast<double>(order.ny) / lines_per_frame;
  p.density_exponent = order.density_exponent;
  p.center_weight = order.center_weight;
  p.lines.resize(p.frames);

  for (int f = 0; f < p.frames; ++f) {
    auto begin = order.order.begin() + static_cast<long>(f) * lines_per_frame;
    std::vector<int> chunk(begin, begin + lines_per_frame);
    std::sort(chunk.begin(), chunk.end());
    chunk.erase(std::unique(chunk.begin(), chunk.end()), chunk.end());
    p.dropped_duplicates += lines_per_frame - static_cast<int>(chunk.size());
    p.lines[f] = std::move(chunk);
  }
  return p;
}

PatternStats pattern_stats(const SamplingPattern& pattern, double tr_ms) {
  PatternStats st;
  st.realized_r = pattern.realized_r();
  st.temporal_resolution_ms = tr_ms * pattern.lines_per_frame;
  int center_hits = 0;
  for (int f = 0; f < pattern.frames; ++f) {
    const auto& lines = pattern.lines[f];
    for (size_t i = 1; i < lines.size(); ++i)
      st.max_intraframe_jump = std::max(st.max_intraframe_jump, std::abs(lines[i] - lines[i - 1]));
    if (pattern.frame_has_line(f, pattern.center_line())) ++center_hits;
  }
  st.center_hit_rate = static_cast<double>(center_hits) / pattern.frames;
  return st;
}

int gro_jump_bound(int ny, int lines_per_frame) {
  return static_cast<int>(std::ceil(2.0 * ny / lines_per_frame));
}

}  // namespace rtxc::sampling
