#include "rtxc/physio.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtxc/detail/stats.hpp"
#include "rtxc/fft.hpp"

namespace rtxc::physio {

namespace {

constexpr double kRespBandLo = 0.05, kRespBandHi = 0.7;  // Hz
constexpr double kCardiacBandHi = 3.5;
constexpr int kComponents = 6;
constexpr int kSpatialDownsample = 4;
constexpr double kMinRespBandFraction = 0.40;
constexpr double kEePercentile = 80.0;
constexpr double kEeSlopeFactor = 0.2;
constexpr int kMinEeWindow = 3;
constexpr double kEeBeatOverlap = 0.8;

std::vector<double> periodogram(const std::vector<double>& signal) {
  std::vector<cplx> buf(signal.size());
  for (size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
  fft::forward1(buf);
  std::vector<double> power(signal.size() / 2 + 1);
  for (size_t i = 0; i < power.size(); ++i) power[i] = std::norm(buf[i]);
  return power;
}

double band_energy(const std::vector<double>& power, double fps, int n, double lo, double hi) {
  double s = 0.0;
  for (size_t k = 1; k < power.size(); ++k) {
    const double f = fps * static_cast<double>(k) / n;
    if (f > lo && f <= hi) s += power[k];
  }
  return s;
}

double peak_frequency(const std::vector<double>& power, double fps, int n, double lo, double hi) {
  double best = -1.0;
  size_t best_k = 0;
  for (size_t k = 1; k < power.size(); ++k) {
    const double f = fps * static_cast<double>(k) / n;
    if (f > lo && f <= hi && power[k] > best) {
      best = power[k];
      best_k = k;
    }
  }
  return fps * static_cast<double>(best_k) / n;
}

// Keep only spectral content with lo < f <= hi (plus the conjugate side).
std::vector<double> bandlimit(const std::vector<double>& signal, double fps, double lo,
                              double hi) {
  const int n = static_cast<int>(signal.size());
  std::vector<cplx> buf(n);
  for (int i = 0; i < n; ++i) buf[i] = signal[i];
  fft::forward1(buf);
  for (int k = 1; k < n; ++k) {
    const double f = fps * std::min(k, n - k) / n;
    if (f <= lo || f > hi) buf[k] = cplx(0.0, 0.0);
  }
  buf[0] = cplx(0.0, 0.0);
  fft::inverse1(buf);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

// Edge-preserving cardiac-ripple removal: a running median over one cardiac
// period flattens the expiratory plateau without the rise-time penalty a
// band-limit would impose (the plateau shoulders live above the cardiac
// fundamental). Window shrinks symmetrically at the borders.
std::vector<double> running_median(const std::vector<double>& signal, int window) {
  const int n = static_cast<int>(signal.size());
  window = std::min(window | 1, n | 1);
  const int half = window / 2;
  std::vector<double> out(n), scratch;
  for (int i = 0; i < n; ++i) {
    const int r = std::min({half, i, n - 1 - i});
    scratch.assign(signal.begin() + (i - r), signal.begin() + (i + r + 1));
    out[i] = detail::median_inplace(scratch);
  }
  return out;
}

// Orient so that the longer-dwell extremum is positive: mass concentrated
// above the mean (median > mean) marks the quiescent plateau.
void orient_by_dwell(std::vector<double>& s) {
  const double mean = detail::mean(s);
  const double median = detail::median(s);
  if (median < mean - 1e-12)
    for (auto& v : s) v = -v;
}

void normalize_variance(std::vector<double>& s) {
  const double mean = detail::mean(s);
  for (auto& v : s) v -= mean;
  const double sd = std::sqrt(detail::variance(s));
  if (sd > 0.0)
    for (auto& v : s) v /= sd;
}

}  // namespace

PhysioSignals extract_physio(const ImageSeries& images, double fps, double age_years) {
  const int frames = images.frames;
  require(frames >= 8, "extract_physio: too few frames");
  require(fps > 0.0, "extract_physio: fps must be positive");

  // coarse magnitude frames are plenty for motion surrogates
  const int ny_d = images.ny / kSpatialDownsample;
  const int nx_d = images.nx / kSpatialDownsample;
  require(ny_d >= 2 && nx_d >= 2, "extract_physio: image too small");

  Eigen::MatrixXd m(frames, static_cast<Eigen::Index>(ny_d) * nx_d);
  for (int f = 0; f < frames; ++f) {
    for (int y = 0; y < ny_d; ++y)
      for (int x = 0; x < nx_d; ++x) {
        double block = 0.0;
        for (int i = 0; i < kSpatialDownsample; ++i)
          for (int j = 0; j < kSpatialDownsample; ++j)
            block += std::abs(images.at(f, y * kSpatialDownsample + i, x * kSpatialDownsample + j));
        m(f, static_cast<Eigen::Index>(y) * nx_d + x) = block;
      }
  }
  m.rowwise() -= m.colwise().mean();

  Eigen::MatrixXd gram = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);

  const int ncomp = std::min(kComponents, frames - 1);
  struct Candidate {
    std::vector<double> signal;
    std::vector<double> power;
    double resp_energy = 0.0, resp_fraction = 0.0, cardiac_energy = 0.0;
  };
  std::vector<Candidate> comps(ncomp);
  for (int j = 0; j < ncomp; ++j) {
    const double scale = std::sqrt(std::max(eig.eigenvalues()(frames - 1 - j), 0.0));
    Candidate& c = comps[j];
    c.signal.resize(frames);
    for (int f = 0; f < frames; ++f) c.signal[f] = scale * eig.eigenvectors()(f, frames - 1 - j);
    c.power = periodogram(c.signal);
    double total = 0.0;
    for (size_t k = 1; k < c.power.size(); ++k) total += c.power[k];
    c.resp_energy = band_energy(c.power, fps, frames, kRespBandLo, kRespBandHi);
    c.cardiac_energy = band_energy(c.power, fps, frames, kRespBandHi, kCardiacBandHi);
    c.resp_fraction = total > 0.0 ? c.resp_energy / total : 0.0;
  }

  int resp_idx = -1;
  for (int j = 0; j < ncomp; ++j) {
    if (comps[j].resp_fraction < kMinRespBandFraction) continue;
    if (resp_idx < 0 || comps[j].resp_energy > comps[resp_idx].resp_energy) resp_idx = j;
  }
  if (resp_idx < 0)
    throw std::runtime_error(
        "extract_physio: no principal component concentrates 40% of its energy in the "
        "respiratory band; signal too corrupted");

  int cardiac_idx = -1;
  for (int j = 0; j < ncomp; ++j) {
    if (j == resp_idx) continue;
    if (cardiac_idx < 0 || comps[j].cardiac_energy > comps[cardiac_idx].cardiac_energy)
      cardiac_idx = j;
  }
  require(cardiac_idx >= 0, "extract_physio: no cardiac component found");

  PhysioSignals out;
  out.fps = fps;
  out.resp_freq_hz = peak_frequency(comps[resp_idx].power, fps, frames, kRespBandLo, kRespBandHi);
  out.cardiac_freq_hz =
      peak_frequency(comps[cardiac_idx].power, fps, frames, kRespBandHi, kCardiacBandHi);

  const int cardiac_period = std::max(3, static_cast<int>(std::lround(fps / out.cardiac_freq_hz)));
  out.resp = running_median(comps[resp_idx].signal, cardiac_period);
  out.cardiac = bandlimit(comps[cardiac_idx].signal, fps, kRespBandHi, kCardiacBandHi);
  out.hr_bpm = 60.0 * out.cardiac_freq_hz;
  out.aphr_percent = 100.0 * out.hr_bpm / (220.0 - age_years);

  normalize_variance(out.resp);
  normalize_variance(out.cardiac);
  orient_by_dwell(out.resp);
  orient_by_dwell(out.cardiac);
  return out;
}

std::vector<std::pair<int, int>> detect_end_expiration(const std::vector<double>& resp) {
  const int n = static_cast<int>(resp.size());
  if (n < kMinEeWindow) return {};

  const double threshold = detail::percentile(resp, kEePercentile);
  std::vector<double> slope(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(i - 1, 0), hi = std::min(i + 1, n - 1);
    slope[i] = (resp[hi] - resp[lo]) / std::max(hi - lo, 1);
  }
  double rms = 0.0;
  for (double s : slope) rms += s * s;
  rms = std::sqrt(rms / n);

  std::vector<std::pair<int, int>> windows;
  int start = -1;
  for (int i = 0; i <= n; ++i) {
    const bool ee = i < n && resp[i] >= threshold && std::abs(slope[i]) <= kEeSlopeFactor * rms;
    if (ee && start < 0) start = i;
    if (!ee && start >= 0) {
      if (i - start >= kMinEeWindow) windows.emplace_back(start, i);
      start = -1;
    }
  }
  return windows;
}

BeatSelection select_beats(const PhysioSignals& signals,
                           const std::vector<std::pair<int, int>>& ee_windows,
                           AnalysisMode mode) {
  const std::vector<double>& c = signals.cardiac;
  const int n = static_cast<int>(c.size());
  require(signals.cardiac_freq_hz > 0.0, "select_beats: cardiac frequency unknown");

  const double period = signals.fps / signals.cardiac_freq_hz;
  const int min_sep = std::max(2, static_cast<int>(0.6 * period));
  std::vector<int> peaks;
  for (int i = 1; i + 1 < n; ++i) {
    if (c[i] >= c[i - 1] && c[i] > c[i + 1] && c[i] > 0.0) {
      if (!peaks.empty() && i - peaks.back() < min_sep) {
        if (c[i] > c[peaks.back()]) peaks.back() = i;
      } else {
        peaks.push_back(i);
      }
    }
  }
  if (peaks.size() < 2)
    throw std::runtime_error("select_beats: fewer than one full beat in the series; "
                             "acquire a longer series");

  std::vector<uint8_t> in_ee(n, 0);
  for (const auto& [b, e] : ee_windows)
    for (int i = b; i < e && i < n; ++i) in_ee[i] = 1;

  BeatSelection sel;
  for (size_t p = 0; p + 1 < peaks.size(); ++p) {
    Beat beat;
    beat.begin = peaks[p];
    beat.end = peaks[p + 1];
    int covered = 0;
    for (int i = beat.begin; i < beat.end; ++i) covered += in_ee[i];
    beat.ee_overlap = static_cast<double>(covered) / (beat.end - beat.begin);
    beat.ee = beat.ee_overlap >= kEeBeatOverlap;
    sel.beats.push_back(beat);
  }

  if (mode == AnalysisMode::ap) {
    sel.chosen = 0;
    sel.chosen_is_ee = sel.beats[0].ee;
    return sel;
  }
  for (size_t b = 0; b < sel.beats.size(); ++b) {
    if (sel.beats[b].ee_overlap >= 1.0) {
      sel.chosen = static_cast<int>(b);
      sel.chosen_is_ee = true;
      return sel;
    }
  }
  // no fully end-expiratory beat: fall back to maximal overlap, labeled AP
  int best = 0;
  for (size_t b = 1; b < sel.beats.size(); ++b)
    if (sel.beats[b].ee_overlap > sel.beats[best].ee_overlap) best = static_cast<int>(b);
  sel.chosen = best;
  sel.chosen_is_ee = false;
  return sel;
}

std::vector<OverlayRecord> export_signal_overlay(const ImageSeries& images,
                                                 const PhysioSignals& signals) {
  require(static_cast<int>(signals.resp.size()) == images.frames,
          "export_signal_overlay: signal/series length mismatch");
  const double lo = *std::min_element(signals.resp.begin(), signals.resp.end());
  const double hi = *std::max_element(signals.resp.begin(), signals.resp.end());
  const double span = hi - lo;
  constexpr int kTraceHeight = 16;

  std::vector<OverlayRecord> records(images.frames);
  for (int f = 0; f < images.frames; ++f) {
    OverlayRecord& r = records[f];
    r.frame = f;
    r.resp = signals.resp[f];
    const double norm = span > 0.0 ? (signals.resp[f] - lo) / span : 0.0;
    r.row = images.ny - 3 - static_cast<int>(std::lround(norm * kTraceHeight));
    r.col = images.frames > 1
                ? static_cast<int>(std::lround(static_cast<double>(f) * (images.nx - 1) /
                                               (images.frames - 1)))
                : 0;
  }
  return records;
}

}  // namespace rtxc::physio
