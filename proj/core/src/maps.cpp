#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtxc/detail/stats.hpp"
#include "rtxc/fft.hpp"
#include "rtxc/recon.hpp"

namespace rtxc::recon {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kBodyMaskFraction = 0.12;

// Tukey window over the central `width` samples of an n-point axis: flat
// inner half, cosine taper outside (keeps the low-resolution maps sharp
// without strong ringing)
double calib_window(int k, int n, int width) {
  const int center = n / 2;
  const double d = std::abs(k - center);
  const double half = width / 2.0;
  if (d > half) return 0.0;
  if (d <= 0.7 * half) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (d - 0.7 * half) / (0.3 * half)));
}
}  // namespace

CoilMaps estimate_sensitivities(const KSpaceSeries& kspace, int calib_width,
                                int frames_to_average) {
  const int ny = kspace.ny, nx = kspace.nx, coils = kspace.coils;
  require(calib_width >= 4 && calib_width <= ny, "estimate_sensitivities: bad calib width");
  const int navg = frames_to_average < 0
                       ? kspace.frames
                       : std::min(frames_to_average, kspace.frames);
  require(navg >= 1, "estimate_sensitivities: need at least one frame");

  // time-average the acquired samples, per line
  std::vector<int> counts(ny, 0);
  for (int f = 0; f < navg; ++f)
    for (int ky : kspace.pattern.lines[f]) ++counts[ky];

  const int center = ny / 2;
  const int lo = center - calib_width / 2;
  int covered = 0;
  for (int k = lo; k < lo + calib_width; ++k)
    if (k >= 0 && k < ny && counts[k] > 0) ++covered;
  if (covered < 0.9 * calib_width)
    throw std::runtime_error(
        "estimate_sensitivities: time average covers only " + std::to_string(covered) + "/" +
        std::to_string(calib_width) +
        " central lines; average over more frames or reduce the calibration width");

  const size_t plane = static_cast<size_t>(ny) * nx;
  std::vector<cplx> avg(plane * coils, cplx(0.0, 0.0));
  for (int f = 0; f < navg; ++f)
    for (int c = 0; c < coils; ++c) {
      const cplx* src = kspace.plane(f, c);
      cplx* dst = avg.data() + c * plane;
      for (int ky : kspace.pattern.lines[f]) {
        const size_t off = static_cast<size_t>(ky) * nx;
        for (int kx = 0; kx < nx; ++kx) dst[off + kx] += src[off + kx];
      }
    }

  // low-resolution coil images from the apodized calibration region
  CoilMaps maps(1, coils, ny, nx);
  std::vector<cplx> calib(plane), lowres(plane);
  std::vector<double> rss(plane, 0.0);
  for (int c = 0; c < coils; ++c) {
    const cplx* src = avg.data() + c * plane;
    for (int ky = 0; ky < ny; ++ky) {
      const double wy = calib_window(ky, ny, calib_width) /
                        std::max(counts[ky], 1);
      for (int kx = 0; kx < nx; ++kx)
        calib[static_cast<size_t>(ky) * nx + kx] =
            src[static_cast<size_t>(ky) * nx + kx] * wy * calib_window(kx, nx, calib_width);
    }
    fft::inverse2(calib.data(), lowres.data(), ny, nx);
    std::copy(lowres.begin(), lowres.end(), maps.map(0, c));
    for (size_t i = 0; i < plane; ++i) rss[i] += std::norm(lowres[i]);
  }
  for (auto& r : rss) r = std::sqrt(r);
  const double cutoff = kBodyMaskFraction * *std::max_element(rss.begin(), rss.end());

  for (int c = 0; c < coils; ++c) {
    cplx* m = maps.map(0, c);
    for (size_t i = 0; i < plane; ++i) m[i] = rss[i] >= cutoff ? m[i] / rss[i] : cplx(0.0, 0.0);
  }
  return maps;
}

std::pair<CoilWeights, KSpaceSeries> coil_reweight(const KSpaceSeries& kspace) {
  require(kspace.frames >= 16, "coil_reweight: need at least 16 frames of support");
  const int center = kspace.pattern.center_line();
  const int nx = kspace.nx;

  std::vector<int> center_frames;
  for (int f = 0; f < kspace.frames; ++f)
    if (kspace.pattern.frame_has_line(f, center)) center_frames.push_back(f);
  require(static_cast<int>(center_frames.size()) >= 16,
          "coil_reweight: central line acquired in fewer than 16 frames");
  const int nt = static_cast<int>(center_frames.size());

  // Projected sensitivity profiles: the inverse FFT of the central line gives
  // the y-projected coil-weighted image. Its RSS-normalized magnitude is
  // constant in time for a static coil no matter how the anatomy moves, and
  // fluctuates only when the coil's own sensitivity moves.
  std::vector<double> profiles(static_cast<size_t>(nt) * kspace.coils * nx);
  std::vector<double> raw_rss(static_cast<size_t>(nt) * nx);
  std::vector<cplx> line(nx);
  for (int i = 0; i < nt; ++i) {
    for (int c = 0; c < kspace.coils; ++c) {
      const cplx* row = kspace.plane(center_frames[i], c) + static_cast<size_t>(center) * nx;
      std::copy_n(row, nx, line.begin());
      fft::inverse1(line);
      double* dst = profiles.data() + (static_cast<size_t>(i) * kspace.coils + c) * nx;
      for (int x = 0; x < nx; ++x) dst[x] = std::abs(line[x]);
    }
    // normalize by the RSS over coils at each projected position
    for (int x = 0; x < nx; ++x) {
      double rss = 0.0;
      for (int c = 0; c < kspace.coils; ++c) {
        const double v = profiles[(static_cast<size_t>(i) * kspace.coils + c) * nx + x];
        rss += v * v;
      }
      rss = std::sqrt(rss);
      raw_rss[static_cast<size_t>(i) * nx + x] = rss;
      for (int c = 0; c < kspace.coils; ++c) {
        double& v = profiles[(static_cast<size_t>(i) * kspace.coils + c) * nx + x];
        v = rss > 0.0 ? v / rss : 0.0;
      }
    }
  }

  // restrict to projected positions with consistent signal (body support)
  std::vector<double> support(nx, 0.0);
  {
    std::vector<double> column(nt);
    for (int x = 0; x < nx; ++x) {
      for (int i = 0; i < nt; ++i) column[i] = raw_rss[static_cast<size_t>(i) * nx + x];
      support[x] = detail::median(column);
    }
  }
  const double support_cut = 0.1 * *std::max_element(support.begin(), support.end());

  CoilWeights cw;
  cw.weights.resize(kspace.coils);
  cw.scores.resize(kspace.coils);
  for (int c = 0; c < kspace.coils; ++c) {
    std::vector<double> cvs, trace(nt);
    for (int x = 0; x < nx; ++x) {
      if (support[x] < support_cut) continue;
      for (int i = 0; i < nt; ++i)
        trace[i] = profiles[(static_cast<size_t>(i) * kspace.coils + c) * nx + x];
      const double med = detail::median(trace);
      if (med > 1e-6) cvs.push_back(detail::mad(trace) / med);
    }
    cw.scores[c] = cvs.empty() ? 0.0 : detail::median(cvs);
  }

  // robust z across coils; the absolute scale floor keeps sub-percent
  // fluctuations (pure noise) from registering as outliers
  const double score_med = detail::median(cw.scores);
  const double score_scale = std::max(1.4826 * detail::mad(cw.scores), 0.01);
  for (int c = 0; c < kspace.coils; ++c) {
    const double z = (cw.scores[c] - score_med) / score_scale;
    cw.weights[c] = z <= cw.threshold_z ? 1.0 : std::exp(-(z - cw.threshold_z));
  }

  KSpaceSeries out = kspace;
  const size_t plane = out.plane_size();
  for (int f = 0; f < out.frames; ++f)
    for (int c = 0; c < out.coils; ++c) {
      if (cw.weights[c] == 1.0) continue;
      cplx* p = out.plane(f, c);
      for (size_t i = 0; i < plane; ++i) p[i] *= cw.weights[c];
    }
  return {cw, std::move(out)};
}

}  // namespace rtxc::recon
