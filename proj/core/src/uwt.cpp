#include "uwt_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtxc/detail/stats.hpp"
#include "rtxc/recon.hpp"

namespace rtxc::recon {

namespace {
constexpr double kMadToSigma = 0.6745;

void soft_threshold(std::vector<cplx>& band, double lambda) {
  if (lambda <= 0.0) return;
  for (auto& c : band) {
    const double mag = std::abs(c);
    c = mag > lambda ? c * ((mag - lambda) / mag) : cplx(0.0, 0.0);
  }
}
}  // namespace

UwtEngine::UwtEngine(int frames, int ny, int nx, int levels)
    : frames_(frames), ny_(ny), nx_(nx), levels_(levels),
      n_(static_cast<size_t>(frames) * ny * nx) {
  require(levels >= 1, "uwt3: levels must be >= 1");
  const int min_dim = 1 << levels;
  if (frames < min_dim || ny < min_dim || nx < min_dim)
    throw std::invalid_argument("uwt3: dimensions must be at least 2^levels along t, y and x");
}

// Haar pair with circular boundary; filters [1,1]/2 and [1,-1]/2 keep the
// analysis Parseval (T* T = identity).
void UwtEngine::split(const std::vector<cplx>& in, std::vector<cplx>& low,
                      std::vector<cplx>& high, int axis, int step) const {
  low.resize(n_);
  high.resize(n_);
  const int len = axis == 0 ? frames_ : (axis == 1 ? ny_ : nx_);
  const size_t stride = axis == 0 ? static_cast<size_t>(ny_) * nx_
                                  : (axis == 1 ? static_cast<size_t>(nx_) : 1);
  const size_t planes = n_ / (static_cast<size_t>(len) * stride);
  // The volume decomposes into `planes` blocks of `len` lines of `stride`
  // contiguous elements each; a line's partner at +step wraps circularly.
  for (size_t p = 0; p < planes; ++p) {
    const size_t base = p * static_cast<size_t>(len) * stride;
    for (int i = 0; i < len; ++i) {
      const size_t a = base + static_cast<size_t>(i) * stride;
      const size_t b = base + static_cast<size_t>((i + step) % len) * stride;
      for (size_t j = 0; j < stride; ++j) {
        const cplx u = in[a + j], v = in[b + j];
        low[a + j] = 0.5 * (u + v);
        high[a + j] = 0.5 * (u - v);
      }
    }
  }
}

void UwtEngine::merge(const std::vector<cplx>& low, const std::vector<cplx>& high,
                      std::vector<cplx>& out, int axis, int step) const {
  out.resize(n_);
  const int len = axis == 0 ? frames_ : (axis == 1 ? ny_ : nx_);
  const size_t stride = axis == 0 ? static_cast<size_t>(ny_) * nx_
                                  : (axis == 1 ? static_cast<size_t>(nx_) : 1);
  const size_t planes = n_ / (static_cast<size_t>(len) * stride);
  for (size_t p = 0; p < planes; ++p) {
    const size_t base = p * static_cast<size_t>(len) * stride;
    for (int i = 0; i < len; ++i) {
      const size_t a = base + static_cast<size_t>(i) * stride;
      const size_t b = base + static_cast<size_t>((i - step % len + len) % len) * stride;
      for (size_t j = 0; j < stride; ++j)
        out[a + j] = 0.5 * (low[a + j] + high[a + j]) + 0.5 * (low[b + j] - high[b + j]);
    }
  }
}

void UwtEngine::split8(const std::vector<cplx>& in, std::vector<std::vector<cplx>>& bands,
                       int step) {
  bands.resize(8);
  std::vector<cplx> lx, hx, tmp_l, tmp_h;
  split(in, lx, hx, 2, step);
  split(lx, tmp_l, tmp_h, 1, step);
  split(tmp_l, bands[0], bands[4], 0, step);  // LLL, HLL
  split(tmp_h, bands[2], bands[6], 0, step);  // LHL, HHL
  split(hx, tmp_l, tmp_h, 1, step);
  split(tmp_l, bands[1], bands[5], 0, step);  // LLH, HLH
  split(tmp_h, bands[3], bands[7], 0, step);  // LHH, HHH
}

void UwtEngine::merge8(std::vector<std::vector<cplx>>& bands, std::vector<cplx>& out, int step) {
  std::vector<cplx> ll, lh, hl, hh, lx, hx;
  merge(bands[0], bands[4], ll, 0, step);
  merge(bands[2], bands[6], lh, 0, step);
  merge(bands[1], bands[5], hl, 0, step);
  merge(bands[3], bands[7], hh, 0, step);
  merge(ll, lh, lx, 1, step);
  merge(hl, hh, hx, 1, step);
  merge(lx, hx, out, 2, step);
}

std::vector<std::vector<cplx>> UwtEngine::forward(const std::vector<cplx>& x) {
  std::vector<std::vector<cplx>> out;
  out.reserve(detail_bands() + 1);
  std::vector<cplx> approx = x;
  std::vector<std::vector<cplx>> bands;
  for (int l = 0; l < levels_; ++l) {
    split8(approx, bands, 1 << l);
    approx = std::move(bands[0]);
    for (int b = 1; b < 8; ++b) out.push_back(std::move(bands[b]));
  }
  out.push_back(std::move(approx));
  return out;
}

std::vector<cplx> UwtEngine::adjoint(const std::vector<std::vector<cplx>>& coeffs) {
  require(static_cast<int>(coeffs.size()) == detail_bands() + 1, "uwt3: wrong subband count");
  std::vector<cplx> approx = coeffs.back();
  for (int l = levels_ - 1; l >= 0; --l) {
    std::vector<std::vector<cplx>> bands(8);
    bands[0] = std::move(approx);
    for (int b = 1; b < 8; ++b) bands[b] = coeffs[static_cast<size_t>(l) * 7 + b - 1];
    merge8(bands, approx, 1 << l);
  }
  return approx;
}

std::vector<double> UwtEngine::l1_norms(const std::vector<cplx>& x) {
  std::vector<double> norms;
  norms.reserve(detail_bands());
  std::vector<cplx> approx = x;
  std::vector<std::vector<cplx>> bands;
  for (int l = 0; l < levels_; ++l) {
    split8(approx, bands, 1 << l);
    approx = std::move(bands[0]);
    for (int b = 1; b < 8; ++b) {
      double s = 0.0;
      for (const cplx& c : bands[b]) s += std::abs(c);
      norms.push_back(s);
    }
  }
  return norms;
}

double UwtEngine::band_mad(const std::vector<cplx>& band) {
  mad_scratch_.resize(2 * band.size());
  for (size_t i = 0; i < band.size(); ++i) {
    mad_scratch_[2 * i] = band[i].real();
    mad_scratch_[2 * i + 1] = band[i].imag();
  }
  const double med = detail::median_inplace(mad_scratch_);
  // median_inplace partially reorders; recompute deviations from the values
  for (size_t i = 0; i < band.size(); ++i) {
    mad_scratch_[2 * i] = std::abs(band[i].real() - med);
    mad_scratch_[2 * i + 1] = std::abs(band[i].imag() - med);
  }
  return detail::median_inplace(mad_scratch_);
}

void UwtEngine::prox(std::vector<cplx>& x, double scale, std::vector<double>& envelope,
                     bool envelope_active) {
  if (envelope.empty())
    envelope.assign(detail_bands(), std::numeric_limits<double>::infinity());

  // recursive descent without recursion: store the band pyramid
  std::vector<std::vector<std::vector<cplx>>> pyramid(levels_);
  std::vector<cplx> approx = std::move(x);
  for (int l = 0; l < levels_; ++l) {
    split8(approx, pyramid[l], 1 << l);
    approx = std::move(pyramid[l][0]);
    for (int b = 1; b < 8; ++b) {
      const int band_idx = l * 7 + b - 1;
      double lambda = scale * band_mad(pyramid[l][b]) / kMadToSigma;
      if (envelope_active) lambda = std::min(lambda, envelope[band_idx]);
      envelope[band_idx] = lambda;
      soft_threshold(pyramid[l][b], lambda);
    }
  }
  for (int l = levels_ - 1; l >= 0; --l) {
    pyramid[l][0] = std::move(approx);
    merge8(pyramid[l], approx, 1 << l);
  }
  x = std::move(approx);
}

std::vector<ImageSeries> uwt3_forward(const ImageSeries& image, int levels) {
  UwtEngine engine(image.frames, image.ny, image.nx, levels);
  auto bands = engine.forward(image.data);
  std::vector<ImageSeries> out;
  out.reserve(bands.size());
  for (auto& b : bands) {
    ImageSeries s(image.frames, image.ny, image.nx, image.pixel_mm, image.frame_interval_ms);
    s.data = std::move(b);
    out.push_back(std::move(s));
  }
  return out;
}

ImageSeries uwt3_adjoint(const std::vector<ImageSeries>& coefficients, int levels) {
  require(!coefficients.empty(), "uwt3_adjoint: no subbands");
  const ImageSeries& first = coefficients.front();
  UwtEngine engine(first.frames, first.ny, first.nx, levels);
  std::vector<std::vector<cplx>> bands;
  bands.reserve(coefficients.size());
  for (const auto& c : coefficients) bands.push_back(c.data);
  ImageSeries out(first.frames, first.ny, first.nx, first.pixel_mm, first.frame_interval_ms);
  out.data = engine.adjoint(bands);
  return out;
}

}  // namespace rtxc::recon
