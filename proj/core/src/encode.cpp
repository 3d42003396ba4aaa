#include "rtxc/encode.hpp"

#include <cmath>
#include <stdexcept>

#include "rtxc/detail/rng.hpp"
#include "rtxc/fft.hpp"

namespace rtxc::encode {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Fixed second-order background phase, peak amplitude pi/8 over the grid.
double background_phase(int y, int x, int ny, int nx) {
  const double u = 2.0 * y / (ny - 1) - 1.0;
  const double v = 2.0 * x / (nx - 1) - 1.0;
  const double poly = 0.30 + 0.50 * u - 0.40 * v + 0.60 * u * u + 0.35 * u * v - 0.50 * v * v;
  return kPi / 8.0 * poly / 2.65;  // max |poly| over the unit square
}
}  // namespace

KSpaceSeries forward(const ImageSeries& image, const CoilMaps& maps,
                     const sampling::SamplingPattern& pattern, double sigma, uint64_t seed) {
  require(maps.ny == image.ny && maps.nx == image.nx, "encode::forward: map/image grid mismatch");
  require(maps.is_static() || maps.frames == image.frames,
          "encode::forward: per-frame maps must match the frame count");
  require(pattern.ny == image.ny, "encode::forward: pattern ny mismatch");
  require(pattern.frames >= image.frames, "encode::forward: pattern has too few frames");

  KSpaceSeries ks(image.frames, maps.coils, image.ny, image.nx);
  ks.pattern = pattern;
  ks.pattern.frames = image.frames;
  ks.pattern.lines.resize(image.frames);
  ks.noise_sigma = sigma;
  ks.frames = image.frames;

  const size_t plane = ks.plane_size();
  std::vector<cplx> weighted(plane), spectrum(plane);

  for (int f = 0; f < image.frames; ++f) {
    const cplx* img = image.frame(f);
    for (int c = 0; c < maps.coils; ++c) {
      const cplx* sens = maps.map(f, c);
      for (size_t i = 0; i < plane; ++i) weighted[i] = sens[i] * img[i];
      fft::forward2(weighted.data(), spectrum.data(), image.ny, image.nx);

      cplx* out = ks.plane(f, c);
      for (int ky : ks.pattern.lines[f]) {
        cplx* row = out + static_cast<size_t>(ky) * image.nx;
        const cplx* src = spectrum.data() + static_cast<size_t>(ky) * image.nx;
        for (int kx = 0; kx < image.nx; ++kx) row[kx] = src[kx];
      }
    }
  }
  if (sigma > 0.0) add_noise(ks, sigma, seed);
  return ks;
}

double acquired_rms(const KSpaceSeries& kspace) {
  double energy = 0.0;
  size_t count = 0;
  for (int f = 0; f < kspace.frames; ++f)
    for (int c = 0; c < kspace.coils; ++c) {
      const cplx* p = kspace.plane(f, c);
      for (int ky : kspace.pattern.lines[f]) {
        const size_t off = static_cast<size_t>(ky) * kspace.nx;
        for (int kx = 0; kx < kspace.nx; ++kx) energy += std::norm(p[off + kx]);
        count += kspace.nx;
      }
    }
  return count > 0 ? std::sqrt(energy / static_cast<double>(count)) : 0.0;
}

void add_noise(KSpaceSeries& kspace, double sigma, uint64_t seed) {
  if (sigma <= 0.0) return;
  for (int f = 0; f < kspace.frames; ++f)
    for (int c = 0; c < kspace.coils; ++c) {
      cplx* p = kspace.plane(f, c);
      detail::SplitMix64 rng(detail::substream(seed, static_cast<uint64_t>(f),
                                               static_cast<uint64_t>(c)));
      for (int ky : kspace.pattern.lines[f]) {
        const size_t off = static_cast<size_t>(ky) * kspace.nx;
        for (int kx = 0; kx < kspace.nx; ++kx)
          p[off + kx] += cplx(sigma * rng.gaussian(), sigma * rng.gaussian());
      }
    }
  kspace.noise_sigma = sigma;
}

FlowEncodeResult flow_encode(const RealSeries& velocity, const RealSeries& magnitude,
                             const FlowEncodingSpec& spec) {
  require(spec.venc_cms > 0.0, "flow_encode: VENC must be positive");
  require(velocity.frames == magnitude.frames && velocity.ny == magnitude.ny &&
              velocity.nx == magnitude.nx,
          "flow_encode: velocity/magnitude geometry mismatch");

  FlowEncodeResult out;
  out.compensated = ImageSeries(velocity.frames, velocity.ny, velocity.nx, velocity.pixel_mm,
                                velocity.frame_interval_ms);
  out.encoded = out.compensated;

  for (int f = 0; f < velocity.frames; ++f) {
    for (int y = 0; y < velocity.ny; ++y) {
      for (int x = 0; x < velocity.nx; ++x) {
        const double v = velocity.at(f, y, x);
        if (std::abs(v) >= spec.venc_cms) out.aliasing_warning = true;
        const double phi0 = background_phase(y, x, velocity.ny, velocity.nx);
        const double mag = magnitude.at(f, y, x);
        out.compensated.at(f, y, x) = std::polar(mag, phi0);
        out.encoded.at(f, y, x) = std::polar(mag, phi0 + kPi * v / spec.venc_cms);
      }
    }
  }
  return out;
}

RealSeries phase_difference(const ImageSeries& compensated, const ImageSeries& encoded) {
  require(compensated.frames == encoded.frames && compensated.ny == encoded.ny &&
              compensated.nx == encoded.nx,
          "phase_difference: geometry mismatch");
  RealSeries phase(compensated.frames, compensated.ny, compensated.nx, compensated.pixel_mm,
                   compensated.frame_interval_ms);
  for (size_t i = 0; i < phase.data.size(); ++i)
    phase.data[i] = std::arg(encoded.data[i] * std::conj(compensated.data[i]));
  return phase;
}

RealSeries phase_to_velocity(const RealSeries& phase, const FlowEncodingSpec& spec) {
  require(spec.venc_cms > 0.0, "phase_to_velocity: VENC must be positive");
  RealSeries vel = phase;
  for (auto& p : vel.data) p = spec.venc_cms * p / kPi;
  return vel;
}

}  // namespace rtxc::encode
