#pragma once

#include <cstdint>

#include "rtxc/types.hpp"

namespace rtxc::encode {

struct FlowEncodingSpec {
  double venc_cms = 150.0;  ///< velocity v maps to phase pi*v/VENC
};

/// SENSE-type forward model: per frame and coil, the acquired samples of the
/// unitary centered 2D FFT of (sensitivity x image), plus complex Gaussian
/// noise of standard deviation sigma per component on acquired samples only.
/// Unacquired samples are identically zero. Deterministic in the seed and
/// independent of evaluation order.
KSpaceSeries forward(const ImageSeries& image, const CoilMaps& maps,
                     const sampling::SamplingPattern& pattern, double sigma, uint64_t seed);

/// RMS magnitude of the acquired samples; used to turn a relative noise level
/// into an absolute sigma.
double acquired_rms(const KSpaceSeries& kspace);

/// Add complex Gaussian noise (std sigma per component) to acquired samples
/// only. forward(..., sigma, seed) is identical to forward(..., 0, seed)
/// followed by add_noise(sigma, seed).
void add_noise(KSpaceSeries& kspace, double sigma, uint64_t seed);

struct FlowEncodeResult {
  ImageSeries compensated;
  ImageSeries encoded;
  bool aliasing_warning = false;  ///< true when |v| >= VENC somewhere
};

/// Phase-contrast pair: compensated = magnitude * exp(i phi0), encoded =
/// magnitude * exp(i (phi0 + pi v / VENC)), with a fixed smooth second-order
/// polynomial background phase phi0 so that the downstream phase difference
/// genuinely has something to cancel.
FlowEncodeResult flow_encode(const RealSeries& velocity, const RealSeries& magnitude,
                             const FlowEncodingSpec& spec);

/// Per-pixel angle of (encoded * conj(compensated)), wrapped to (-pi, pi].
RealSeries phase_difference(const ImageSeries& compensated, const ImageSeries& encoded);

/// v = VENC * phi / pi, in cm/s.
RealSeries phase_to_velocity(const RealSeries& phase, const FlowEncodingSpec& spec);

}  // namespace rtxc::encode
