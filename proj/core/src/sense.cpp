#include "sense_op.hpp"

#include <cmath>

#include "rtxc/fft.hpp"
#include "rtxc/recon.hpp"

namespace rtxc::recon {

SenseOp::SenseOp(const KSpaceSeries& kspace, const CoilMaps& maps)
    : ks_(kspace), maps_(maps), frames_(kspace.frames), coils_(kspace.coils),
      ny_(kspace.ny), nx_(kspace.nx) {
  require(maps.ny == ny_ && maps.nx == nx_ && maps.coils == coils_,
          "SenseOp: map geometry mismatch");
  require(maps.is_static() || maps.frames == frames_, "SenseOp: per-frame map count mismatch");
}

double SenseOp::gradient(const std::vector<cplx>& x, std::vector<cplx>& g) const {
  const size_t plane = static_cast<size_t>(ny_) * nx_;
  std::vector<cplx> work(plane), spec(plane);
  g.assign(image_size(), cplx(0.0, 0.0));
  double fid = 0.0;

  for (int f = 0; f < frames_; ++f) {
    const cplx* xf = x.data() + f * plane;
    cplx* gf = g.data() + f * plane;
    for (int c = 0; c < coils_; ++c) {
      const cplx* sens = maps_.map(f, c);
      for (size_t i = 0; i < plane; ++i) work[i] = sens[i] * xf[i];
      fft::forward2(work.data(), spec.data(), ny_, nx_);

      // residual on acquired lines only
      std::fill(work.begin(), work.end(), cplx(0.0, 0.0));
      const cplx* y = ks_.plane(f, c);
      for (int ky : ks_.pattern.lines[f]) {
        const size_t off = static_cast<size_t>(ky) * nx_;
        for (int kx = 0; kx < nx_; ++kx) {
          const cplx r = spec[off + kx] - y[off + kx];
          work[off + kx] = r;
          fid += 0.5 * std::norm(r);
        }
      }
      fft::inverse2(work.data(), spec.data(), ny_, nx_);
      for (size_t i = 0; i < plane; ++i) gf[i] += std::conj(sens[i]) * spec[i];
    }
  }
  return fid;
}

double SenseOp::fidelity(const std::vector<cplx>& x) const {
  const size_t plane = static_cast<size_t>(ny_) * nx_;
  std::vector<cplx> work(plane), spec(plane);
  double fid = 0.0;
  for (int f = 0; f < frames_; ++f) {
    const cplx* xf = x.data() + f * plane;
    for (int c = 0; c < coils_; ++c) {
      const cplx* sens = maps_.map(f, c);
      for (size_t i = 0; i < plane; ++i) work[i] = sens[i] * xf[i];
      fft::forward2(work.data(), spec.data(), ny_, nx_);
      const cplx* y = ks_.plane(f, c);
      for (int ky : ks_.pattern.lines[f]) {
        const size_t off = static_cast<size_t>(ky) * nx_;
        for (int kx = 0; kx < nx_; ++kx) fid += 0.5 * std::norm(spec[off + kx] - y[off + kx]);
      }
    }
  }
  return fid;
}

void SenseOp::adjoint_data(const std::vector<double>& line_weights, std::vector<cplx>& x) const {
  const size_t plane = static_cast<size_t>(ny_) * nx_;
  std::vector<cplx> work(plane), img(plane);
  x.assign(image_size(), cplx(0.0, 0.0));
  for (int f = 0; f < frames_; ++f) {
    cplx* xf = x.data() + f * plane;
    for (int c = 0; c < coils_; ++c) {
      std::fill(work.begin(), work.end(), cplx(0.0, 0.0));
      const cplx* y = ks_.plane(f, c);
      for (int ky : ks_.pattern.lines[f]) {
        const size_t off = static_cast<size_t>(ky) * nx_;
        const double w = line_weights[ky];
        for (int kx = 0; kx < nx_; ++kx) work[off + kx] = w * y[off + kx];
      }
      fft::inverse2(work.data(), img.data(), ny_, nx_);
      const cplx* sens = maps_.map(f, c);
      for (size_t i = 0; i < plane; ++i) xf[i] += std::conj(sens[i]) * img[i];
    }
  }
}

ImageSeries zero_filled(const KSpaceSeries& kspace, const CoilMaps& maps) {
  SenseOp op(kspace, maps);
  const auto counts = kspace.pattern.line_counts();
  std::vector<double> weights(kspace.ny, 0.0);
  for (int ky = 0; ky < kspace.ny; ++ky)
    if (counts[ky] > 0) weights[ky] = static_cast<double>(kspace.frames) / counts[ky];

  std::vector<cplx> x;
  op.adjoint_data(weights, x);
  ImageSeries img(kspace.frames, kspace.ny, kspace.nx, 1.0, kspace.tr_ms * kspace.pattern.lines_per_frame);
  img.data = std::move(x);
  return img;
}

double artifact_energy(const ImageSeries& image, const MaskSeries& anatomy_mask) {
  require(anatomy_mask.ny == image.ny && anatomy_mask.nx == image.nx &&
              anatomy_mask.frames == image.frames,
          "artifact_energy: mask geometry mismatch");
  const int ny = image.ny, nx = image.nx;

  // union of the dynamic-anatomy mask over frames, dilated by two pixels
  std::vector<uint8_t> unite(static_cast<size_t>(ny) * nx, 0);
  for (int f = 0; f < image.frames; ++f)
    for (size_t i = 0; i < unite.size(); ++i) unite[i] |= anatomy_mask.data[static_cast<size_t>(f) * unite.size() + i];
  std::vector<uint8_t> dilated(unite);
  constexpr int kDilate = 2;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      if (dilated[static_cast<size_t>(y) * nx + x]) continue;
      bool hit = false;
      for (int dy = -kDilate; dy <= kDilate && !hit; ++dy)
        for (int dx = -kDilate; dx <= kDilate && !hit; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < ny && xx >= 0 && xx < nx &&
              unite[static_cast<size_t>(yy) * nx + xx])
            hit = true;
        }
      if (hit) dilated[static_cast<size_t>(y) * nx + x] = 2;
    }

  double fluct = 0.0, signal = 0.0;
  const size_t plane = static_cast<size_t>(ny) * nx;
  for (size_t p = 0; p < plane; ++p) {
    cplx mean(0.0, 0.0);
    for (int f = 0; f < image.frames; ++f) mean += image.data[f * plane + p];
    mean /= static_cast<double>(image.frames);
    if (dilated[p]) {
      for (int f = 0; f < image.frames; ++f) signal += std::norm(image.data[f * plane + p]);
    } else {
      for (int f = 0; f < image.frames; ++f)
        fluct += std::norm(image.data[f * plane + p] - mean);
    }
  }
  return signal > 0.0 ? fluct / signal : 0.0;
}

double nrmse(const ImageSeries& recon, const ImageSeries& truth) {
  require(recon.data.size() == truth.data.size(), "nrmse: size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < truth.data.size(); ++i) {
    const double d = std::abs(recon.data[i]) - std::abs(truth.data[i]);
    num += d * d;
    den += std::norm(truth.data[i]);
  }
  return std::sqrt(num / den);
}

double nrmse_complex(const ImageSeries& recon, const ImageSeries& truth) {
  require(recon.data.size() == truth.data.size(), "nrmse_complex: size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < truth.data.size(); ++i) {
    num += std::norm(recon.data[i] - truth.data[i]);
    den += std::norm(truth.data[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace rtxc::recon
