#pragma once

#include "rtxc/types.hpp"

namespace rtxc::recon {

// Internal SENSE encoding operator A: image series -> sampled multi-coil
// k-space. With RSS-normalized maps its spectral norm is at most 1, so the
// solver can use unit step size.
class SenseOp {
 public:
  SenseOp(const KSpaceSeries& kspace, const CoilMaps& maps);

  int frames() const { return frames_; }
  size_t image_size() const { return static_cast<size_t>(frames_) * ny_ * nx_; }

  /// g +=/= A^H (A x - y); returns 0.5 ||A x - y||^2
  double gradient(const std::vector<cplx>& x, std::vector<cplx>& g) const;

  /// 0.5 ||A x - y||^2 without forming the gradient
  double fidelity(const std::vector<cplx>& x) const;

  /// x = A^H (w . y): adjoint of the measured data with per-line weights
  void adjoint_data(const std::vector<double>& line_weights, std::vector<cplx>& x) const;

 private:
  const KSpaceSeries& ks_;
  const CoilMaps& maps_;
  int frames_, coils_, ny_, nx_;
};

}  // namespace rtxc::recon
