#pragma once

#include <vector>

#include "rtxc/types.hpp"

namespace rtxc::recon {

// Undecimated Haar over (t, y, x), Parseval-normalized so adjoint(forward(x))
// equals x. Per level: 7 detail bands (band index bit0 = x-high, bit1 =
// y-high, bit2 = t-high), approximation carried to the next level and emitted
// last. Workspace is owned by the engine and reused across calls.
class UwtEngine {
 public:
  UwtEngine(int frames, int ny, int nx, int levels);

  int levels() const { return levels_; }
  int detail_bands() const { return 7 * levels_; }
  size_t volume() const { return n_; }

  /// All subbands in emission order (details level by level, approx last).
  std::vector<std::vector<cplx>> forward(const std::vector<cplx>& x);
  std::vector<cplx> adjoint(const std::vector<std::vector<cplx>>& bands);

  /// L1 norm of each detail band (forward pass only).
  std::vector<double> l1_norms(const std::vector<cplx>& x);

  /// x <- adjoint(soft(forward(x), lambda)), with lambda per detail band
  /// computed as scale * MAD / 0.6745 from the band itself. When
  /// `envelope_active`, lambda is clamped to be non-increasing across calls
  /// via `envelope` (in/out). The approximation band is never thresholded.
  void prox(std::vector<cplx>& x, double scale, std::vector<double>& envelope,
            bool envelope_active);

 private:
  void split(const std::vector<cplx>& in, std::vector<cplx>& low, std::vector<cplx>& high,
             int axis, int step) const;
  void merge(const std::vector<cplx>& low, const std::vector<cplx>& high, std::vector<cplx>& out,
             int axis, int step) const;
  void split8(const std::vector<cplx>& in, std::vector<std::vector<cplx>>& bands, int step);
  void merge8(std::vector<std::vector<cplx>>& bands, std::vector<cplx>& out, int step);
  double band_mad(const std::vector<cplx>& band);

  int frames_, ny_, nx_, levels_;
  size_t n_;
  std::vector<double> mad_scratch_;
};

}  // namespace rtxc::recon
