#pragma once

#include "rtxc/types.hpp"

namespace rtxc::fft {

/// Unitary centered 2D FFT: image with the object at the grid center maps to
/// k-space with DC at (ny/2, nx/2). forward2/inverse2 are exact inverses and
/// preserve the l2 norm (1/sqrt(ny*nx) scaling on both directions).
void forward2(const cplx* in, cplx* out, int ny, int nx);
void inverse2(const cplx* in, cplx* out, int ny, int nx);

/// In-place 1D FFTs used for spectra and line profiles; forward is
/// unnormalized, inverse carries the 1/n factor.
void forward1(std::vector<cplx>& data);
void inverse1(std::vector<cplx>& data);

}  // namespace rtxc::fft
