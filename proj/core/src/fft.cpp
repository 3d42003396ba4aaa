#include "rtxc/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace rtxc::fft {

namespace {

// FFTW plan creation is not thread-safe; execution with the new-array API is.
// Plans are cached per (ny, nx, direction) and created with FFTW_UNALIGNED so
// they can run on any buffer.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int ny, int nx, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(ny, nx, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<cplx> dummy(static_cast<size_t>(ny) * nx);
    fftw_plan plan = fftw_plan_dft_2d(
        ny, nx, reinterpret_cast<fftw_complex*>(dummy.data()),
        reinterpret_cast<fftw_complex*>(dummy.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_[key] = plan;
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// fftshift/ifftshift as an index permutation into a scratch buffer
void shift_copy(const cplx* in, cplx* out, int ny, int nx, int sy, int sx) {
  for (int y = 0; y < ny; ++y) {
    const int yy = (y + sy) % ny;
    const cplx* src = in + static_cast<size_t>(y) * nx;
    cplx* dst = out + static_cast<size_t>(yy) * nx;
    for (int x = 0; x < nx; ++x) dst[(x + sx) % nx] = src[x];
  }
}

void centered_fft(const cplx* in, cplx* out, int ny, int nx, int sign) {
  const size_t n = static_cast<size_t>(ny) * nx;
  std::vector<cplx> scratch(n);
  // ifftshift in, transform, fftshift out
  shift_copy(in, scratch.data(), ny, nx, (ny + 1) / 2, (nx + 1) / 2);
  fftw_plan plan = PlanCache::instance().get(ny, nx, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(scratch.data()));
  shift_copy(scratch.data(), out, ny, nx, ny / 2, nx / 2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (size_t i = 0; i < n; ++i) out[i] *= scale;
}

}  // namespace

void forward2(const cplx* in, cplx* out, int ny, int nx) {
  centered_fft(in, out, ny, nx, FFTW_FORWARD);
}

void inverse2(const cplx* in, cplx* out, int ny, int nx) {
  centered_fft(in, out, ny, nx, FFTW_BACKWARD);
}

void forward1(std::vector<cplx>& data) {
  const int n = static_cast<int>(data.size());
  fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(data.data()),
                                    reinterpret_cast<fftw_complex*>(data.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

void inverse1(std::vector<cplx>& data) {
  const int n = static_cast<int>(data.size());
  fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(data.data()),
                                    reinterpret_cast<fftw_complex*>(data.data()),
                                    FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  for (auto& v : data) v /= static_cast<double>(n);
}

}  // namespace rtxc::fft
