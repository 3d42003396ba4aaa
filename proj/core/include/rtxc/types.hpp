#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtxc/sampling.hpp"

namespace rtxc {

using cplx = std::complex<double>;

/// One slice of a dynamic acquisition: frames x ny x nx samples plus pixel
/// geometry and frame timing.
template <typename T>
struct Series {
  int frames = 0;
  int ny = 0;
  int nx = 0;
  double pixel_mm = 1.0;        ///< isotropic in-plane pixel spacing
  double frame_interval_ms = 0.0;
  std::vector<T> data;

  Series() = default;
  Series(int frames_, int ny_, int nx_, double pixel_mm_ = 1.0, double dt_ms_ = 0.0)
      : frames(frames_), ny(ny_), nx(nx_), pixel_mm(pixel_mm_), frame_interval_ms(dt_ms_),
        data(static_cast<size_t>(frames_) * ny_ * nx_) {}

  size_t frame_size() const { return static_cast<size_t>(ny) * nx; }
  size_t size() const { return data.size(); }

  T& at(int f, int y, int x) { return data[(static_cast<size_t>(f) * ny + y) * nx + x]; }
  const T& at(int f, int y, int x) const {
    return data[(static_cast<size_t>(f) * ny + y) * nx + x];
  }
  T* frame(int f) { return data.data() + static_cast<size_t>(f) * frame_size(); }
  const T* frame(int f) const { return data.data() + static_cast<size_t>(f) * frame_size(); }
};

using ImageSeries = Series<cplx>;
using RealSeries = Series<double>;
using MaskSeries = Series<uint8_t>;

/// Coil sensitivity maps; frames == 1 means maps are static in time.
struct CoilMaps {
  int frames = 1;
  int coils = 0;
  int ny = 0;
  int nx = 0;
  std::vector<cplx> data;

  CoilMaps() = default;
  CoilMaps(int frames_, int coils_, int ny_, int nx_)
      : frames(frames_), coils(coils_), ny(ny_), nx(nx_),
        data(static_cast<size_t>(frames_) * coils_ * ny_ * nx_) {}

  bool is_static() const { return frames == 1; }
  size_t map_size() const { return static_cast<size_t>(ny) * nx; }
  cplx* map(int f, int c) {
    return data.data() + (static_cast<size_t>(f % frames) * coils + c) * map_size();
  }
  const cplx* map(int f, int c) const {
    return data.data() + (static_cast<size_t>(f % frames) * coils + c) * map_size();
  }
};

enum class FlowEncoding { none, compensated, encoded };

inline std::string to_string(FlowEncoding e) {
  switch (e) {
    case FlowEncoding::compensated: return "compensated";
    case FlowEncoding::encoded: return "encoded";
    default: return "none";
  }
}

/// Multi-coil Cartesian k-space with its acquisition pattern. Samples are
/// zero wherever the pattern does not acquire.
struct KSpaceSeries {
  int frames = 0;
  int coils = 0;
  int ny = 0;
  int nx = 0;
  double tr_ms = 0.0;
  double noise_sigma = 0.0;
  double venc_cms = 0.0;
  FlowEncoding encoding = FlowEncoding::none;
  sampling::SamplingPattern pattern;
  std::vector<cplx> data;

  KSpaceSeries() = default;
  KSpaceSeries(int frames_, int coils_, int ny_, int nx_)
      : frames(frames_), coils(coils_), ny(ny_), nx(nx_),
        data(static_cast<size_t>(frames_) * coils_ * ny_ * nx_) {}

  size_t plane_size() const { return static_cast<size_t>(ny) * nx; }
  cplx* plane(int f, int c) {
    return data.data() + (static_cast<size_t>(f) * coils + c) * plane_size();
  }
  const cplx* plane(int f, int c) const {
    return data.data() + (static_cast<size_t>(f) * coils + c) * plane_size();
  }
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace rtxc
