#include <doctest.h>

#include <cmath>
#include <complex>

#include "rtxc/detail/rng.hpp"
#include "rtxc/encode.hpp"
#include "rtxc/fft.hpp"
#include "rtxc/phantom.hpp"
#include "rtxc/recon.hpp"
#include "rtxc/sampling.hpp"

using namespace rtxc;

namespace {

ImageSeries random_series(int frames, int ny, int nx, uint64_t seed) {
  ImageSeries s(frames, ny, nx);
  detail::SplitMix64 rng(seed);
  for (auto& v : s.data) v = cplx(rng.gaussian(), rng.gaussian());
  return s;
}

sampling::SamplingPattern full_pattern(int ny, int frames) {
  return sampling::gro_generate(ny, ny, frames);
}

CoilMaps uniform_single_coil(int ny, int nx) {
  CoilMaps maps(1, 1, ny, nx);
  std::fill(maps.data.begin(), maps.data.end(), cplx(1.0, 0.0));
  return maps;
}

}  // namespace

TEST_CASE("full sampling with a uniform coil is invertible") {
  const int n = 48, frames = 3;
  const auto img = random_series(frames, n, n, 11);
  const auto ks = encode::forward(img, uniform_single_coil(n, n), full_pattern(n, frames), 0.0, 1);

  double err = 0.0, norm = 0.0;
  std::vector<cplx> rec(static_cast<size_t>(n) * n);
  for (int f = 0; f < frames; ++f) {
    fft::inverse2(ks.plane(f, 0), rec.data(), n, n);
    for (size_t i = 0; i < rec.size(); ++i) {
      err += std::norm(rec[i] - img.frame(f)[i]);
      norm += std::norm(img.frame(f)[i]);
    }
  }
  CHECK(std::sqrt(err / norm) < 1e-10);
}

TEST_CASE("adjoint identity holds to 1e-8 on random inputs") {
  const int n = 40, frames = 4, coils = 4;
  const auto maps = phantom::coil_maps_synthetic(coils, n, n, 5);
  const auto pattern = sampling::gro_generate(n, 10, frames);
  const auto x = random_series(frames, n, n, 21);

  // random y supported on the acquired samples
  auto y = encode::forward(random_series(frames, n, n, 22), maps, pattern, 0.0, 2);

  const auto ax = encode::forward(x, maps, pattern, 0.0, 3);  // sigma 0: pure A x

  // independent adjoint: per (frame, coil), inverse FFT of the masked data
  // followed by conjugate-map combination
  std::vector<cplx> adj(x.data.size(), cplx(0, 0));
  {
    std::vector<cplx> work(static_cast<size_t>(n) * n), imgf(work.size());
    for (int f = 0; f < frames; ++f)
      for (int c = 0; c < coils; ++c) {
        std::fill(work.begin(), work.end(), cplx(0, 0));
        for (int ky : pattern.lines[f])
          for (int kx = 0; kx < n; ++kx)
            work[static_cast<size_t>(ky) * n + kx] =
                y.plane(f, c)[static_cast<size_t>(ky) * n + kx];
        fft::inverse2(work.data(), imgf.data(), n, n);
        for (size_t i = 0; i < imgf.size(); ++i)
          adj[static_cast<size_t>(f) * n * n + i] += std::conj(maps.map(0, c)[i]) * imgf[i];
      }
  }

  // <A x, y> vs <x, A^H y>
  cplx lhs(0, 0), rhs(0, 0);
  for (size_t i = 0; i < ax.data.size(); ++i) lhs += ax.data[i] * std::conj(y.data[i]);
  for (size_t i = 0; i < x.data.size(); ++i) rhs += x.data[i] * std::conj(adj[i]);
  double nx2 = 0, ny2 = 0;
  for (const auto& v : x.data) nx2 += std::norm(v);
  for (const auto& v : y.data) ny2 += std::norm(v);
  CHECK(std::abs(lhs - rhs) / std::sqrt(nx2 * ny2) < 1e-8);
}

TEST_CASE("Parseval at full sampling") {
  const int n = 32, frames = 2, coils = 3;
  const auto maps = phantom::coil_maps_synthetic(coils, n, n, 9);
  const auto x = random_series(frames, n, n, 33);
  const auto ax = encode::forward(x, maps, full_pattern(n, frames), 0.0, 1);

  double lhs = 0.0;
  for (const auto& v : ax.data) lhs += std::norm(v);
  double rhs = 0.0;
  for (int f = 0; f < frames; ++f)
    for (int c = 0; c < coils; ++c)
      for (size_t i = 0; i < x.frame_size(); ++i)
        rhs += std::norm(maps.map(0, c)[i] * x.frame(f)[i]);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("forward is linear in the image") {
  const int n = 32, frames = 2;
  const auto maps = phantom::coil_maps_synthetic(3, n, n, 9);
  const auto pattern = sampling::gro_generate(n, 8, frames);
  const auto a = random_series(frames, n, n, 1);
  const auto b = random_series(frames, n, n, 2);
  ImageSeries sum = a;
  for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += 2.0 * b.data[i];

  const auto fa = encode::forward(a, maps, pattern, 0.0, 1);
  const auto fb = encode::forward(b, maps, pattern, 0.0, 1);
  const auto fsum = encode::forward(sum, maps, pattern, 0.0, 1);
  double err = 0.0, norm = 0.0;
  for (size_t i = 0; i < fsum.data.size(); ++i) {
    err += std::norm(fsum.data[i] - fa.data[i] - 2.0 * fb.data[i]);
    norm += std::norm(fsum.data[i]);
  }
  CHECK(std::sqrt(err / std::max(norm, 1e-30)) < 1e-10);
}

TEST_CASE("masked samples are identically zero and noise is seeded") {
  const int n = 32, frames = 3;
  const auto maps = phantom::coil_maps_synthetic(2, n, n, 9);
  const auto pattern = sampling::gro_generate(n, 8, frames);
  const auto img = random_series(frames, n, n, 4);

  const auto a = encode::forward(img, maps, pattern, 0.5, 77);
  const auto b = encode::forward(img, maps, pattern, 0.5, 77);
  const auto c = encode::forward(img, maps, pattern, 0.5, 78);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);

  for (int f = 0; f < frames; ++f) {
    std::vector<bool> acquired(n, false);
    for (int ky : pattern.lines[f]) acquired[ky] = true;
    for (int co = 0; co < 2; ++co)
      for (int ky = 0; ky < n; ++ky)
        if (!acquired[ky])
          for (int kx = 0; kx < n; ++kx)
            CHECK(a.plane(f, co)[static_cast<size_t>(ky) * n + kx] == cplx(0.0, 0.0));
  }
}

TEST_CASE("forward split into noiseless plus add_noise matches the one-shot path") {
  const int n = 32, frames = 2;
  const auto maps = phantom::coil_maps_synthetic(2, n, n, 9);
  const auto pattern = sampling::gro_generate(n, 8, frames);
  const auto img = random_series(frames, n, n, 4);

  const auto oneshot = encode::forward(img, maps, pattern, 0.3, 99);
  auto split = encode::forward(img, maps, pattern, 0.0, 99);
  encode::add_noise(split, 0.3, 99);
  CHECK(oneshot.data == split.data);
}

TEST_CASE("flow encoding identities") {
  const int n = 24, frames = 2;
  RealSeries mag(frames, n, n);
  RealSeries vel(frames, n, n);
  std::fill(mag.data.begin(), mag.data.end(), 1.0);

  SUBCASE("zero velocity: encoded equals compensated") {
    const auto pair = encode::flow_encode(vel, mag, {150.0});
    CHECK(!pair.aliasing_warning);
    for (size_t i = 0; i < pair.encoded.data.size(); ++i)
      CHECK(std::abs(pair.encoded.data[i] - pair.compensated.data[i]) < 1e-14);
  }
  SUBCASE("phase difference at the VENC boundary is pi") {
    std::fill(vel.data.begin(), vel.data.end(), 150.0);
    const auto pair = encode::flow_encode(vel, mag, {150.0});
    CHECK(pair.aliasing_warning);  // |v| >= VENC
    const auto phase = encode::phase_difference(pair.compensated, pair.encoded);
    for (double p : phase.data) CHECK(std::abs(p) == doctest::Approx(M_PI).epsilon(1e-12));
  }
  SUBCASE("linear mapping: v=100 at VENC=200 gives pi/2") {
    std::fill(vel.data.begin(), vel.data.end(), 100.0);
    const auto pair = encode::flow_encode(vel, mag, {200.0});
    const auto phase = encode::phase_difference(pair.compensated, pair.encoded);
    for (double p : phase.data) CHECK(p == doctest::Approx(M_PI / 2).epsilon(1e-12));
  }
}

TEST_CASE("phase difference cancels any background phase") {
  const int n = 24;
  RealSeries mag(1, n, n), vel(1, n, n);
  detail::SplitMix64 rng(5);
  for (auto& v : mag.data) v = 0.5 + rng.uniform();
  for (auto& v : vel.data) v = 80.0 * (rng.uniform() - 0.5);

  const auto pair = encode::flow_encode(vel, mag, {150.0});
  const auto phase = encode::phase_difference(pair.compensated, pair.encoded);
  const auto recovered = encode::phase_to_velocity(phase, {150.0});
  for (size_t i = 0; i < vel.data.size(); ++i)
    CHECK(recovered.data[i] == doctest::Approx(vel.data[i]).epsilon(1e-10));

  SUBCASE("identical inputs give all-zero phase") {
    const auto zero = encode::phase_difference(pair.compensated, pair.compensated);
    for (double p : zero.data) CHECK(p == 0.0);
  }
}

TEST_CASE("phase_to_velocity definition and VENC scaling") {
  RealSeries phase(1, 4, 4);
  std::fill(phase.data.begin(), phase.data.end(), M_PI);
  CHECK(encode::phase_to_velocity(phase, {150.0}).data[0] == doctest::Approx(150.0));
  std::fill(phase.data.begin(), phase.data.end(), 0.0);
  CHECK(encode::phase_to_velocity(phase, {150.0}).data[0] == 0.0);

  std::fill(phase.data.begin(), phase.data.end(), 0.7);
  const auto v100 = encode::phase_to_velocity(phase, {100.0});
  const auto v300 = encode::phase_to_velocity(phase, {300.0});
  for (size_t i = 0; i < phase.data.size(); ++i)
    CHECK(v300.data[i] == doctest::Approx(3.0 * v100.data[i]));
}

TEST_CASE("flow encode -> sample -> reconstruct -> decode round trip at R=1") {
  auto cfg = phantom::PhantomConfig{};
  cfg.ny = cfg.nx = 64;
  cfg.pixel_mm = 2.5;
  cfg.slices = 1;
  cfg.frames = 24;
  cfg.frame_interval_ms = 50.0;
  cfg.heart_rate_bpm = 120.0;
  cfg.resp_rate_bpm = 100.0;  // short series still spans two respiratory periods
  cfg.vessel_radius_mm = 12.0;
  cfg.peak_velocity_cms = 100.0;
  cfg.flow_waveform = phantom::FlowWaveform::steady;
  cfg.resp_amp_inplane_mm = 0.0;
  cfg.resp_amp_throughplane_mm = 0.0;
  const auto ph = phantom::make_flow_phantom(cfg);

  const encode::FlowEncodingSpec venc{150.0};
  const auto pair = encode::flow_encode(ph.velocity, ph.magnitude, venc);
  const auto maps = uniform_single_coil(cfg.ny, cfg.nx);
  const auto pattern = full_pattern(cfg.ny, cfg.frames);

  auto ks_comp = encode::forward(pair.compensated, maps, pattern, 0.0, 1);
  auto ks_enc = encode::forward(pair.encoded, maps, pattern, 0.0, 2);
  const auto rec_comp = recon::zero_filled(ks_comp, maps);
  const auto rec_enc = recon::zero_filled(ks_enc, maps);

  const auto phase = encode::phase_difference(rec_comp, rec_enc);
  const auto vel = encode::phase_to_velocity(phase, venc);
  double max_err = 0.0;
  for (size_t i = 0; i < vel.data.size(); ++i) {
    if (std::abs(ph.magnitude.data[i]) < 0.1) continue;  // air carries no phase
    max_err = std::max(max_err, std::abs(vel.data[i] - ph.velocity.data[i]));
  }
  CHECK(max_err < 1e-8);
}
