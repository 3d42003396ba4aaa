#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "rtxc/fft.hpp"
#include "rtxc/phantom.hpp"

using namespace rtxc;
using namespace rtxc::phantom;

namespace {

PhantomConfig small_cine() {
  PhantomConfig cfg;
  cfg.ny = cfg.nx = 96;
  cfg.pixel_mm = 2.5;
  cfg.slices = 11;
  cfg.slice_thickness_mm = 6.0;
  cfg.frames = 120;
  cfg.frame_interval_ms = 40.0;
  cfg.heart_rate_bpm = 72.0;
  cfg.resp_rate_bpm = 25.0;
  cfg.edv_ml = 150.0;
  cfg.esv_ml = 60.0;
  cfg.resp_phase0 = 0.1;
  cfg.cardiac_phase0 = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("truth EF follows the volume targets") {
  auto cfg = small_cine();
  const auto ph = make_cine_phantom(cfg);
  CHECK(ph.truth.true_ef_percent() == doctest::Approx(60.0).epsilon(0.02));
  const double edv = *std::max_element(ph.truth.lv_volume_ml.begin(),
                                       ph.truth.lv_volume_ml.end());
  const double esv = *std::min_element(ph.truth.lv_volume_ml.begin(),
                                       ph.truth.lv_volume_ml.end());
  CHECK(edv == doctest::Approx(150.0).epsilon(0.02));
  CHECK(esv == doctest::Approx(60.0).epsilon(0.02));
  const double rv_edv = *std::max_element(ph.truth.rv_volume_ml.begin(),
                                          ph.truth.rv_volume_ml.end());
  const double rv_esv = *std::min_element(ph.truth.rv_volume_ml.begin(),
                                          ph.truth.rv_volume_ml.end());
  CHECK(rv_edv == doctest::Approx(150.0).epsilon(0.02));
  CHECK(rv_esv == doctest::Approx(60.0).epsilon(0.02));
}

TEST_CASE("truth volume trace is periodic at the heart rate") {
  auto cfg = small_cine();
  cfg.heart_rate_bpm = 75.0;  // 0.8 s = 20 frames exactly
  const auto ph = make_cine_phantom(cfg);
  const int period = 20;
  for (int f = 0; f + period < cfg.frames; ++f)
    CHECK(ph.truth.lv_volume_ml[f] ==
          doctest::Approx(ph.truth.lv_volume_ml[f + period]).epsilon(0.01));
}

TEST_CASE("stage sweep: ESV decreases, EDV consistent") {
  std::vector<double> esv_targets{60.0, 53.0, 46.0, 40.0};
  std::vector<double> measured_esv, measured_edv;
  for (double esv : esv_targets) {
    auto cfg = small_cine();
    cfg.slices = 5;
    cfg.frames = 100;
    cfg.resp_rate_bpm = 40.0;
    cfg.esv_ml = esv;
    const auto ph = make_cine_phantom(cfg);
    measured_esv.push_back(*std::min_element(ph.truth.lv_volume_ml.begin(),
                                             ph.truth.lv_volume_ml.end()));
    measured_edv.push_back(*std::max_element(ph.truth.lv_volume_ml.begin(),
                                             ph.truth.lv_volume_ml.end()));
  }
  for (size_t i = 1; i < measured_esv.size(); ++i) CHECK(measured_esv[i] < measured_esv[i - 1]);
  for (double edv : measured_edv) CHECK(edv == doctest::Approx(150.0).epsilon(0.02));
}

TEST_CASE("no respiratory motion makes beats identical") {
  auto cfg = small_cine();
  cfg.resp_amp_inplane_mm = 0.0;
  cfg.resp_amp_throughplane_mm = 0.0;
  cfg.heart_rate_bpm = 75.0;  // 20-frame beats
  cfg.resp_rate_bpm = 40.0;
  cfg.slices = 5;
  cfg.frames = 80;
  const auto ph = make_cine_phantom(cfg);

  // mask-based per-frame areas must repeat beat to beat (no motion)
  const auto& mask = ph.truth.lv_mask[2];
  auto area = [&](int f) {
    int a = 0;
    for (size_t i = 0; i < mask.frame_size(); ++i) a += mask.frame(f)[i];
    return a;
  };
  for (int f = 0; f + 20 < cfg.frames; ++f) CHECK(area(f) == area(f + 20));
}

TEST_CASE("mask Simpson volume tracks the analytic truth within 3%") {
  auto cfg = small_cine();
  cfg.ny = cfg.nx = 144;
  cfg.pixel_mm = 2.1;
  cfg.resp_amp_inplane_mm = 0.0;
  cfg.resp_amp_throughplane_mm = 0.0;
  cfg.frames = 30;
  cfg.resp_rate_bpm = 100.0;
  cfg.heart_rate_bpm = 150.0;  // full cycle inside the short series
  const auto ph = make_cine_phantom(cfg);

  for (int f = 0; f < cfg.frames; f += 7) {
    double measured = 0.0;
    for (const auto& slice : ph.truth.lv_mask) {
      int count = 0;
      for (size_t i = 0; i < slice.frame_size(); ++i) count += slice.frame(f)[i];
      measured += count * cfg.pixel_mm * cfg.pixel_mm * cfg.slice_thickness_mm / 1000.0;
    }
    CHECK(measured == doctest::Approx(ph.truth.lv_volume_ml[f]).epsilon(0.03));
  }
}

TEST_CASE("respiratory waveform dwells longer at end-expiration") {
  auto cfg = small_cine();
  cfg.slices = 3;
  cfg.frames = 240;
  const auto ph = make_cine_phantom(cfg);
  const auto& r = ph.truth.resp;
  const double hi = *std::max_element(r.begin(), r.end());
  const double lo = *std::min_element(r.begin(), r.end());
  int near_max = 0, near_min = 0;
  for (double v : r) {
    if (v >= hi - 0.1 * (hi - lo)) ++near_max;
    if (v <= lo + 0.1 * (hi - lo)) ++near_min;
  }
  CHECK(static_cast<double>(near_max) / near_min >= 1.3);

  SUBCASE("symmetric sinusoid option removes the asymmetry") {
    cfg.resp_waveform = RespWaveform::sinusoid;
    const auto sym = make_cine_phantom(cfg);
    int smax = 0, smin = 0;
    for (double v : sym.truth.resp) {
      if (v >= 0.9) ++smax;
      if (v <= 0.1) ++smin;
    }
    CHECK(std::abs(smax - smin) <= 0.25 * smax);
  }
}

TEST_CASE("through-plane offset is zero at end-expiration") {
  auto cfg = small_cine();
  cfg.slices = 3;
  const auto ph = make_cine_phantom(cfg);
  for (int f = 0; f < cfg.frames; ++f) {
    CHECK(ph.truth.tp_offset_mm[f] ==
          doctest::Approx(cfg.resp_amp_throughplane_mm * (1.0 - ph.truth.resp[f])));
  }
}

TEST_CASE("generators are pure functions of config and seed") {
  auto cfg = small_cine();
  cfg.slices = 3;
  cfg.frames = 60;
  cfg.resp_rate_bpm = 50.0;
  cfg.resp_phase0 = -1.0;  // seed-derived phases
  cfg.cardiac_phase0 = -1.0;
  cfg.seed = 42;
  const auto a = make_cine_phantom(cfg);
  const auto b = make_cine_phantom(cfg);
  CHECK(a.slices[1].data == b.slices[1].data);
  CHECK(a.truth.lv_volume_ml == b.truth.lv_volume_ml);
  CHECK(a.truth.resp == b.truth.resp);

  cfg.seed = 43;
  const auto c = make_cine_phantom(cfg);
  CHECK(a.truth.resp != c.truth.resp);  // phases move with the seed
}

TEST_CASE("cine phantom input validation") {
  auto cfg = small_cine();
  SUBCASE("grid too small") {
    cfg.ny = 48;
    CHECK_THROWS(make_cine_phantom(cfg));
  }
  SUBCASE("ESV above EDV") {
    cfg.esv_ml = 200.0;
    CHECK_THROWS(make_cine_phantom(cfg));
  }
  SUBCASE("series shorter than two respiratory periods") {
    cfg.frames = 20;
    CHECK_THROWS(make_cine_phantom(cfg));
  }
  SUBCASE("heart slower than breathing") {
    cfg.heart_rate_bpm = 10.0;
    CHECK_THROWS(make_cine_phantom(cfg));
  }
}

TEST_CASE("steady flow truth follows the Poiseuille integral") {
  auto cfg = small_cine();
  cfg.heart_rate_bpm = 60.0;  // 1 s beat
  cfg.flow_waveform = FlowWaveform::steady;
  cfg.peak_velocity_cms = 100.0;
  cfg.vessel_radius_mm = 10.0;
  cfg.resp_amp_inplane_mm = 0.0;
  const auto ph = make_flow_phantom(cfg);
  // mean of the parabolic profile is v_peak/2: NFF = 0.5*100*pi*1cm^2*1s
  CHECK(ph.truth.nff_ml_per_beat == doctest::Approx(157.0796).epsilon(1e-6));
  CHECK(ph.truth.vmax_cms == doctest::Approx(100.0));
}

TEST_CASE("zero waveform gives zero flow") {
  auto cfg = small_cine();
  cfg.flow_waveform = FlowWaveform::zero;
  const auto ph = make_flow_phantom(cfg);
  CHECK(ph.truth.nff_ml_per_beat == 0.0);
  CHECK(ph.truth.vmax_cms == 0.0);
  for (double v : ph.velocity.data) CHECK(v == 0.0);
}

TEST_CASE("pulsatile truth NFF matches a fine trapezoid oracle within 2%") {
  auto cfg = small_cine();
  cfg.heart_rate_bpm = 75.0;
  cfg.flow_waveform = FlowWaveform::pulsatile;
  const auto ph = make_flow_phantom(cfg);

  // independent oracle: trapezoid rule on a 10x finer time grid, one beat
  const double beat_s = 60.0 / cfg.heart_rate_bpm;
  const int steps = 10 * cfg.frames;
  const double dt = beat_s / steps;
  const double r_cm = cfg.vessel_radius_mm / 10.0;
  auto flow_rate = [&](double t) {
    double theta = t / beat_s;
    theta -= std::floor(theta);
    const double w = 0.40;
    const double p = theta < w ? std::pow(std::sin(M_PI * theta / w), 2) : 0.0;
    return 0.5 * cfg.peak_velocity_cms * p * M_PI * r_cm * r_cm;
  };
  double oracle = 0.0;
  for (int i = 0; i < steps; ++i)
    oracle += 0.5 * (flow_rate(i * dt) + flow_rate((i + 1) * dt)) * dt;

  CHECK(ph.truth.nff_ml_per_beat == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("flow phantom input validation") {
  auto cfg = small_cine();
  SUBCASE("peak velocity must be positive") {
    cfg.peak_velocity_cms = 0.0;
    CHECK_THROWS(make_flow_phantom(cfg));
  }
  SUBCASE("vessel must fit with margin") {
    cfg.vessel_radius_mm = 160.0;
    CHECK_THROWS(make_flow_phantom(cfg));
  }
}

TEST_CASE("synthetic coil maps are deterministic with positive RSS") {
  const auto a = coil_maps_synthetic(8, 96, 96, 7);
  const auto b = coil_maps_synthetic(8, 96, 96, 7);
  CHECK(a.data == b.data);

  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      double rss = 0.0;
      for (int c = 0; c < 8; ++c) rss += std::norm(a.map(0, c)[y * 96 + x]);
      CHECK(rss > 0.0);
    }
  CHECK_THROWS(coil_maps_synthetic(1, 96, 96, 7));
}

TEST_CASE("coil maps are mutually distinct") {
  const auto maps = coil_maps_synthetic(8, 96, 96, 7);
  const size_t n = maps.map_size();
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) {
      cplx dot(0, 0);
      double na = 0, nb = 0;
      for (size_t i = 0; i < n; ++i) {
        dot += maps.map(0, a)[i] * std::conj(maps.map(0, b)[i]);
        na += std::norm(maps.map(0, a)[i]);
        nb += std::norm(maps.map(0, b)[i]);
      }
      CHECK(std::abs(dot) / std::sqrt(na * nb) < 0.95);
    }
}

TEST_CASE("bulk motion affects only scheduled coils") {
  const auto maps = coil_maps_synthetic(6, 64, 64, 3);
  SUBCASE("empty schedule returns the static maps") {
    const auto moved = apply_bulk_motion(maps, {}, 40, 40.0, 2.5);
    CHECK(moved.is_static());
    CHECK(moved.data == maps.data);
  }
  SUBCASE("locality of the corruption") {
    BulkMotionEvent ev{1.0, 10.0, {0, 1}};
    const auto moved = apply_bulk_motion(maps, {ev}, 40, 40.0, 2.5);
    REQUIRE(moved.frames == 40);
    for (int c = 0; c < 6; ++c) {
      double diff = 0.0;
      for (int f = 0; f < 40; ++f)
        for (size_t i = 0; i < maps.map_size(); ++i)
          diff += std::abs(moved.map(f, c)[i] - maps.map(0, c)[i]);
      if (c <= 1)
        CHECK(diff > 0.0);
      else
        CHECK(diff == 0.0);
    }
  }
  SUBCASE("bad coil index rejected") {
    BulkMotionEvent ev{1.0, 10.0, {6}};
    CHECK_THROWS(apply_bulk_motion(maps, {ev}, 40, 40.0, 2.5));
  }
  SUBCASE("period must exceed twice the frame interval") {
    BulkMotionEvent ev{0.05, 10.0, {0}};
    CHECK_THROWS(apply_bulk_motion(maps, {ev}, 40, 40.0, 2.5));
  }
}

TEST_CASE("bulk motion trace peaks at the schedule frequency") {
  const auto maps = coil_maps_synthetic(4, 64, 64, 3);
  const double dt_ms = 40.0;
  const int frames = 128;
  BulkMotionEvent ev{1.0, 8.0, {0}};  // 1 Hz pedaling
  const auto moved = apply_bulk_motion(maps, {ev}, frames, dt_ms, 2.5);

  // oracle: FFT of the per-frame map trace at the most-affected pixel
  size_t probe = 0;
  double best = 0.0;
  for (size_t i = 0; i < maps.map_size(); ++i) {
    const double dev = std::abs(moved.map(0, 0)[i] - moved.map(frames / 4, 0)[i]);
    if (dev > best) {
      best = dev;
      probe = i;
    }
  }
  std::vector<cplx> trace(frames);
  for (int f = 0; f < frames; ++f) trace[f] = moved.map(f, 0)[probe];
  cplx mean(0, 0);
  for (const auto& v : trace) mean += v;
  mean /= static_cast<double>(frames);
  for (auto& v : trace) v -= mean;
  fft::forward1(trace);

  int peak_bin = 1;
  for (int k = 2; k <= frames / 2; ++k)
    if (std::abs(trace[k]) > std::abs(trace[peak_bin])) peak_bin = k;
  const double fps = 1000.0 / dt_ms;
  const double peak_hz = fps * peak_bin / frames;
  CHECK(peak_hz == doctest::Approx(1.0).epsilon(0.25));  // within one spectral bin
}
