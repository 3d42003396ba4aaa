#include <doctest.h>

#include <cmath>
#include <vector>

#include "rtxc/detail/rng.hpp"
#include "rtxc/encode.hpp"
#include "rtxc/phantom.hpp"
#include "rtxc/quant.hpp"

using namespace rtxc;
using namespace rtxc::quant;

namespace {

// brute-force re-implementation of Lin's CCC used as the oracle: explicit
// two-pass population moments, no shared code with the library path
double ccc_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    var_a += (a[i] - mean_a) * (a[i] - mean_a);
    var_b += (b[i] - mean_b) * (b[i] - mean_b);
    cov += (a[i] - mean_a) * (b[i] - mean_b);
  }
  var_a /= n;
  var_b /= n;
  cov /= n;
  return 2.0 * cov / (var_a + var_b + (mean_a - mean_b) * (mean_a - mean_b));
}

double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double c = ccc_oracle(a, a) * 0 + 0;  // silence unused-warning patterns
  (void)c;
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double cov = 0, va = 0, vb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

// rasterized full ellipsoid masks: semi-axes a along the slice normal, (b, c)
// in plane; slice stack centered on the ellipsoid
std::vector<MaskSeries> ellipsoid_masks(double a_mm, double b_mm, double c_mm, int slices,
                                        double thickness_mm, int grid, double pixel_mm) {
  std::vector<MaskSeries> masks;
  for (int j = 0; j < slices; ++j) {
    MaskSeries m(1, grid, grid, pixel_mm, 0.0);
    const double z = (j + 0.5) * thickness_mm - 0.5 * slices * thickness_mm;
    const double shape = 1.0 - (z / a_mm) * (z / a_mm);
    if (shape > 0.0) {
      for (int y = 0; y < grid; ++y)
        for (int x = 0; x < grid; ++x) {
          const double ym = (y - 0.5 * (grid - 1)) * pixel_mm;
          const double xm = (x - 0.5 * (grid - 1)) * pixel_mm;
          const double r = (ym * ym) / (b_mm * b_mm) + (xm * xm) / (c_mm * c_mm);
          m.at(0, y, x) = r <= shape ? 1 : 0;
        }
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

}  // namespace

TEST_CASE("static ellipsoid volume matches the analytic value within 3%") {
  const double a = 30.0, b = 25.0, c = 25.0;  // semi-axes, mm
  const double analytic_ml = 4.0 / 3.0 * M_PI * a * b * c / 1000.0;  // 78.54 mL
  const double pixel = 1.5;
  const auto masks = ellipsoid_masks(a, b, c, 11, 6.0, 96, pixel);
  const auto vol = ventricular_volumes(masks, 0, 1, 6.0, pixel * pixel);
  CHECK(vol.edv_ml == doctest::Approx(analytic_ml).epsilon(0.03));
}

TEST_CASE("empty masks raise an error") {
  std::vector<MaskSeries> masks(3, MaskSeries(2, 8, 8, 1.0, 0.0));
  CHECK_THROWS((void)ventricular_volumes(masks, 0, 2, 6.0, 1.0));
}

TEST_CASE("phantom volumes and EF are quantified within tolerance") {
  phantom::PhantomConfig cfg;
  cfg.ny = cfg.nx = 144;
  cfg.pixel_mm = 2.1;
  cfg.slices = 11;
  cfg.frames = 44;
  cfg.frame_interval_ms = 40.0;
  cfg.heart_rate_bpm = 75.0;  // exactly one 20-frame beat inside [0, 20)
  cfg.resp_rate_bpm = 70.0;
  cfg.resp_amp_inplane_mm = 0.0;
  cfg.resp_amp_throughplane_mm = 0.0;
  cfg.edv_ml = 150.0;
  cfg.esv_ml = 60.0;
  cfg.cardiac_phase0 = 0.0;
  cfg.resp_phase0 = 0.0;
  const auto ph = phantom::make_cine_phantom(cfg);

  const auto lv = ventricular_volumes(ph.truth.lv_mask, 0, 20, cfg.slice_thickness_mm,
                                      cfg.pixel_mm * cfg.pixel_mm);
  CHECK(lv.edv_ml == doctest::Approx(150.0).epsilon(0.03));
  CHECK(lv.esv_ml == doctest::Approx(60.0).epsilon(0.03));
  const auto params = function_params(lv.edv_ml, lv.esv_ml, cfg.heart_rate_bpm, "rest");
  CHECK(std::abs(params.ef_percent - 60.0) <= 2.0);
}

TEST_CASE("function parameter definitions") {
  const auto p = function_params(150.0, 60.0, 70.0, "rest");
  CHECK(p.sv_ml == doctest::Approx(90.0));
  CHECK(p.ef_percent == doctest::Approx(60.0));
  CHECK(p.co_lpm == doctest::Approx(6.3));

  SUBCASE("boundary: ESV equals EDV") {
    const auto zero = function_params(150.0, 150.0, 70.0);
    CHECK(zero.sv_ml == 0.0);
    CHECK(zero.ef_percent == 0.0);
  }
  SUBCASE("ESV above EDV rejected") { CHECK_THROWS((void)function_params(100.0, 150.0, 70.0)); }
  SUBCASE("stage sweep arithmetic") {
    const auto rest = function_params(150.0, 60.0, 70.0, "rest");
    const auto stress = function_params(150.0, 40.0, 140.0, "60W");
    CHECK(rest.ef_percent == doctest::Approx(60.0));
    CHECK(stress.ef_percent == doctest::Approx(73.333333).epsilon(1e-6));
    CHECK(rest.co_lpm == doctest::Approx(6.3));
    CHECK(stress.co_lpm == doctest::Approx(15.4));
  }
}

TEST_CASE("steady Poiseuille flow is quantified within 5% of the analytic NFF") {
  phantom::PhantomConfig cfg;
  cfg.ny = cfg.nx = 96;
  cfg.pixel_mm = 2.0;
  cfg.slices = 1;
  cfg.frames = 52;
  cfg.frame_interval_ms = 40.0;
  cfg.heart_rate_bpm = 60.0;  // 1 s beat = 25 frames
  cfg.resp_rate_bpm = 59.0;
  cfg.resp_amp_inplane_mm = 0.0;
  cfg.vessel_radius_mm = 10.0;
  cfg.peak_velocity_cms = 100.0;
  cfg.flow_waveform = phantom::FlowWaveform::steady;
  const auto ph = phantom::make_flow_phantom(cfg);

  const auto fp = flow_metrics(ph.velocity, ph.truth.vessel_mask, 0, 25,
                               cfg.pixel_mm * cfg.pixel_mm, 60.0, "AAo");
  CHECK(fp.nff_ml == doctest::Approx(157.0796).epsilon(0.05));
  CHECK(fp.sv_ml == fp.nff_ml);
  CHECK(fp.co_lpm == doctest::Approx(fp.nff_ml * 60.0 / 1000.0));
  // 95th-percentile peak estimator sits just below the axis velocity
  CHECK(fp.vmax_cms > 0.85 * 100.0);
  CHECK(fp.vmax_cms <= 100.0);

  SUBCASE("zero velocity field") {
    RealSeries zero = ph.velocity;
    std::fill(zero.data.begin(), zero.data.end(), 0.0);
    const auto z = flow_metrics(zero, ph.truth.vessel_mask, 0, 25, 4.0, 60.0);
    CHECK(z.nff_ml == 0.0);
    CHECK(z.vmax_cms == 0.0);
  }
  SUBCASE("linearity in the velocity field") {
    RealSeries doubled = ph.velocity;
    for (auto& v : doubled.data) v *= 2.0;
    const auto d = flow_metrics(doubled, ph.truth.vessel_mask, 0, 25, 4.0, 60.0);
    const auto s = flow_metrics(ph.velocity, ph.truth.vessel_mask, 0, 25, 4.0, 60.0);
    CHECK(d.nff_ml == doctest::Approx(2.0 * s.nff_ml).epsilon(1e-12));
  }
}

TEST_CASE("identical NFF when quantified through different alias-free VENCs") {
  phantom::PhantomConfig cfg;
  cfg.ny = cfg.nx = 64;
  cfg.pixel_mm = 2.0;
  cfg.slices = 1;
  cfg.frames = 22;
  cfg.frame_interval_ms = 50.0;
  cfg.resp_rate_bpm = 112.0;  // short series
  cfg.heart_rate_bpm = 120.0;
  cfg.vessel_radius_mm = 8.0;
  cfg.peak_velocity_cms = 100.0;
  cfg.flow_waveform = phantom::FlowWaveform::steady;
  cfg.resp_amp_inplane_mm = 0.0;
  const auto ph = phantom::make_flow_phantom(cfg);

  auto quantify = [&](double venc) {
    const encode::FlowEncodingSpec spec{venc};
    const auto pair = encode::flow_encode(ph.velocity, ph.magnitude, spec);
    const auto phase = encode::phase_difference(pair.compensated, pair.encoded);
    const auto vel = encode::phase_to_velocity(phase, spec);
    return flow_metrics(vel, ph.truth.vessel_mask, 0, 10, 4.0, 120.0).nff_ml;
  };
  CHECK(std::abs(quantify(150.0) - quantify(300.0)) < 1e-6);
}

TEST_CASE("nmae follows its definition") {
  CHECK(nmae(100.0, 110.0) == doctest::Approx(100.0 * 10.0 / 105.0).epsilon(1e-12));
  CHECK(nmae(42.0, 42.0) == 0.0);
  CHECK_THROWS((void)nmae(5.0, -5.0));

  // symmetry, non-negativity, joint scale invariance
  detail::SplitMix64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const double a = 10.0 + 100.0 * rng.uniform();
    const double b = 10.0 + 100.0 * rng.uniform();
    const double s = 0.5 + 4.0 * rng.uniform();
    CHECK(nmae(a, b) == doctest::Approx(nmae(b, a)).epsilon(1e-12));
    CHECK(nmae(a, b) >= 0.0);
    CHECK(nmae(s * a, s * b) == doctest::Approx(nmae(a, b)).epsilon(1e-12));
    if (a != b) CHECK(nmae(a, b) > 0.0);
  }
}

TEST_CASE("ccc matches the brute-force oracle to 1e-12") {
  detail::SplitMix64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = 10.0 * rng.gaussian();
      b[i] = 0.8 * a[i] + 2.0 * rng.gaussian() + 1.0;
    }
    CHECK(ccc(a, b) == doctest::Approx(ccc_oracle(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("ccc properties") {
  std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(ccc(a, a) == doctest::Approx(1.0));

  SUBCASE("location shift penalized below perfect correlation") {
    std::vector<double> b(a);
    for (auto& v : b) v += 2.0;
    CHECK(ccc(a, b) < 1.0);
    CHECK(pearson_oracle(a, b) == doctest::Approx(1.0));
    CHECK(std::abs(ccc(a, b)) <= std::abs(pearson_oracle(a, b)) + 1e-12);
  }
  SUBCASE("invariant under a joint positive affine transform") {
    std::vector<double> a2(a), b(a);
    for (auto& v : b) v += 1.5;
    std::vector<double> a_t(a2), b_t(b);
    for (auto& v : a_t) v = 3.0 * v - 7.0;
    for (auto& v : b_t) v = 3.0 * v - 7.0;
    CHECK(ccc(a_t, b_t) == doctest::Approx(ccc(a2, b)).epsilon(1e-12));
  }
  SUBCASE("constant series") {
    std::vector<double> c5(4, 5.0), c5b(4, 5.0), c7(4, 7.0);
    CHECK(ccc(c5, c5b) == 1.0);
    CHECK(ccc(c5, c7) == 0.0);
  }
}

TEST_CASE("repeatability report") {
  std::vector<QuantRecord> rep1, rep2;
  for (int subject = 0; subject < 5; ++subject) {
    for (const char* param : {"LV_EF", "LV_CO"}) {
      rep1.push_back({subject, "rest", param, 50.0 + subject});
      rep2.push_back({subject, "rest", param, 50.0 + subject});
    }
  }
  SUBCASE("identical repeats: zero NMAE, unit CCC") {
    const auto table = repeatability_report(rep1, rep2, "EE");
    REQUIRE(table.size() == 2);
    for (const auto& e : table) {
      CHECK(e.nmae_median == 0.0);
      CHECK(e.ccc == doctest::Approx(1.0));
      CHECK(e.mode == "EE");
    }
  }
  SUBCASE("mismatched keys rejected") {
    rep2.pop_back();
    rep2.push_back({4, "rest", "RV_EF", 50.0});
    CHECK_THROWS((void)repeatability_report(rep1, rep2, "EE"));
  }
}
