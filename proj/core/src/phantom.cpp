#include "rtxc/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtxc/detail/rng.hpp"

namespace rtxc::phantom {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMyoWallMm = 9.0;
constexpr double kRvWallMm = 4.0;
constexpr double kBloodIntensity = 1.0;
constexpr double kMyoIntensity = 0.4;
constexpr double kTissueIntensity = 0.3;
constexpr double kVesselIntensity = 0.8;
constexpr double kPulseWidth = 0.40;  ///< systolic fraction of the flow waveform

// Respiratory waveform in [0, 1], maximum plateau at end-expiration. skew=1
// gives a symmetric sinusoid; larger skew lengthens the expiratory dwell.
double resp_value(double tau, double skew, RespWaveform kind) {
  const double s = std::sin(kPi * tau);
  const double q = (kind == RespWaveform::sinusoid) ? 1.0 : skew;
  return 1.0 - std::pow(s * s, q);
}

// Ventricular contraction in [0, 1] with end-diastolic and end-systolic
// plateaus so extrema are robust to frame quantization. 0 = end-diastole.
double contraction(double theta) {
  constexpr double t1 = 0.06, t2 = 0.33, t3 = 0.45, t4 = 0.72;
  if (theta < t1 || theta >= t4) return 0.0;
  if (theta < t2) return 0.5 * (1.0 - std::cos(kPi * (theta - t1) / (t2 - t1)));
  if (theta < t3) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (theta - t3) / (t4 - t3)));
}

double flow_waveform_value(double theta, FlowWaveform kind) {
  switch (kind) {
    case FlowWaveform::steady: return 1.0;
    case FlowWaveform::zero: return 0.0;
    case FlowWaveform::pulsatile: {
      if (theta >= kPulseWidth) return 0.0;
      const double s = std::sin(kPi * theta / kPulseWidth);
      return s * s;
    }
  }
  return 0.0;
}

// mean of the flow waveform over one beat (closed form)
double flow_waveform_mean(FlowWaveform kind) {
  switch (kind) {
    case FlowWaveform::steady: return 1.0;
    case FlowWaveform::zero: return 0.0;
    case FlowWaveform::pulsatile: return kPulseWidth / 2.0;
  }
  return 0.0;
}

// area of the intersection of two disks with center distance d
double lens_area(double r1, double r2, double d) {
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) {
    const double r = std::min(r1, r2);
    return kPi * r * r;
  }
  const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
  const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
  const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
  return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * std::sqrt(std::max(k, 0.0));
}

struct HeartGeometry {
  double lv_a;       ///< LV cavity in-plane semi-axis at end-diastole (mm)
  double lv_c;       ///< LV long-axis extent = slice stack depth (mm)
  double epi_a;      ///< epicardial in-plane semi-axis
  double epi_c;
  double rv_base_r;  ///< RV cavity disk radius at the base, end-diastole
  double rv_sep_mm;  ///< LV-to-RV center distance
  double rv_scale_es;
};

// Crescent cross-section: RV disk minus the fixed epicardial disk.
double rv_area(const HeartGeometry& g, double zeta, double scale) {
  if (zeta < 0.0 || zeta >= g.lv_c) return 0.0;
  const double shape = std::sqrt(1.0 - (zeta / g.lv_c) * (zeta / g.lv_c));
  const double r_rv = g.rv_base_r * scale * shape;
  const double epi = (zeta < g.epi_c)
                         ? g.epi_a * std::sqrt(1.0 - (zeta / g.epi_c) * (zeta / g.epi_c))
                         : 0.0;
  return std::max(0.0, kPi * r_rv * r_rv - lens_area(r_rv, epi, g.rv_sep_mm));
}

double rv_volume_ml(const HeartGeometry& g, double scale) {
  constexpr int kSteps = 1024;
  const double dz = g.lv_c / kSteps;
  double v = 0.0;
  for (int i = 0; i < kSteps; ++i) v += rv_area(g, (i + 0.5) * dz, scale) * dz;
  return v / 1000.0;
}

HeartGeometry calibrate_geometry(const PhantomConfig& cfg) {
  HeartGeometry g;
  g.lv_c = cfg.slices * cfg.slice_thickness_mm;
  g.lv_a = std::sqrt(3.0 * cfg.edv_ml * 1000.0 / (2.0 * kPi * g.lv_c));
  g.epi_a = g.lv_a + kMyoWallMm;
  g.epi_c = g.lv_c + kMyoWallMm;
  g.rv_sep_mm = g.lv_a + 2.0;

  // base radius such that the end-diastolic crescent volume hits the target
  double lo = 1.0, hi = g.epi_a + g.rv_sep_mm + 60.0;
  for (int i = 0; i < 80; ++i) {
    g.rv_base_r = 0.5 * (lo + hi);
    (rv_volume_ml(g, 1.0) < cfg.edv_ml ? lo : hi) = g.rv_base_r;
  }
  g.rv_base_r = 0.5 * (lo + hi);

  // in-plane scale at end-systole for the ESV target
  lo = 0.05;
  hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    g.rv_scale_es = 0.5 * (lo + hi);
    (rv_volume_ml(g, g.rv_scale_es) < cfg.esv_ml ? lo : hi) = g.rv_scale_es;
  }
  g.rv_scale_es = 0.5 * (lo + hi);
  return g;
}

struct FrameState {
  double resp;          // waveform value in [0,1]
  double theta;         // cardiac phase
  double dy_mm;         // in-plane translation
  double tp_mm;         // through-plane shift
  double lv_scale;      // cavity scale factor (all axes)
  double rv_scale;      // RV in-plane scale
  double lv_volume_ml;
};

std::vector<FrameState> frame_states(const PhantomConfig& cfg, const HeartGeometry& g) {
  detail::SplitMix64 rng(detail::substream(cfg.seed, 0x9a1f));
  const double resp_phase = cfg.resp_phase0 >= 0.0 ? cfg.resp_phase0 : rng.uniform();
  const double cardiac_phase = cfg.cardiac_phase0 >= 0.0 ? cfg.cardiac_phase0 : rng.uniform();
  const double f_resp = cfg.resp_rate_bpm / 60.0;
  const double f_card = cfg.heart_rate_bpm / 60.0;

  std::vector<FrameState> states(cfg.frames);
  for (int f = 0; f < cfg.frames; ++f) {
    const double t = f * cfg.frame_interval_ms / 1000.0;
    FrameState& st = states[f];
    double tau = t * f_resp + resp_phase;
    tau -= std::floor(tau);
    st.resp = resp_value(tau, cfg.resp_skew, cfg.resp_waveform);
    double th = t * f_card + cardiac_phase;
    st.theta = th - std::floor(th);
    st.dy_mm = cfg.resp_amp_inplane_mm * (1.0 - st.resp);
    st.tp_mm = cfg.resp_amp_throughplane_mm * (1.0 - st.resp);
    st.lv_volume_ml = cfg.edv_ml - (cfg.edv_ml - cfg.esv_ml) * contraction(st.theta);
    st.lv_scale = std::cbrt(st.lv_volume_ml / cfg.edv_ml);
    st.rv_scale = 1.0 - (1.0 - g.rv_scale_es) * contraction(st.theta);
  }
  return states;
}

}  // namespace

std::vector<double> PhantomConfig::slice_centers_mm() const {
  if (!slice_positions_mm.empty()) return slice_positions_mm;
  std::vector<double> z(slices);
  for (int j = 0; j < slices; ++j) z[j] = (j + 0.5) * slice_thickness_mm;
  return z;
}

void PhantomConfig::validate() const {
  require(heart_rate_bpm > resp_rate_bpm, "phantom: heart rate must exceed respiratory rate");
  require(duration_s() * resp_rate_bpm / 60.0 >= 2.0,
          "phantom: series must cover at least two respiratory periods");
  require(esv_ml < edv_ml, "phantom: ESV target must be below EDV target");
  require(ny > 0 && nx > 0 && frames > 0 && slices > 0, "phantom: dimensions must be positive");
  require(pixel_mm > 0.0 && slice_thickness_mm > 0.0 && frame_interval_ms > 0.0 &&
              heart_rate_bpm > 0.0 && resp_rate_bpm > 0.0 && edv_ml > 0.0 && esv_ml > 0.0,
          "phantom: physical parameters must be positive");
  require(resp_amp_inplane_mm >= 0.0 && resp_amp_throughplane_mm >= 0.0,
          "phantom: respiratory amplitudes must be non-negative");
  require(resp_skew >= 1.0, "phantom: respiratory skew must be >= 1");
  require(coils >= 1, "phantom: need at least one coil");
}

double PhantomTruth::true_ef_percent() const {
  const double edv = *std::max_element(lv_volume_ml.begin(), lv_volume_ml.end());
  const double esv = *std::min_element(lv_volume_ml.begin(), lv_volume_ml.end());
  return 100.0 * (edv - esv) / edv;
}

CinePhantom make_cine_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  require(cfg.ny >= 64 && cfg.nx >= 64, "make_cine_phantom: grid must be at least 64x64");

  const HeartGeometry geo = calibrate_geometry(cfg);
  const auto states = frame_states(cfg, geo);
  const auto slice_z = cfg.slice_centers_mm();

  CinePhantom out;
  out.truth.lv_volume_ml.resize(cfg.frames);
  out.truth.rv_volume_ml.resize(cfg.frames);
  out.truth.resp.resize(cfg.frames);
  out.truth.cardiac_phase.resize(cfg.frames);
  out.truth.tp_offset_mm.resize(cfg.frames);
  for (int f = 0; f < cfg.frames; ++f) {
    out.truth.lv_volume_ml[f] = states[f].lv_volume_ml;
    out.truth.rv_volume_ml[f] = rv_volume_ml(geo, states[f].rv_scale);
    out.truth.resp[f] = states[f].resp;
    out.truth.cardiac_phase[f] = states[f].theta;
    out.truth.tp_offset_mm[f] = states[f].tp_mm;
  }

  // heart center sits slightly low-left of the grid center
  const double heart_cy = 0.03 * cfg.fov_y_mm();
  const double heart_cx = -0.08 * cfg.fov_x_mm();
  const double torso_ry = 0.40 * cfg.fov_y_mm();
  const double torso_rx = 0.46 * cfg.fov_x_mm();

  out.slices.reserve(cfg.slices);
  out.truth.lv_mask.reserve(cfg.slices);
  out.truth.rv_mask.reserve(cfg.slices);
  out.truth.anatomy_mask.reserve(cfg.slices);

  for (int j = 0; j < cfg.slices; ++j) {
    ImageSeries img(cfg.frames, cfg.ny, cfg.nx, cfg.pixel_mm, cfg.frame_interval_ms);
    MaskSeries lv(cfg.frames, cfg.ny, cfg.nx, cfg.pixel_mm, cfg.frame_interval_ms);
    MaskSeries rv = lv, anat = lv;

    for (int f = 0; f < cfg.frames; ++f) {
      const FrameState& st = states[f];
      const double zeta = slice_z[j] + st.tp_mm;  // anatomy coordinate seen by this slice
      const double lv_a = geo.lv_a * st.lv_scale;
      const double lv_c = geo.lv_c * st.lv_scale;
      const double rv_shape =
          (zeta >= 0.0 && zeta < geo.lv_c)
              ? std::sqrt(1.0 - (zeta / geo.lv_c) * (zeta / geo.lv_c))
              : 0.0;
      const double rv_r = geo.rv_base_r * st.rv_scale * rv_shape;
      const double rv_wall_r = rv_r > 0.0 ? rv_r + kRvWallMm * rv_shape : 0.0;

      for (int y = 0; y < cfg.ny; ++y) {
        const double ym = (y - 0.5 * (cfg.ny - 1)) * cfg.pixel_mm;
        for (int x = 0; x < cfg.nx; ++x) {
          const double xm = (x - 0.5 * (cfg.nx - 1)) * cfg.pixel_mm;
          double val = 0.0;
          const double ty = ym / torso_ry, tx = xm / torso_rx;
          if (ty * ty + tx * tx <= 1.0) val = kTissueIntensity;

          const double hy = ym - heart_cy - st.dy_mm;
          const double hx = xm - heart_cx;
          const double rho2 = hy * hy + hx * hx;

          bool in_epi = false, in_lv = false, in_rv = false, in_rv_epi = false;
          if (zeta >= 0.0) {
            const double ez = zeta / geo.epi_c;
            in_epi = ez < 1.0 && rho2 / (geo.epi_a * geo.epi_a) + ez * ez <= 1.0;
            const double lz = zeta / lv_c;
            in_lv = lz < 1.0 && rho2 / (lv_a * lv_a) + lz * lz <= 1.0;
            if (rv_r > 0.0) {
              const double ry = hy, rx = hx + geo.rv_sep_mm;
              const double rr2 = ry * ry + rx * rx;
              in_rv = rr2 <= rv_r * rv_r && !in_epi;
              in_rv_epi = rr2 <= rv_wall_r * rv_wall_r;
            }
          }
          if (in_epi || in_rv_epi) val = kMyoIntensity;
          if (in_lv || in_rv) val = kBloodIntensity;

          img.at(f, y, x) = val;
          lv.at(f, y, x) = in_lv ? 1 : 0;
          rv.at(f, y, x) = in_rv ? 1 : 0;
          anat.at(f, y, x) = (in_epi || in_rv_epi) ? 1 : 0;
        }
      }
    }
    out.slices.push_back(std::move(img));
    out.truth.lv_mask.push_back(std::move(lv));
    out.truth.rv_mask.push_back(std::move(rv));
    out.truth.anatomy_mask.push_back(std::move(anat));
  }
  return out;
}

FlowPhantom make_flow_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  require(cfg.peak_velocity_cms > 0.0, "make_flow_phantom: peak velocity must be positive");
  const double margin = cfg.vessel_radius_mm + cfg.resp_amp_inplane_mm + 4.0 * cfg.pixel_mm;
  require(margin <= 0.5 * std::min(cfg.fov_y_mm(), cfg.fov_x_mm()),
          "make_flow_phantom: vessel does not fit inside the grid with a 4-pixel margin");

  const HeartGeometry geo = calibrate_geometry(cfg);
  const auto states = frame_states(cfg, geo);

  FlowPhantom out;
  out.velocity = RealSeries(cfg.frames, cfg.ny, cfg.nx, cfg.pixel_mm, cfg.frame_interval_ms);
  out.magnitude = RealSeries(cfg.frames, cfg.ny, cfg.nx, cfg.pixel_mm, cfg.frame_interval_ms);
  out.truth.vessel_mask = MaskSeries(cfg.frames, cfg.ny, cfg.nx, cfg.pixel_mm,
                                     cfg.frame_interval_ms);
  out.truth.resp.resize(cfg.frames);
  out.truth.cardiac_phase.resize(cfg.frames);
  out.truth.tp_offset_mm.resize(cfg.frames);
  out.truth.flow_rate_mls.resize(cfg.frames);

  const double torso_ry = 0.40 * cfg.fov_y_mm();
  const double torso_rx = 0.46 * cfg.fov_x_mm();
  const double r_cm = cfg.vessel_radius_mm / 10.0;
  const double beat_s = 60.0 / cfg.heart_rate_bpm;

  out.truth.nff_ml_per_beat =
      0.5 * cfg.peak_velocity_cms * kPi * r_cm * r_cm * flow_waveform_mean(cfg.flow_waveform) *
      beat_s;
  out.truth.vmax_cms =
      cfg.flow_waveform == FlowWaveform::zero ? 0.0 : cfg.peak_velocity_cms;

  for (int f = 0; f < cfg.frames; ++f) {
    const FrameState& st = states[f];
    const double pulse = flow_waveform_value(st.theta, cfg.flow_waveform);
    out.truth.resp[f] = st.resp;
    out.truth.cardiac_phase[f] = st.theta;
    out.truth.tp_offset_mm[f] = st.tp_mm;
    out.truth.flow_rate_mls[f] = 0.5 * cfg.peak_velocity_cms * pulse * kPi * r_cm * r_cm;

    for (int y = 0; y < cfg.ny; ++y) {
      const double ym = (y - 0.5 * (cfg.ny - 1)) * cfg.pixel_mm;
      for (int x = 0; x < cfg.nx; ++x) {
        const double xm = (x - 0.5 * (cfg.nx - 1)) * cfg.pixel_mm;
        const double ty = ym / torso_ry, tx = xm / torso_rx;
        double mag = (ty * ty + tx * tx <= 1.0) ? kTissueIntensity : 0.0;

        const double vy = ym - st.dy_mm, vx = xm;
        const double rho2 = vy * vy + vx * vx;
        const double r2 = cfg.vessel_radius_mm * cfg.vessel_radius_mm;
        double vel = 0.0;
        bool in_vessel = rho2 <= r2;
        if (in_vessel) {
          mag = kVesselIntensity;
          vel = cfg.peak_velocity_cms * pulse * (1.0 - rho2 / r2);
        }
        out.velocity.at(f, y, x) = vel;
        out.magnitude.at(f, y, x) = mag;
        out.truth.vessel_mask.at(f, y, x) = in_vessel ? 1 : 0;
      }
    }
  }
  return out;
}

CoilMaps coil_maps_synthetic(int ncoils, int ny, int nx, uint64_t seed) {
  require(ncoils >= 2, "coil_maps_synthetic: need at least two coils");

  CoilMaps maps(1, ncoils, ny, nx);
  const double ring_r = 0.75 * 0.5 * std::min(ny, nx);
  const double width = 0.45 * 0.5 * std::min(ny, nx);
  const double cy = 0.5 * (ny - 1), cx = 0.5 * (nx - 1);

  for (int c = 0; c < ncoils; ++c) {
    detail::SplitMix64 rng(detail::substream(seed, 0xc011, static_cast<uint64_t>(c)));
    const double angle = 2.0 * kPi * c / ncoils + 0.5 * (rng.uniform() - 0.5) / ncoils;
    const double ly = cy + ring_r * std::sin(angle);
    const double lx = cx + ring_r * std::cos(angle);
    const double amp = 0.7 + 0.3 * rng.uniform();
    const double phase0 = 2.0 * kPi * rng.uniform();
    const double gy = (rng.uniform() - 0.5) * 1.6 / ny;
    const double gx = (rng.uniform() - 0.5) * 1.6 / nx;

    cplx* m = maps.map(0, c);
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const double d2 = (y - ly) * (y - ly) + (x - lx) * (x - lx);
        const double mag = amp * std::exp(-d2 / (2.0 * width * width));
        const double ph = phase0 + 2.0 * kPi * (gy * (y - cy) + gx * (x - cx));
        m[static_cast<size_t>(y) * nx + x] = std::polar(mag, ph);
      }
    }
  }
  return maps;
}

CoilMaps apply_bulk_motion(const CoilMaps& maps, const std::vector<BulkMotionEvent>& schedule,
                           int frames, double frame_interval_ms, double pixel_mm) {
  require(maps.is_static(), "apply_bulk_motion: input maps must be static");
  for (const auto& ev : schedule) {
    require(ev.period_s * 1000.0 > 2.0 * frame_interval_ms,
            "apply_bulk_motion: schedule period must exceed twice the frame interval");
    for (int c : ev.coils)
      require(c >= 0 && c < maps.coils, "apply_bulk_motion: affected-coil index out of range");
  }
  if (schedule.empty()) return maps;

  CoilMaps out(frames, maps.coils, maps.ny, maps.nx);
  for (int f = 0; f < frames; ++f)
    for (int c = 0; c < maps.coils; ++c)
      std::copy_n(maps.map(0, c), maps.map_size(), out.map(f, c));

  for (const auto& ev : schedule) {
    for (int c : ev.coils) {
      // directions avoid the pure phase-encode axis, which a readout-
      // projection navigator cannot see
      const double angle = 2.0 * kPi * c / maps.coils + kPi / 4.0;
      const double dir_y = std::cos(angle);
      const double dir_x = std::sin(angle);
      const double phase = 2.0 * kPi * 0.6180339887498949 * c;
      for (int f = 0; f < frames; ++f) {
        const double t = f * frame_interval_ms / 1000.0;
        const double shift_px =
            ev.amplitude_mm / pixel_mm * std::sin(2.0 * kPi * t / ev.period_s + phase);
        const double sy = dir_y * shift_px, sx = dir_x * shift_px;
        const cplx* src = maps.map(0, c);
        cplx* dst = out.map(f, c);
        for (int y = 0; y < maps.ny; ++y) {
          for (int x = 0; x < maps.nx; ++x) {
            // bilinear sample of the static map at the shifted location
            const double yy = std::clamp(y - sy, 0.0, maps.ny - 1.0);
            const double xx = std::clamp(x - sx, 0.0, maps.nx - 1.0);
            const int y0 = static_cast<int>(yy), x0 = static_cast<int>(xx);
            const int y1 = std::min(y0 + 1, maps.ny - 1), x1 = std::min(x0 + 1, maps.nx - 1);
            const double fy = yy - y0, fx = xx - x0;
            const cplx v = (1 - fy) * ((1 - fx) * src[static_cast<size_t>(y0) * maps.nx + x0] +
                                       fx * src[static_cast<size_t>(y0) * maps.nx + x1]) +
                           fy * ((1 - fx) * src[static_cast<size_t>(y1) * maps.nx + x0] +
                                 fx * src[static_cast<size_t>(y1) * maps.nx + x1]);
            dst[static_cast<size_t>(y) * maps.nx + x] = v;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace rtxc::phantom
