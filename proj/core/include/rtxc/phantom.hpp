#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtxc/types.hpp"

namespace rtxc::phantom {

struct BulkMotionEvent {
  double period_s = 1.0;      ///< pedaling period
  double amplitude_mm = 0.0;  ///< lobe translation amplitude
  std::vector<int> coils;     ///< affected coil indices
};

enum class FlowWaveform { steady, pulsatile, zero };
enum class RespWaveform { skewed, sinusoid };

/// All knobs of the synthetic acquisition. Amplitudes are peak-to-peak
/// excursions over one respiratory cycle; the excursion is zero at
/// end-expiration and maximal at end-inspiration.
struct PhantomConfig {
  int ny = 144;
  int nx = 144;
  double pixel_mm = 2.1;
  double slice_thickness_mm = 6.0;
  int slices = 11;
  std::vector<double> slice_positions_mm;  ///< slice centers; empty = contiguous stack from 0
  int frames = 150;
  double frame_interval_ms = 40.0;
  double heart_rate_bpm = 70.0;
  double resp_rate_bpm = 20.0;           ///< breaths per minute
  double resp_amp_inplane_mm = 4.0;
  double resp_amp_throughplane_mm = 8.0;
  double resp_skew = 2.5;                ///< >= 1; dwell asymmetry of the expiratory plateau
  RespWaveform resp_waveform = RespWaveform::skewed;
  std::string stage = "rest";
  double edv_ml = 150.0;
  double esv_ml = 60.0;
  double vessel_radius_mm = 10.0;
  double peak_velocity_cms = 100.0;
  FlowWaveform flow_waveform = FlowWaveform::pulsatile;
  int coils = 8;
  std::vector<BulkMotionEvent> bulk_motion;
  uint64_t seed = 1;
  double resp_phase0 = -1.0;     ///< [0,1) starting phase; negative = derive from seed
  double cardiac_phase0 = -1.0;

  double fov_y_mm() const { return ny * pixel_mm; }
  double fov_x_mm() const { return nx * pixel_mm; }
  double duration_s() const { return frames * frame_interval_ms / 1000.0; }
  std::vector<double> slice_centers_mm() const;
  void validate() const;  ///< throws std::invalid_argument on violated invariants
};

/// Ground truth for one simulated acquisition. Volumes are analytic (from the
/// shape parameters, not the rasterized masks) and unaffected by respiratory
/// motion; the masks see the motion, exactly like a segmentation would.
struct PhantomTruth {
  std::vector<MaskSeries> lv_mask;       ///< per slice
  std::vector<MaskSeries> rv_mask;
  std::vector<MaskSeries> anatomy_mask;  ///< epicardial envelope, per slice
  std::vector<double> lv_volume_ml;      ///< per frame
  std::vector<double> rv_volume_ml;
  std::vector<double> resp;              ///< in [0,1], end-expiration at the maximum plateau
  std::vector<double> cardiac_phase;     ///< in [0,1), 0 = end-diastole
  std::vector<double> tp_offset_mm;      ///< through-plane shift per frame

  // flow phantom only
  MaskSeries vessel_mask;                ///< per-frame vessel ROI
  std::vector<double> flow_rate_mls;     ///< analytic instantaneous flow rate
  double nff_ml_per_beat = 0.0;
  double vmax_cms = 0.0;

  double true_ef_percent() const;
};

struct CinePhantom {
  std::vector<ImageSeries> slices;
  PhantomTruth truth;
};

struct FlowPhantom {
  RealSeries velocity;   ///< cm/s
  RealSeries magnitude;
  PhantomTruth truth;
};

/// Bright-blood short-axis stack: prolate half-ellipsoid LV cavity with
/// time-varying radii, crescent RV, mid-gray myocardium, respiratory
/// translation in-plane and through-plane re-slicing of the analytic shape.
CinePhantom make_cine_phantom(const PhantomConfig& config);

/// Single phase-contrast slice: circular vessel with a Poiseuille profile
/// scaled by a pulsatile waveform.
FlowPhantom make_flow_phantom(const PhantomConfig& config);

/// Smooth complex Gaussian-lobe sensitivities at equispaced angles around the
/// torso. Deterministic in the seed; root-sum-of-squares is positive
/// everywhere.
CoilMaps coil_maps_synthetic(int ncoils, int ny, int nx, uint64_t seed);

/// Pedaling-induced sensitivity fluctuation: affected coils' lobes translate
/// periodically (bilinear resampling of the static map); unaffected coils
/// stay constant in time.
CoilMaps apply_bulk_motion(const CoilMaps& maps, const std::vector<BulkMotionEvent>& schedule,
                           int frames, double frame_interval_ms, double pixel_mm);

}  // namespace rtxc::phantom
