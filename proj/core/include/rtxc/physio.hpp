#pragma once

#include <utility>
#include <vector>

#include "rtxc/types.hpp"

namespace rtxc::physio {

struct PhysioSignals {
  std::vector<double> resp;     ///< unit variance, end-expiration toward the maximum
  std::vector<double> cardiac;  ///< unit variance
  double fps = 0.0;
  double resp_freq_hz = 0.0;
  double cardiac_freq_hz = 0.0;
  double hr_bpm = 0.0;
  double aphr_percent = 0.0;  ///< 100 * HR / (220 - age)
};

/// Image-derived surrogate signals, replacing ECG and bellows: spatially
/// downsampled magnitude frames, temporal mean removed, PCA over frames, then
/// band selection (0.05-0.7 Hz respiratory, 0.7-3.5 Hz cardiac). The
/// respiratory sign is fixed by dwell asymmetry: the longer-dwell extremum
/// (the end-expiratory plateau) is oriented positive. Throws when no
/// component concentrates at least 40% of its spectral energy in the
/// respiratory band.
PhysioSignals extract_physio(const ImageSeries& images, double fps, double age_years);

/// End-expiratory windows: frames at or above the 80th percentile of the
/// respiratory signal whose finite-difference slope is within 20% of the RMS
/// slope; runs shorter than 3 frames are discarded. Half-open [begin, end).
std::vector<std::pair<int, int>> detect_end_expiration(const std::vector<double>& resp);

struct Beat {
  int begin = 0;
  int end = 0;            ///< half-open frame interval
  double ee_overlap = 0;  ///< fraction of frames inside EE windows
  bool ee = false;        ///< overlap >= 0.8
};

enum class AnalysisMode { ee, ap };

struct BeatSelection {
  std::vector<Beat> beats;
  int chosen = -1;
  bool chosen_is_ee = false;
};

/// Beats delimited peak-to-peak on the cardiac signal. In EE mode the chosen
/// beat is the first fully end-expiratory one (falling back to maximal
/// overlap, labeled AP); in AP mode simply the first beat.
BeatSelection select_beats(const PhysioSignals& signals,
                           const std::vector<std::pair<int, int>>& ee_windows,
                           AnalysisMode mode = AnalysisMode::ee);

struct OverlayRecord {
  int frame = 0;
  double resp = 0.0;
  int row = 0;  ///< marker pixel position for a renderer
  int col = 0;
};

/// Per-frame marker records for superimposing the respiratory trace under an
/// image series; pixels are never modified here.
std::vector<OverlayRecord> export_signal_overlay(const ImageSeries& images,
                                                 const PhysioSignals& signals);

}  // namespace rtxc::physio
