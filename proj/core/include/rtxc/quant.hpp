#pragma once

#include <string>
#include <vector>

#include "rtxc/types.hpp"

namespace rtxc::quant {

struct VolumeResult {
  double edv_ml = 0.0;
  double esv_ml = 0.0;
  int ed_frame = -1;  ///< absolute frame index
  int es_frame = -1;
  std::vector<double> volumes_ml;  ///< one per beat frame
};

/// Simpson-style summation: per-frame volume is the mask area times pixel
/// area times slice thickness, summed over slices; ED/ES are the volume
/// extrema within the beat. Throws when a frame has empty masks on every
/// slice.
VolumeResult ventricular_volumes(const std::vector<MaskSeries>& slice_masks, int beat_begin,
                                 int beat_end, double slice_thickness_mm,
                                 double pixel_area_mm2);

struct FunctionParams {
  double edv_ml = 0.0;
  double esv_ml = 0.0;
  double sv_ml = 0.0;
  double ef_percent = 0.0;
  double hr_bpm = 0.0;
  double co_lpm = 0.0;
  std::string stage;
};

/// SV = EDV - ESV, EF = 100 SV / EDV, CO = SV * HR / 1000.
FunctionParams function_params(double edv_ml, double esv_ml, double hr_bpm,
                               const std::string& stage = "");

struct FlowParams {
  std::string vessel;      ///< AAo | MPA
  double vmax_cms = 0.0;   ///< per-frame 95th-percentile |v|, maximum over the beat
  double nff_ml = 0.0;     ///< net forward flow per beat
  double sv_ml = 0.0;      ///< = NFF for a single vessel
  double co_lpm = 0.0;
  double venc_cms = 0.0;
};

/// NFF integrates v * pixel-area over the ROI and beat duration; Vmax uses
/// the per-frame 95th percentile of |v| in the ROI (robust to noise).
FlowParams flow_metrics(const RealSeries& velocity, const MaskSeries& roi, int beat_begin,
                        int beat_end, double pixel_area_mm2, double hr_bpm,
                        const std::string& vessel = "AAo");

/// 100 |x1 - x2| / (0.5 |x1 + x2|); throws when x1 + x2 == 0.
double nmae(double x1, double x2);

/// Lin's concordance correlation coefficient with population (1/n) moments.
/// Both series constant and equal gives 1; constant and unequal gives 0.
double ccc(const std::vector<double>& a, const std::vector<double>& b);

struct QuantRecord {
  int subject = 0;
  std::string stage;
  std::string parameter;
  double value = 0.0;
};

struct RepeatabilityEntry {
  std::string parameter;
  std::string stage;
  std::string mode;  ///< EE | AP
  std::vector<double> nmae_per_subject;
  double nmae_median = 0.0;
  double ccc = 0.0;
};

/// Scan-rescan agreement per (parameter, stage): NMAE for every subject pair
/// plus the median, and CCC across subjects. Throws on mismatched keys.
std::vector<RepeatabilityEntry> repeatability_report(const std::vector<QuantRecord>& rep1,
                                                     const std::vector<QuantRecord>& rep2,
                                                     const std::string& mode);

}  // namespace rtxc::quant
