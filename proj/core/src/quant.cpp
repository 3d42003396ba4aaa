#include "rtxc/quant.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rtxc/detail/stats.hpp"

namespace rtxc::quant {

VolumeResult ventricular_volumes(const std::vector<MaskSeries>& slice_masks, int beat_begin,
                                 int beat_end, double slice_thickness_mm,
                                 double pixel_area_mm2) {
  require(slice_masks.size() >= 3, "ventricular_volumes: need at least 3 slices");
  require(beat_begin >= 0 && beat_end > beat_begin, "ventricular_volumes: invalid beat interval");
  for (const auto& s : slice_masks)
    require(beat_end <= s.frames, "ventricular_volumes: beat exceeds the series");

  VolumeResult out;
  out.volumes_ml.reserve(beat_end - beat_begin);
  for (int f = beat_begin; f < beat_end; ++f) {
    double area_px = 0.0;
    for (const auto& s : slice_masks) {
      const uint8_t* m = s.frame(f);
      for (size_t i = 0; i < s.frame_size(); ++i) area_px += m[i];
    }
    if (area_px == 0.0)
      throw std::runtime_error("ventricular_volumes: empty mask on all slices at frame " +
                               std::to_string(f));
    out.volumes_ml.push_back(area_px * pixel_area_mm2 * slice_thickness_mm / 1000.0);
  }

  const auto max_it = std::max_element(out.volumes_ml.begin(), out.volumes_ml.end());
  const auto min_it = std::min_element(out.volumes_ml.begin(), out.volumes_ml.end());
  out.edv_ml = *max_it;
  out.esv_ml = *min_it;
  out.ed_frame = beat_begin + static_cast<int>(max_it - out.volumes_ml.begin());
  out.es_frame = beat_begin + static_cast<int>(min_it - out.volumes_ml.begin());
  return out;
}

FunctionParams function_params(double edv_ml, double esv_ml, double hr_bpm,
                               const std::string& stage) {
  require(esv_ml >= 0.0 && esv_ml <= edv_ml, "function_params: need 0 <= ESV <= EDV");
  require(edv_ml > 0.0, "function_params: EDV must be positive");
  require(hr_bpm > 0.0, "function_params: HR must be positive");

  FunctionParams p;
  p.edv_ml = edv_ml;
  p.esv_ml = esv_ml;
  p.sv_ml = edv_ml - esv_ml;
  p.ef_percent = 100.0 * p.sv_ml / edv_ml;
  p.hr_bpm = hr_bpm;
  p.co_lpm = p.sv_ml * hr_bpm / 1000.0;
  p.stage = stage;
  return p;
}

FlowParams flow_metrics(const RealSeries& velocity, const MaskSeries& roi, int beat_begin,
                        int beat_end, double pixel_area_mm2, double hr_bpm,
                        const std::string& vessel) {
  require(beat_begin >= 0 && beat_end > beat_begin && beat_end <= velocity.frames,
          "flow_metrics: invalid beat interval");
  require(roi.frames == velocity.frames && roi.ny == velocity.ny && roi.nx == velocity.nx,
          "flow_metrics: ROI geometry mismatch");

  const double dt_s = velocity.frame_interval_ms / 1000.0;
  require(dt_s > 0.0, "flow_metrics: frame interval unknown");

  FlowParams p;
  p.vessel = vessel;
  double nff = 0.0;
  for (int f = beat_begin; f < beat_end; ++f) {
    const double* v = velocity.frame(f);
    const uint8_t* m = roi.frame(f);
    std::vector<double> speeds;
    double flux = 0.0;  // cm/s * mm^2
    for (size_t i = 0; i < velocity.frame_size(); ++i) {
      if (!m[i]) continue;
      flux += v[i] * pixel_area_mm2;
      speeds.push_back(std::abs(v[i]));
    }
    if (speeds.empty()) throw std::runtime_error("flow_metrics: empty ROI at frame " +
                                                 std::to_string(f));
    nff += flux * 0.01 * dt_s;  // cm/s * mm^2 = 0.01 mL/s
    p.vmax_cms = std::max(p.vmax_cms, detail::percentile(speeds, 95.0));
  }
  p.nff_ml = nff;
  p.sv_ml = nff;
  p.co_lpm = hr_bpm > 0.0 ? nff * hr_bpm / 1000.0 : 0.0;
  return p;
}

double nmae(double x1, double x2) {
  const double denom = 0.5 * std::abs(x1 + x2);
  if (denom == 0.0) throw std::invalid_argument("nmae: undefined when x1 + x2 == 0");
  return 100.0 * std::abs(x1 - x2) / denom;
}

double ccc(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "ccc: length mismatch");
  require(a.size() >= 2, "ccc: need at least two samples");

  const double va = detail::variance(a);
  const double vb = detail::variance(b);
  const double dm = detail::mean(a) - detail::mean(b);
  if (va == 0.0 && vb == 0.0) return dm == 0.0 ? 1.0 : 0.0;
  return 2.0 * detail::covariance(a, b) / (va + vb + dm * dm);
}

std::vector<RepeatabilityEntry> repeatability_report(const std::vector<QuantRecord>& rep1,
                                                     const std::vector<QuantRecord>& rep2,
                                                     const std::string& mode) {
  using Key = std::pair<std::string, std::string>;  // (parameter, stage)
  std::map<Key, std::map<int, double>> table1, table2;
  for (const auto& r : rep1) table1[{r.parameter, r.stage}][r.subject] = r.value;
  for (const auto& r : rep2) table2[{r.parameter, r.stage}][r.subject] = r.value;

  std::vector<RepeatabilityEntry> out;
  for (const auto& [key, subjects1] : table1) {
    auto it2 = table2.find(key);
    if (it2 == table2.end())
      throw std::invalid_argument("repeatability_report: parameter '" + key.first + "' stage '" +
                                  key.second + "' missing from the second repeat");
    RepeatabilityEntry e;
    e.parameter = key.first;
    e.stage = key.second;
    e.mode = mode;
    std::vector<double> v1, v2;
    for (const auto& [subject, value] : subjects1) {
      auto s2 = it2->second.find(subject);
      if (s2 == it2->second.end())
        throw std::invalid_argument("repeatability_report: subject mismatch for '" + key.first +
                                    "'");
      v1.push_back(value);
      v2.push_back(s2->second);
      e.nmae_per_subject.push_back(nmae(value, s2->second));
    }
    e.nmae_median = detail::median(e.nmae_per_subject);
    e.ccc = ccc(v1, v2);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace rtxc::quant
