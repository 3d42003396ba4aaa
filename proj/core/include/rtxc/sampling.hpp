#pragma once

#include <cstdint>
#include <vector>

namespace rtxc::sampling {

/// Prospective Cartesian undersampling pattern: which phase-encode lines are
/// acquired in each frame. Lines within a frame are stored in readout order
/// (monotone in k for GRO).
struct SamplingPattern {
  int ny = 0;
  int frames = 0;
  int lines_per_frame = 0;  ///< nominal lines per frame (chunk size for CAVA rebinning)
  double nominal_r = 0.0;
  double density_exponent = 0.0;
  double center_weight = 0.0;
  int dropped_duplicates = 0;  ///< duplicates removed during CAVA rebinning
  std::vector<std::vector<int>> lines;  ///< per frame, acquired line indices

  int center_line() const { return ny / 2; }
  double realized_r() const;
  bool frame_has_line(int frame, int line) const;
  /// frames x ny 0/1 acquisition matrix, row-major
  std::vector<uint8_t> mask_matrix() const;
  /// aggregate acquisition count per line over all frames
  std::vector<int> line_counts() const;
  /// throws std::invalid_argument on malformed patterns;
  /// require_center additionally demands the central line in every frame (GRO)
  void validate(bool require_center) const;
};

/// Flat acquisition order for CAVA: one line index per readout TR.
struct ReadoutOrder {
  int ny = 0;
  double density_exponent = 0.0;
  double center_weight = 0.0;
  std::vector<int> order;
};

struct PatternStats {
  double realized_r = 0.0;
  double temporal_resolution_ms = 0.0;
  int max_intraframe_jump = 0;
  double center_hit_rate = 0.0;
};

/// Golden-ratio-offset Cartesian pattern for real-time cine. Each frame takes
/// `lines_per_frame` stratified samples of a variable-density template
/// (denser near the k-space center, thinning as |k|^s toward the edges) and
/// advances the template offset by the golden fraction of the inter-line
/// spacing from frame to frame. Deterministic; every frame contains the
/// central line; intra-frame readouts are sorted monotonically so that
/// consecutive readouts stay close in k-space.
SamplingPattern gro_generate(int ny, int lines_per_frame, int frames,
                             double s = 2.2, double alpha = 3.0);

/// CAVA-style acquisition order: a golden-ratio low-discrepancy sequence
/// rank-mapped onto a mildly variable-density line budget, so that any
/// contiguous block of readouts is itself a valid variable-density pattern
/// and the temporal resolution can be chosen retrospectively.
ReadoutOrder cava_generate(int ny, long total_readouts, double s = 2.2);

/// Retrospective rebinning: consecutive chunks of `lines_per_frame` readouts
/// become frames; duplicate lines within a chunk are dropped and counted.
SamplingPattern cava_rebin(const ReadoutOrder& order, int lines_per_frame);

PatternStats pattern_stats(const SamplingPattern& pattern, double tr_ms);

/// Upper bound on the intra-frame jump between consecutive readouts that
/// gro_generate guarantees: ceil(2 ny / lines_per_frame).
int gro_jump_bound(int ny, int lines_per_frame);

}  // namespace rtxc::sampling
