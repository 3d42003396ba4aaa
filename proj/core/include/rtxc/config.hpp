#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtxc/phantom.hpp"

namespace rtxc::config {

struct StageConfig {
  std::string label = "rest";
  double heart_rate_bpm = 70.0;
  double resp_rate_bpm = 20.0;
  double edv_ml = 150.0;
  double esv_ml = 60.0;
  double peak_velocity_cms = 100.0;
  double venc_cms = 150.0;
};

struct SamplingConfig {
  std::string pattern = "gro";  ///< gro | cava
  int lines_per_frame = 16;
  double tr_ms = 2.60;
  double density_exponent = 2.2;
  double center_weight = 3.0;
  long total_readouts = 0;  ///< cava only; 0 = derive from frames
};

struct ReconConfig {
  int iterations = 40;
  double tol = 1e-5;
  double threshold_scale = 1.0;
  int uwt_levels = 1;
  bool use_temporal_pca = true;  ///< flow reconstructions only
  bool reweight = true;
  int calib_width = 24;
  std::string slices = "mid";  ///< mid | all
};

struct OutputConfig {
  std::string directory = "out";
  std::string format = "csv";  ///< csv | json
  bool save_kspace = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string acquisition = "cine";  ///< cine | flow
  std::vector<StageConfig> stages;
  int repeats = 1;
  std::vector<uint64_t> seeds;
  std::string mode = "ee";  ///< ee | ap
  double subject_age_years = 30.0;
  phantom::PhantomConfig phantom;  ///< geometry; stages override the physiology
  SamplingConfig sampling;
  double noise_sigma_rel = 0.01;
  ReconConfig recon;
  OutputConfig output;

  /// throws on violated invariants, including the sequence/pattern pairing
  /// (cine uses GRO, flow uses CAVA)
  void validate() const;

  /// phantom configuration for one (stage, seed)
  phantom::PhantomConfig stage_phantom(const StageConfig& stage, uint64_t seed) const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace rtxc::config
