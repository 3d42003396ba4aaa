#include "rtxc/config.hpp"

#include <fstream>

namespace rtxc::config {

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

StageConfig parse_stage(const nlohmann::json& j) {
  StageConfig s;
  read_if(j, "label", s.label);
  read_if(j, "heart_rate_bpm", s.heart_rate_bpm);
  read_if(j, "resp_rate_bpm", s.resp_rate_bpm);
  read_if(j, "edv_ml", s.edv_ml);
  read_if(j, "esv_ml", s.esv_ml);
  read_if(j, "peak_velocity_cms", s.peak_velocity_cms);
  read_if(j, "venc_cms", s.venc_cms);
  return s;
}

nlohmann::json stage_json(const StageConfig& s) {
  return {{"label", s.label},
          {"heart_rate_bpm", s.heart_rate_bpm},
          {"resp_rate_bpm", s.resp_rate_bpm},
          {"edv_ml", s.edv_ml},
          {"esv_ml", s.esv_ml},
          {"peak_velocity_cms", s.peak_velocity_cms},
          {"venc_cms", s.venc_cms}};
}

}  // namespace

void ExperimentConfig::validate() const {
  require(acquisition == "cine" || acquisition == "flow",
          "config: acquisition must be 'cine' or 'flow'");
  // sequence/pattern pairing: bSSFP cine cannot take large k-space jumps
  if (acquisition == "cine")
    require(sampling.pattern == "gro", "config: cine acquisitions must use the GRO pattern");
  if (acquisition == "flow")
    require(sampling.pattern == "cava", "config: flow acquisitions must use the CAVA pattern");
  require(!stages.empty(), "config: at least one stage required");
  require(repeats >= 1, "config: repeats must be >= 1");
  require(seeds.size() == static_cast<size_t>(repeats),
          "config: seeds list length must equal the repeat count");
  require(mode == "ee" || mode == "ap", "config: mode must be 'ee' or 'ap'");
  require(output.format == "csv" || output.format == "json",
          "config: output format must be 'csv' or 'json'");
  require(recon.slices == "mid" || recon.slices == "all",
          "config: recon.slices must be 'mid' or 'all'");
  require(noise_sigma_rel >= 0.0, "config: noise level must be non-negative");
}

phantom::PhantomConfig ExperimentConfig::stage_phantom(const StageConfig& stage,
                                                       uint64_t seed) const {
  phantom::PhantomConfig p = phantom;
  p.stage = stage.label;
  p.heart_rate_bpm = stage.heart_rate_bpm;
  p.resp_rate_bpm = stage.resp_rate_bpm;
  p.edv_ml = stage.edv_ml;
  p.esv_ml = stage.esv_ml;
  p.peak_velocity_cms = stage.peak_velocity_cms;
  p.seed = seed;
  if (p.frame_interval_ms <= 0.0)
    p.frame_interval_ms = sampling.tr_ms * sampling.lines_per_frame;
  return p;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;

  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    read_if(e, "name", cfg.name);
    read_if(e, "acquisition", cfg.acquisition);
    read_if(e, "repeats", cfg.repeats);
    read_if(e, "seeds", cfg.seeds);
    read_if(e, "mode", cfg.mode);
    read_if(e, "subject_age_years", cfg.subject_age_years);
    if (e.contains("stages"))
      for (const auto& s : e.at("stages")) cfg.stages.push_back(parse_stage(s));
  }
  if (cfg.stages.empty()) cfg.stages.push_back(StageConfig{});
  if (cfg.seeds.empty())
    for (int r = 0; r < cfg.repeats; ++r) cfg.seeds.push_back(static_cast<uint64_t>(r + 1));

  if (j.contains("phantom")) {
    const auto& p = j.at("phantom");
    if (p.contains("grid")) {
      cfg.phantom.ny = p.at("grid").at(0).get<int>();
      cfg.phantom.nx = p.at("grid").at(1).get<int>();
    }
    read_if(p, "pixel_mm", cfg.phantom.pixel_mm);
    read_if(p, "slice_thickness_mm", cfg.phantom.slice_thickness_mm);
    read_if(p, "slices", cfg.phantom.slices);
    read_if(p, "frames", cfg.phantom.frames);
    read_if(p, "frame_interval_ms", cfg.phantom.frame_interval_ms);
    read_if(p, "resp_amp_inplane_mm", cfg.phantom.resp_amp_inplane_mm);
    read_if(p, "resp_amp_throughplane_mm", cfg.phantom.resp_amp_throughplane_mm);
    read_if(p, "resp_skew", cfg.phantom.resp_skew);
    read_if(p, "vessel_radius_mm", cfg.phantom.vessel_radius_mm);
    read_if(p, "coils", cfg.phantom.coils);
    if (p.contains("resp_waveform"))
      cfg.phantom.resp_waveform = p.at("resp_waveform").get<std::string>() == "sinusoid"
                                      ? phantom::RespWaveform::sinusoid
                                      : phantom::RespWaveform::skewed;
    if (p.contains("flow_waveform")) {
      const std::string w = p.at("flow_waveform").get<std::string>();
      cfg.phantom.flow_waveform = w == "steady" ? phantom::FlowWaveform::steady
                                  : w == "zero" ? phantom::FlowWaveform::zero
                                                : phantom::FlowWaveform::pulsatile;
    }
    if (p.contains("bulk_motion"))
      for (const auto& b : p.at("bulk_motion")) {
        phantom::BulkMotionEvent ev;
        read_if(b, "period_s", ev.period_s);
        read_if(b, "amplitude_mm", ev.amplitude_mm);
        read_if(b, "coils", ev.coils);
        cfg.phantom.bulk_motion.push_back(std::move(ev));
      }
  }

  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    read_if(s, "pattern", cfg.sampling.pattern);
    read_if(s, "lines_per_frame", cfg.sampling.lines_per_frame);
    read_if(s, "tr_ms", cfg.sampling.tr_ms);
    read_if(s, "density_exponent", cfg.sampling.density_exponent);
    read_if(s, "center_weight", cfg.sampling.center_weight);
    read_if(s, "total_readouts", cfg.sampling.total_readouts);
  }
  if (j.contains("encode")) read_if(j.at("encode"), "noise_sigma_rel", cfg.noise_sigma_rel);
  if (j.contains("recon")) {
    const auto& r = j.at("recon");
    read_if(r, "iterations", cfg.recon.iterations);
    read_if(r, "tol", cfg.recon.tol);
    read_if(r, "threshold_scale", cfg.recon.threshold_scale);
    read_if(r, "uwt_levels", cfg.recon.uwt_levels);
    read_if(r, "use_temporal_pca", cfg.recon.use_temporal_pca);
    read_if(r, "reweight", cfg.recon.reweight);
    read_if(r, "calib_width", cfg.recon.calib_width);
    read_if(r, "slices", cfg.recon.slices);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    read_if(o, "directory", cfg.output.directory);
    read_if(o, "format", cfg.output.format);
    read_if(o, "save_kspace", cfg.output.save_kspace);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : cfg.stages) stages.push_back(stage_json(s));

  nlohmann::json bulk = nlohmann::json::array();
  for (const auto& b : cfg.phantom.bulk_motion)
    bulk.push_back(
        {{"period_s", b.period_s}, {"amplitude_mm", b.amplitude_mm}, {"coils", b.coils}});

  return {
      {"experiment",
       {{"name", cfg.name},
        {"acquisition", cfg.acquisition},
        {"stages", stages},
        {"repeats", cfg.repeats},
        {"seeds", cfg.seeds},
        {"mode", cfg.mode},
        {"subject_age_years", cfg.subject_age_years}}},
      {"phantom",
       {{"grid", {cfg.phantom.ny, cfg.phantom.nx}},
        {"pixel_mm", cfg.phantom.pixel_mm},
        {"slice_thickness_mm", cfg.phantom.slice_thickness_mm},
        {"slices", cfg.phantom.slices},
        {"frames", cfg.phantom.frames},
        {"frame_interval_ms", cfg.phantom.frame_interval_ms},
        {"resp_amp_inplane_mm", cfg.phantom.resp_amp_inplane_mm},
        {"resp_amp_throughplane_mm", cfg.phantom.resp_amp_throughplane_mm},
        {"resp_skew", cfg.phantom.resp_skew},
        {"resp_waveform",
         cfg.phantom.resp_waveform == phantom::RespWaveform::sinusoid ? "sinusoid" : "skewed"},
        {"flow_waveform", cfg.phantom.flow_waveform == phantom::FlowWaveform::steady ? "steady"
                          : cfg.phantom.flow_waveform == phantom::FlowWaveform::zero
                              ? "zero"
                              : "pulsatile"},
        {"vessel_radius_mm", cfg.phantom.vessel_radius_mm},
        {"coils", cfg.phantom.coils},
        {"bulk_motion", bulk}}},
      {"sampling",
       {{"pattern", cfg.sampling.pattern},
        {"lines_per_frame", cfg.sampling.lines_per_frame},
        {"tr_ms", cfg.sampling.tr_ms},
        {"density_exponent", cfg.sampling.density_exponent},
        {"center_weight", cfg.sampling.center_weight},
        {"total_readouts", cfg.sampling.total_readouts}}},
      {"encode", {{"noise_sigma_rel", cfg.noise_sigma_rel}}},
      {"recon",
       {{"iterations", cfg.recon.iterations},
        {"tol", cfg.recon.tol},
        {"threshold_scale", cfg.recon.threshold_scale},
        {"uwt_levels", cfg.recon.uwt_levels},
        {"use_temporal_pca", cfg.recon.use_temporal_pca},
        {"reweight", cfg.recon.reweight},
        {"calib_width", cfg.recon.calib_width},
        {"slices", cfg.recon.slices}}},
      {"output",
       {{"directory", cfg.output.directory},
        {"format", cfg.output.format},
        {"save_kspace", cfg.output.save_kspace}}}};
}

}  // namespace rtxc::config
