#include "rtxc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rtxc/detail/rng.hpp"
#include "rtxc/detail/sha256.hpp"
#include "rtxc/encode.hpp"
#include "rtxc/phantom.hpp"
#include "rtxc/physio.hpp"
#include "rtxc/quant.hpp"
#include "rtxc/recon.hpp"
#include "rtxc/serialize.hpp"

namespace fs = std::filesystem;

namespace rtxc::harness {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("harness: cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// frames f0, f0+stride, ... of a series
template <typename T>
Series<T> subsample_frames(const Series<T>& s, int offset, int stride) {
  const int n = (s.frames - offset + stride - 1) / stride;
  Series<T> out(n, s.ny, s.nx, s.pixel_mm, s.frame_interval_ms * stride);
  for (int f = 0; f < n; ++f)
    std::copy_n(s.frame(offset + f * stride), s.frame_size(), out.frame(f));
  return out;
}

CoilMaps subsample_maps(const CoilMaps& maps, int offset, int stride, int frames_out) {
  if (maps.is_static()) return maps;
  CoilMaps out(frames_out, maps.coils, maps.ny, maps.nx);
  for (int f = 0; f < frames_out; ++f)
    for (int c = 0; c < maps.coils; ++c)
      std::copy_n(maps.map(offset + f * stride, c), maps.map_size(), out.map(f, c));
  return out;
}

sampling::SamplingPattern subsample_pattern(const sampling::SamplingPattern& p, int offset,
                                            int stride, int frames_out) {
  sampling::SamplingPattern out = p;
  out.frames = frames_out;
  out.lines.clear();
  for (int f = 0; f < frames_out; ++f) out.lines.push_back(p.lines[offset + f * stride]);
  return out;
}

void apply_weights(KSpaceSeries& ks, const std::vector<double>& weights) {
  for (int f = 0; f < ks.frames; ++f)
    for (int c = 0; c < ks.coils; ++c) {
      if (weights[c] == 1.0) continue;
      cplx* p = ks.plane(f, c);
      for (size_t i = 0; i < ks.plane_size(); ++i) p[i] *= weights[c];
    }
}

struct RunArtifacts {
  nlohmann::json quant = nlohmann::json::object();
  nlohmann::json stats = nlohmann::json::object();
};

void persist_truth(const fs::path& dir, const phantom::PhantomTruth& truth) {
  io::Container c;
  c.add_f8("lv_volume_ml", truth.lv_volume_ml);
  if (!truth.rv_volume_ml.empty()) c.add_f8("rv_volume_ml", truth.rv_volume_ml);
  c.add_f8("resp", truth.resp);
  c.add_f8("cardiac_phase", truth.cardiac_phase);
  c.add_f8("tp_offset_mm", truth.tp_offset_mm);
  if (!truth.lv_mask.empty()) {
    const auto& m0 = truth.lv_mask[0];
    const std::vector<size_t> shape = {truth.lv_mask.size(), static_cast<size_t>(m0.frames),
                                       static_cast<size_t>(m0.ny), static_cast<size_t>(m0.nx)};
    auto stack = [&](const std::vector<MaskSeries>& masks) {
      std::vector<uint8_t> flat;
      flat.reserve(masks.size() * masks[0].data.size());
      for (const auto& m : masks) flat.insert(flat.end(), m.data.begin(), m.data.end());
      return flat;
    };
    c.add_u1("lv_mask", stack(truth.lv_mask), shape);
    c.add_u1("rv_mask", stack(truth.rv_mask), shape);
    c.add_u1("anatomy_mask", stack(truth.anatomy_mask), shape);
  }
  if (truth.vessel_mask.frames > 0) {
    c.add_u1("vessel_mask", truth.vessel_mask.data,
             {static_cast<size_t>(truth.vessel_mask.frames),
              static_cast<size_t>(truth.vessel_mask.ny),
              static_cast<size_t>(truth.vessel_mask.nx)});
    c.add_f8("flow_rate_mls", truth.flow_rate_mls);
    c.metadata["nff_ml_per_beat"] = truth.nff_ml_per_beat;
    c.metadata["vmax_cms"] = truth.vmax_cms;
  }
  io::write_container((dir / "truth.rtxc").string(), c);
}

void persist_signals(const fs::path& dir, const physio::PhysioSignals& signals,
                     const std::vector<std::pair<int, int>>& windows,
                     const physio::BeatSelection& beats) {
  const int n = static_cast<int>(signals.resp.size());
  std::vector<int> beat_id(n, -1);
  for (size_t b = 0; b < beats.beats.size(); ++b)
    for (int f = beats.beats[b].begin; f < beats.beats[b].end; ++f)
      beat_id[f] = static_cast<int>(b);
  std::vector<uint8_t> ee(n, 0);
  for (const auto& [b, e] : windows)
    for (int f = b; f < e; ++f) ee[f] = 1;

  std::ostringstream os;
  os << "frame,resp,cardiac,ee_flag,beat_id\n";
  for (int f = 0; f < n; ++f)
    os << f << ',' << format_value(signals.resp[f]) << ',' << format_value(signals.cardiac[f])
       << ',' << int(ee[f]) << ',' << beat_id[f] << '\n';
  write_text(dir / "signals.csv", os.str());
}

nlohmann::json recon_stats(const recon::ReconResult& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"nonconvergence_warning", r.nonconvergence_warning},
          {"objective", r.objective}};
}

nlohmann::json function_json(const quant::FunctionParams& p) {
  return {{"edv_ml", p.edv_ml}, {"esv_ml", p.esv_ml}, {"sv_ml", p.sv_ml},
          {"ef_percent", p.ef_percent}, {"hr_bpm", p.hr_bpm}, {"co_lpm", p.co_lpm}};
}

RunArtifacts run_cine(const config::ExperimentConfig& cfg, const config::StageConfig& stage,
                      uint64_t seed, bool reweight, const fs::path& dir) {
  using namespace rtxc;
  const auto pcfg = cfg.stage_phantom(stage, seed);
  auto cine = phantom::make_cine_phantom(pcfg);

  auto pattern = sampling::gro_generate(pcfg.ny, cfg.sampling.lines_per_frame, pcfg.frames,
                                        cfg.sampling.density_exponent,
                                        cfg.sampling.center_weight);
  const auto maps = phantom::coil_maps_synthetic(pcfg.coils, pcfg.ny, pcfg.nx,
                                                 detail::substream(seed, 0xc011));
  const auto enc_maps = phantom::apply_bulk_motion(maps, pcfg.bulk_motion, pcfg.frames,
                                                   pcfg.frame_interval_ms, pcfg.pixel_mm);

  const int mid = pcfg.slices / 2;
  std::vector<int> recon_slices;
  if (cfg.recon.slices == "all")
    for (int s = 0; s < pcfg.slices; ++s) recon_slices.push_back(s);
  else
    recon_slices.push_back(mid);

  RunArtifacts art;
  ImageSeries recon_mid;
  for (int s : recon_slices) {
    auto ks = encode::forward(cine.slices[s], enc_maps, pattern, 0.0,
                              detail::substream(seed, 0xe0c0, s));
    ks.tr_ms = cfg.sampling.tr_ms;
    const double sigma = cfg.noise_sigma_rel * encode::acquired_rms(ks);
    encode::add_noise(ks, sigma, detail::substream(seed, 0xe0c0, s));

    recon::CoilWeights weights;
    if (reweight) {
      auto [w, rw] = recon::coil_reweight(ks);
      weights = w;
      ks = std::move(rw);
    }
    const auto est = recon::estimate_sensitivities(ks, cfg.recon.calib_width);
    recon::TransformSet transforms;
    transforms.use_uwt = true;
    transforms.uwt_levels = cfg.recon.uwt_levels;
    recon::ReconSettings settings{cfg.recon.iterations, cfg.recon.tol,
                                  cfg.recon.threshold_scale};
    auto result = recon::score_reconstruct(ks, est, transforms, settings);
    result.image.pixel_mm = pcfg.pixel_mm;
    result.image.frame_interval_ms = pcfg.frame_interval_ms;

    if (cfg.output.save_kspace)
      io::write_container((dir / ("kspace_s" + std::to_string(s) + ".rtxc")).string(),
                          io::kspace_to_container(ks));
    io::write_container((dir / ("recon_s" + std::to_string(s) + ".rtxc")).string(),
                        io::image_series_to_container(result.image));

    art.stats["slices"][std::to_string(s)] = recon_stats(result);
    if (reweight) art.stats["slices"][std::to_string(s)]["coil_weights"] = weights.weights;
    if (s == mid) {
      art.stats["artifact_score"] =
          recon::artifact_energy(result.image, cine.truth.anatomy_mask[mid]);
      recon_mid = std::move(result.image);
    }
  }

  const auto st = sampling::pattern_stats(pattern, cfg.sampling.tr_ms);
  art.stats["pattern"] = {{"realized_r", st.realized_r},
                          {"temporal_resolution_ms", st.temporal_resolution_ms},
                          {"max_intraframe_jump", st.max_intraframe_jump},
                          {"center_hit_rate", st.center_hit_rate}};

  const double fps = 1000.0 / pcfg.frame_interval_ms;
  const auto signals = physio::extract_physio(recon_mid, fps, cfg.subject_age_years);
  const auto windows = physio::detect_end_expiration(signals.resp);
  const auto mode = cfg.mode == "ee" ? physio::AnalysisMode::ee : physio::AnalysisMode::ap;
  const auto beats = physio::select_beats(signals, windows, mode);
  const auto& beat = beats.beats[beats.chosen];

  persist_signals(dir, signals, windows, beats);
  io::write_container((dir / "overlay.rtxc").string(),
                      io::overlay_to_container(physio::export_signal_overlay(recon_mid, signals)));
  persist_truth(dir, cine.truth);

  const double px_area = pcfg.pixel_mm * pcfg.pixel_mm;
  const auto lv = quant::ventricular_volumes(cine.truth.lv_mask, beat.begin, beat.end,
                                             pcfg.slice_thickness_mm, px_area);
  const auto rv = quant::ventricular_volumes(cine.truth.rv_mask, beat.begin, beat.end,
                                             pcfg.slice_thickness_mm, px_area);
  const auto lv_params = quant::function_params(lv.edv_ml, lv.esv_ml, signals.hr_bpm, stage.label);
  const auto rv_params = quant::function_params(rv.edv_ml, rv.esv_ml, signals.hr_bpm, stage.label);

  art.quant["stage"] = stage.label;
  art.quant["mode"] = cfg.mode;
  art.quant["hr_bpm"] = signals.hr_bpm;
  art.quant["aphr_percent"] = signals.aphr_percent;
  art.quant["resp_freq_hz"] = signals.resp_freq_hz;
  art.quant["beat"] = {{"begin", beat.begin}, {"end", beat.end}, {"is_ee", beats.chosen_is_ee}};
  art.quant["cine"] = {{"lv", function_json(lv_params)}, {"rv", function_json(rv_params)}};
  art.quant["truth"] = {{"lv_edv_ml", *std::max_element(cine.truth.lv_volume_ml.begin(),
                                                        cine.truth.lv_volume_ml.end())},
                        {"lv_ef_percent", cine.truth.true_ef_percent()}};
  return art;
}

RunArtifacts run_flow(const config::ExperimentConfig& cfg, const config::StageConfig& stage,
                      uint64_t seed, bool reweight, const fs::path& dir) {
  using namespace rtxc;
  auto pcfg = cfg.stage_phantom(stage, seed);
  require(pcfg.frames % 2 == 0, "flow runs need an even phantom frame count (two encodings)");
  auto flow = phantom::make_flow_phantom(pcfg);

  const int lines = cfg.sampling.lines_per_frame;
  const long total = cfg.sampling.total_readouts > 0
                         ? cfg.sampling.total_readouts
                         : static_cast<long>(pcfg.frames) * lines;
  const auto order = sampling::cava_generate(pcfg.ny, total, cfg.sampling.density_exponent);
  auto full = sampling::cava_rebin(order, lines);
  require(full.frames >= pcfg.frames, "flow: not enough readouts for the requested frames");

  const int t_enc = pcfg.frames / 2;  // frames per encoding, interleaved chunk-wise
  const auto pat_comp = subsample_pattern(full, 0, 2, t_enc);
  const auto pat_enc = subsample_pattern(full, 1, 2, t_enc);

  const auto vel_comp = subsample_frames(flow.velocity, 0, 2);
  const auto mag_comp = subsample_frames(flow.magnitude, 0, 2);
  const auto vel_enc = subsample_frames(flow.velocity, 1, 2);
  const auto mag_enc = subsample_frames(flow.magnitude, 1, 2);

  encode::FlowEncodingSpec venc{stage.venc_cms};
  const auto pair_comp = encode::flow_encode(vel_comp, mag_comp, venc);
  const auto pair_enc = encode::flow_encode(vel_enc, mag_enc, venc);
  const bool aliasing = pair_comp.aliasing_warning || pair_enc.aliasing_warning;

  const auto maps = phantom::coil_maps_synthetic(pcfg.coils, pcfg.ny, pcfg.nx,
                                                 detail::substream(seed, 0xc011));
  const auto enc_maps = phantom::apply_bulk_motion(maps, pcfg.bulk_motion, pcfg.frames,
                                                   pcfg.frame_interval_ms, pcfg.pixel_mm);
  const auto maps_comp = subsample_maps(enc_maps, 0, 2, t_enc);
  const auto maps_enc = subsample_maps(enc_maps, 1, 2, t_enc);

  auto ks_comp = encode::forward(pair_comp.compensated, maps_comp, pat_comp, 0.0,
                                 detail::substream(seed, 0xf10c));
  auto ks_enc = encode::forward(pair_enc.encoded, maps_enc, pat_enc, 0.0,
                                detail::substream(seed, 0xf10e));
  ks_comp.tr_ms = ks_enc.tr_ms = cfg.sampling.tr_ms;
  ks_comp.venc_cms = ks_enc.venc_cms = stage.venc_cms;
  ks_comp.encoding = FlowEncoding::compensated;
  ks_enc.encoding = FlowEncoding::encoded;

  const double sigma = cfg.noise_sigma_rel * encode::acquired_rms(ks_comp);
  encode::add_noise(ks_comp, sigma, detail::substream(seed, 0xf10c));
  encode::add_noise(ks_enc, sigma, detail::substream(seed, 0xf10e));

  RunArtifacts art;
  if (reweight) {
    auto [w, rw] = recon::coil_reweight(ks_comp);
    ks_comp = std::move(rw);
    apply_weights(ks_enc, w.weights);  // same weights on both encodings
    art.stats["coil_weights"] = w.weights;
  }
  const auto est = recon::estimate_sensitivities(ks_comp, cfg.recon.calib_width);

  recon::TransformSet uwt_only;
  uwt_only.use_uwt = true;
  uwt_only.uwt_levels = cfg.recon.uwt_levels;
  recon::ReconSettings settings{cfg.recon.iterations, cfg.recon.tol, cfg.recon.threshold_scale};

  auto rec_comp = recon::score_reconstruct(ks_comp, est, uwt_only, settings);
  auto rec_enc = recon::score_reconstruct(ks_enc, est, uwt_only, settings);
  art.stats["recon_comp"] = recon_stats(rec_comp);
  art.stats["recon_enc"] = recon_stats(rec_enc);

  if (cfg.recon.use_temporal_pca) {
    const auto basis = recon::temporal_pca_basis(rec_comp.image, rec_enc.image);
    recon::TransformSet composite = uwt_only;
    composite.use_tpca = true;
    composite.tpca_basis = recon::tpca_transform_matrix(basis, t_enc);
    rec_comp = recon::score_reconstruct(ks_comp, est, composite, settings);
    rec_enc = recon::score_reconstruct(ks_enc, est, composite, settings);
    art.stats["recon_comp_composite"] = recon_stats(rec_comp);
    art.stats["recon_enc_composite"] = recon_stats(rec_enc);
  }

  const double dt_ms = pcfg.frame_interval_ms * 2.0;
  rec_comp.image.pixel_mm = rec_enc.image.pixel_mm = pcfg.pixel_mm;
  rec_comp.image.frame_interval_ms = rec_enc.image.frame_interval_ms = dt_ms;

  io::write_container((dir / "recon_compensated.rtxc").string(),
                      io::image_series_to_container(rec_comp.image));
  io::write_container((dir / "recon_encoded.rtxc").string(),
                      io::image_series_to_container(rec_enc.image));
  if (cfg.output.save_kspace) {
    io::write_container((dir / "kspace_compensated.rtxc").string(),
                        io::kspace_to_container(ks_comp));
    io::write_container((dir / "kspace_encoded.rtxc").string(),
                        io::kspace_to_container(ks_enc));
  }

  auto phase = encode::phase_difference(rec_comp.image, rec_enc.image);
  auto velocity = encode::phase_to_velocity(phase, venc);
  velocity.frame_interval_ms = dt_ms;
  velocity.pixel_mm = pcfg.pixel_mm;
  {
    io::Container vc;
    vc.add_f8("velocity", velocity.data,
              {static_cast<size_t>(velocity.frames), static_cast<size_t>(velocity.ny),
               static_cast<size_t>(velocity.nx)});
    vc.metadata["venc_cms"] = stage.venc_cms;
    vc.metadata["frame_interval_ms"] = dt_ms;
    io::write_container((dir / "velocity.rtxc").string(), vc);
  }

  const double fps = 1000.0 / dt_ms;
  const auto signals = physio::extract_physio(rec_comp.image, fps, cfg.subject_age_years);
  const auto windows = physio::detect_end_expiration(signals.resp);
  const auto mode = cfg.mode == "ee" ? physio::AnalysisMode::ee : physio::AnalysisMode::ap;
  const auto beats = physio::select_beats(signals, windows, mode);
  const auto& beat = beats.beats[beats.chosen];

  persist_signals(dir, signals, windows, beats);
  io::write_container(
      (dir / "overlay.rtxc").string(),
      io::overlay_to_container(physio::export_signal_overlay(rec_comp.image, signals)));
  persist_truth(dir, flow.truth);

  MaskSeries roi(t_enc, pcfg.ny, pcfg.nx, pcfg.pixel_mm, dt_ms);
  for (int f = 0; f < t_enc; ++f)
    std::copy_n(flow.truth.vessel_mask.frame(2 * f), roi.frame_size(), roi.frame(f));

  const auto fp = quant::flow_metrics(velocity, roi, beat.begin, beat.end,
                                      pcfg.pixel_mm * pcfg.pixel_mm, signals.hr_bpm, "AAo");

  // dynamic anatomy for the artifact score is the (moving) vessel
  MaskSeries vessel_anat = roi;
  art.stats["artifact_score"] = recon::artifact_energy(rec_comp.image, vessel_anat);
  art.stats["aliasing_warning"] = aliasing;

  art.quant["stage"] = stage.label;
  art.quant["mode"] = cfg.mode;
  art.quant["hr_bpm"] = signals.hr_bpm;
  art.quant["aphr_percent"] = signals.aphr_percent;
  art.quant["beat"] = {{"begin", beat.begin}, {"end", beat.end}, {"is_ee", beats.chosen_is_ee}};
  art.quant["flow"] = {{"vessel", fp.vessel},     {"vmax_cms", fp.vmax_cms},
                       {"nff_ml", fp.nff_ml},     {"sv_ml", fp.sv_ml},
                       {"co_lpm", fp.co_lpm},     {"venc_cms", stage.venc_cms}};
  art.quant["truth"] = {{"nff_ml_per_beat", flow.truth.nff_ml_per_beat},
                        {"vmax_cms", flow.truth.vmax_cms}};
  return art;
}

void collect_files(const fs::path& root, nlohmann::json& files) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths)
    files.push_back({{"path", fs::relative(p, root).generic_string()},
                     {"sha256", detail::sha256_file_hex(p.string())},
                     {"bytes", fs::file_size(p)}});
}

}  // namespace

ExperimentResult run_experiment(const config::ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.out_dir = cfg.output.directory;
  const fs::path root(cfg.output.directory);
  fs::create_directories(root / "runs");

  for (const auto& stage : cfg.stages) {
    for (int r = 0; r < cfg.repeats; ++r) {
      RunResult run;
      run.stage = stage.label;
      run.repeat = r + 1;
      run.reweight = cfg.recon.reweight;
      const std::string tag = cfg.recon.reweight ? "rw" : "norw";
      const fs::path dir =
          root / "runs" / (stage.label + "-rep" + std::to_string(run.repeat) + "-" + tag);
      run.dir = fs::relative(dir, root).generic_string();
      fs::create_directories(dir);
      try {
        RunArtifacts art = cfg.acquisition == "cine"
                               ? run_cine(cfg, stage, cfg.seeds[r], cfg.recon.reweight, dir)
                               : run_flow(cfg, stage, cfg.seeds[r], cfg.recon.reweight, dir);
        art.quant["repeat"] = run.repeat;
        art.quant["reweight"] = cfg.recon.reweight;
        art.quant["seed"] = cfg.seeds[r];
        write_json(dir / "quant.json", art.quant);
        write_json(dir / "stats.json", art.stats);
        run.ok = true;
      } catch (const std::exception& e) {
        run.error = e.what();
        write_json(dir / "error.json", {{"error", run.error}});
      }
      result.runs.push_back(std::move(run));
    }
  }

  const nlohmann::json config_json = config::to_json(cfg);
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_json;
  manifest["config_hash"] = detail::sha256_hex(config_json.dump());
  manifest["runs"] = nlohmann::json::array();
  for (const auto& run : result.runs)
    manifest["runs"].push_back({{"stage", run.stage},
                                {"repeat", run.repeat},
                                {"reweight", run.reweight},
                                {"ok", run.ok},
                                {"error", run.error},
                                {"dir", run.dir}});
  manifest["files"] = nlohmann::json::array();
  collect_files(root, manifest["files"]);
  write_json(root / "manifest.json", manifest);
  return result;
}

namespace {

struct LoadedRun {
  std::string stage;
  int repeat = 0;
  bool reweight = true;
  nlohmann::json quant;
  nlohmann::json stats;
};

std::vector<LoadedRun> load_runs(const fs::path& root) {
  std::vector<LoadedRun> out;
  const fs::path runs_dir = root / "runs";
  if (!fs::exists(runs_dir)) return out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    if (!fs::exists(dir / "quant.json")) continue;  // failed runs are skipped
    LoadedRun run;
    std::ifstream qi(dir / "quant.json");
    qi >> run.quant;
    if (fs::exists(dir / "stats.json")) {
      std::ifstream si(dir / "stats.json");
      si >> run.stats;
    }
    run.stage = run.quant.value("stage", "");
    run.repeat = run.quant.value("repeat", 1);
    run.reweight = run.quant.value("reweight", true);
    out.push_back(std::move(run));
  }
  return out;
}

std::map<std::string, double> run_parameters(const nlohmann::json& quant) {
  std::map<std::string, double> params;
  if (quant.contains("cine")) {
    for (const char* side : {"lv", "rv"}) {
      const auto& v = quant.at("cine").at(side);
      const std::string prefix = side == std::string("lv") ? "LV_" : "RV_";
      params[prefix + "EDV"] = v.at("edv_ml").get<double>();
      params[prefix + "ESV"] = v.at("esv_ml").get<double>();
      params[prefix + "SV"] = v.at("sv_ml").get<double>();
      params[prefix + "EF"] = v.at("ef_percent").get<double>();
      params[prefix + "CO"] = v.at("co_lpm").get<double>();
    }
  }
  if (quant.contains("flow")) {
    const auto& f = quant.at("flow");
    const std::string prefix = f.at("vessel").get<std::string>() + "_";
    params[prefix + "Vmax"] = f.at("vmax_cms").get<double>();
    params[prefix + "NFF"] = f.at("nff_ml").get<double>();
    params[prefix + "SV"] = f.at("sv_ml").get<double>();
    params[prefix + "CO"] = f.at("co_lpm").get<double>();
  }
  params["HR"] = quant.value("hr_bpm", 0.0);
  return params;
}

void write_table(const fs::path& base, const std::string& format,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows) {
  if (format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj;
      for (size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
      j.push_back(obj);
    }
    write_json(fs::path(base.string() + ".json"), j);
  } else {
    std::ostringstream os;
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    write_text(fs::path(base.string() + ".csv"), os.str());
  }
}

}  // namespace

void write_report(const std::string& out_dir, const std::string& format) {
  const fs::path root(out_dir);
  const auto runs = load_runs(root);
  if (runs.empty()) throw std::runtime_error("report: no completed runs under '" + out_dir + "'");
  const fs::path report_dir = root / "report";
  fs::create_directories(report_dir);

  // stage traces (one row per stage/repeat/parameter)
  std::vector<std::vector<std::string>> trace_rows;
  for (const auto& run : runs)
    for (const auto& [name, value] : run_parameters(run.quant))
      trace_rows.push_back({run.stage, std::to_string(run.repeat),
                            run.reweight ? "1" : "0", name, format_value(value)});
  write_table(report_dir / "traces", format,
              {"stage", "repeat", "reweight", "parameter", "value"}, trace_rows);

  // scan-rescan scatter (repeats 1 and 2, reweighted runs)
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> pairs;
  std::map<std::pair<std::string, std::string>, int> seen;
  std::string mode = "ee";
  for (const auto& run : runs) {
    if (!run.reweight || run.repeat > 2) continue;
    mode = run.quant.value("mode", "ee");
    for (const auto& [name, value] : run_parameters(run.quant)) {
      auto key = std::make_pair(name, run.stage);
      if (run.repeat == 1) pairs[key].first = value;
      if (run.repeat == 2) pairs[key].second = value;
      seen[key] |= run.repeat;
    }
  }
  std::vector<std::vector<std::string>> scatter_rows;
  std::vector<quant::QuantRecord> rep1, rep2;
  std::map<std::string, int> stage_index;
  for (const auto& run : runs)
    if (!stage_index.count(run.stage))
      stage_index[run.stage] = static_cast<int>(stage_index.size());
  for (const auto& [key, value] : pairs) {
    if (seen[key] != 3) continue;  // need both repeats
    scatter_rows.push_back({key.first, key.second, mode, format_value(value.first),
                            format_value(value.second)});
    rep1.push_back({stage_index[key.second], key.second, key.first, value.first});
    rep2.push_back({stage_index[key.second], key.second, key.first, value.second});
  }
  if (!scatter_rows.empty()) {
    write_table(report_dir / "repeat_scatter", format,
                {"parameter", "stage", "mode", "rep1", "rep2"}, scatter_rows);

    // per-(parameter, stage) NMAE
    std::vector<std::vector<std::string>> nmae_rows;
    for (const auto& [key, value] : pairs) {
      if (seen[key] != 3) continue;
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = quant::nmae(value.first, value.second);
      } catch (const std::exception&) {
      }
      nmae_rows.push_back({key.first, key.second, mode, format_value(v)});
    }
    write_table(report_dir / "repeatability_by_stage", format,
                {"parameter", "stage", "mode", "nmae_percent"}, nmae_rows);

    // pooled across stages: stages act as the agreement series
    std::vector<quant::QuantRecord> pooled1, pooled2;
    for (auto r : rep1) { r.stage = "all"; pooled1.push_back(r); }
    for (auto r : rep2) { r.stage = "all"; pooled2.push_back(r); }
    std::vector<std::vector<std::string>> pooled_rows;
    for (const auto& e : quant::repeatability_report(pooled1, pooled2, mode)) {
      const std::string ccc = e.nmae_per_subject.size() >= 2 ? format_value(e.ccc) : "";
      pooled_rows.push_back({e.parameter, mode, format_value(e.nmae_median), ccc});
    }
    write_table(report_dir / "repeatability", format,
                {"parameter", "mode", "nmae_median_percent", "ccc"}, pooled_rows);
  }

  // coil-reweighting artifact scores (before/after pairs)
  std::map<std::pair<std::string, int>, std::pair<std::string, std::string>> scores;
  for (const auto& run : runs) {
    if (!run.stats.contains("artifact_score")) continue;
    const std::string v = format_value(run.stats.at("artifact_score").get<double>());
    auto& slot = scores[{run.stage, run.repeat}];
    (run.reweight ? slot.second : slot.first) = v;
  }
  std::vector<std::vector<std::string>> score_rows;
  for (const auto& [key, value] : scores)
    score_rows.push_back({key.first, std::to_string(key.second), value.first, value.second});
  if (!score_rows.empty())
    write_table(report_dir / "artifact_scores", format,
                {"stage", "repeat", "score_before_reweight", "score_after_reweight"}, score_rows);
}

}  // namespace rtxc::harness
