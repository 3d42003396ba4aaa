// rtxc — simulate, reconstruct and quantify accelerated real-time cardiac MRI
// on synthetic phantoms. Subcommands mirror the pipeline stages; `run`
// executes the whole experiment described by a config file.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rtxc/detail/rng.hpp"
#include "rtxc/encode.hpp"
#include "rtxc/harness.hpp"
#include "rtxc/phantom.hpp"
#include "rtxc/physio.hpp"
#include "rtxc/quant.hpp"
#include "rtxc/recon.hpp"
#include "rtxc/serialize.hpp"

namespace fs = std::filesystem;
using namespace rtxc;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string stage;
  std::string mode;
  std::string out = "out";
  std::string format;
  bool no_reweight = false;
  int64_t seed = -1;
};

config::ExperimentConfig load_with_overrides(const CommonArgs& args) {
  auto cfg = config::load_config(args.config_path);
  if (!args.stage.empty()) {
    std::vector<config::StageConfig> kept;
    for (const auto& s : cfg.stages)
      if (s.label == args.stage) kept.push_back(s);
    if (kept.empty()) throw std::runtime_error("no stage named '" + args.stage + "' in config");
    cfg.stages = kept;
  }
  if (!args.mode.empty()) cfg.mode = args.mode;
  if (!args.format.empty()) cfg.output.format = args.format;
  if (args.no_reweight) cfg.recon.reweight = false;
  if (args.seed >= 0) {
    cfg.repeats = 1;
    cfg.seeds = {static_cast<uint64_t>(args.seed)};
  }
  if (args.out != "out" || cfg.output.directory.empty()) cfg.output.directory = args.out;
  cfg.validate();
  return cfg;
}

sampling::SamplingPattern build_pattern(const config::ExperimentConfig& cfg) {
  if (cfg.sampling.pattern == "gro")
    return sampling::gro_generate(cfg.phantom.ny, cfg.sampling.lines_per_frame,
                                  cfg.phantom.frames, cfg.sampling.density_exponent,
                                  cfg.sampling.center_weight);
  const long total = cfg.sampling.total_readouts > 0
                         ? cfg.sampling.total_readouts
                         : static_cast<long>(cfg.phantom.frames) * cfg.sampling.lines_per_frame;
  const auto order =
      sampling::cava_generate(cfg.phantom.ny, total, cfg.sampling.density_exponent);
  return sampling::cava_rebin(order, cfg.sampling.lines_per_frame);
}

int cmd_phantom(const CommonArgs& args) {
  auto cfg = load_with_overrides(args);
  fs::create_directories(args.out);
  const auto pcfg = cfg.stage_phantom(cfg.stages.front(), cfg.seeds.front());
  if (cfg.acquisition == "cine") {
    auto cine = phantom::make_cine_phantom(pcfg);
    const int mid = pcfg.slices / 2;
    io::write_container((fs::path(args.out) / "images.rtxc").string(),
                        io::image_series_to_container(cine.slices[mid]));
    std::cout << "cine phantom: " << pcfg.slices << " slices, " << pcfg.frames
              << " frames, truth EF " << cine.truth.true_ef_percent() << "%\n";
  } else {
    auto flow = phantom::make_flow_phantom(pcfg);
    io::Container c;
    c.add_f8("velocity", flow.velocity.data,
             {static_cast<size_t>(flow.velocity.frames), static_cast<size_t>(flow.velocity.ny),
              static_cast<size_t>(flow.velocity.nx)});
    c.add_f8("magnitude", flow.magnitude.data,
             {static_cast<size_t>(flow.magnitude.frames), static_cast<size_t>(flow.magnitude.ny),
              static_cast<size_t>(flow.magnitude.nx)});
    io::write_container((fs::path(args.out) / "flow_phantom.rtxc").string(), c);
    std::cout << "flow phantom: truth NFF " << flow.truth.nff_ml_per_beat << " mL/beat\n";
  }
  return 0;
}

int cmd_sample(const CommonArgs& args, const std::string& csv_path) {
  auto cfg = load_with_overrides(args);
  fs::create_directories(args.out);
  const auto pattern = build_pattern(cfg);
  io::Container c;
  io::add_pattern(c, pattern);
  io::write_container((fs::path(args.out) / "pattern.rtxc").string(), c);

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    const auto mask = pattern.mask_matrix();
    for (int f = 0; f < pattern.frames; ++f) {
      for (int k = 0; k < pattern.ny; ++k)
        csv << (k ? "," : "") << int(mask[static_cast<size_t>(f) * pattern.ny + k]);
      csv << '\n';
    }
  }
  const auto st = sampling::pattern_stats(pattern, cfg.sampling.tr_ms);
  std::cout << "pattern: R=" << st.realized_r << ", temporal resolution "
            << st.temporal_resolution_ms << " ms, max jump " << st.max_intraframe_jump
            << ", center hit rate " << st.center_hit_rate << "\n";
  return 0;
}

int cmd_encode(const CommonArgs& args) {
  auto cfg = load_with_overrides(args);
  fs::create_directories(args.out);
  require(cfg.acquisition == "cine", "encode subcommand supports cine configs (use run for flow)");
  const auto pcfg = cfg.stage_phantom(cfg.stages.front(), cfg.seeds.front());
  auto cine = phantom::make_cine_phantom(pcfg);
  const auto pattern = build_pattern(cfg);
  const auto maps = phantom::coil_maps_synthetic(pcfg.coils, pcfg.ny, pcfg.nx,
                                                 detail::substream(pcfg.seed, 0xc011));
  const auto enc_maps = phantom::apply_bulk_motion(maps, pcfg.bulk_motion, pcfg.frames,
                                                   pcfg.frame_interval_ms, pcfg.pixel_mm);
  const int mid = pcfg.slices / 2;
  auto ks = encode::forward(cine.slices[mid], enc_maps, pattern, 0.0,
                            detail::substream(pcfg.seed, 0xe0c0, mid));
  ks.tr_ms = cfg.sampling.tr_ms;
  encode::add_noise(ks, cfg.noise_sigma_rel * encode::acquired_rms(ks),
                    detail::substream(pcfg.seed, 0xe0c0, mid));
  io::write_container((fs::path(args.out) / "kspace.rtxc").string(),
                      io::kspace_to_container(ks));
  std::cout << "encoded mid slice: " << ks.frames << " frames x " << ks.coils << " coils\n";
  return 0;
}

int cmd_recon(const CommonArgs& args, const std::string& input, int iterations, double tol,
              double threshold_scale) {
  auto cfg = load_with_overrides(args);
  fs::create_directories(args.out);
  auto ks = io::kspace_from_container(io::read_container(input));

  if (cfg.recon.reweight) {
    auto [w, rw] = recon::coil_reweight(ks);
    ks = std::move(rw);
    std::cout << "coil weights:";
    for (double x : w.weights) std::cout << ' ' << x;
    std::cout << '\n';
  }
  const auto maps = recon::estimate_sensitivities(ks, cfg.recon.calib_width);
  recon::TransformSet transforms;
  transforms.uwt_levels = cfg.recon.uwt_levels;
  recon::ReconSettings settings{iterations > 0 ? iterations : cfg.recon.iterations,
                                tol > 0 ? tol : cfg.recon.tol,
                                threshold_scale >= 0 ? threshold_scale
                                                     : cfg.recon.threshold_scale};
  auto result = recon::score_reconstruct(ks, maps, transforms, settings);
  io::write_container((fs::path(args.out) / "recon.rtxc").string(),
                      io::image_series_to_container(result.image));
  std::cout << "recon: " << result.iterations << " iterations, "
            << (result.converged ? "converged" : "max iterations reached");
  if (result.nonconvergence_warning) std::cout << " (WARNING: relative change > 10x tol)";
  std::cout << '\n';
  return 0;
}

int cmd_physio(const CommonArgs& args, const std::string& input, double age) {
  auto cfg = load_with_overrides(args);
  fs::create_directories(args.out);
  auto series = io::image_series_from_container(io::read_container(input));
  require(series.frame_interval_ms > 0, "physio: input series carries no frame timing");
  const auto signals =
      physio::extract_physio(series, 1000.0 / series.frame_interval_ms, age);
  const auto windows = physio::detect_end_expiration(signals.resp);
  const auto beats = physio::select_beats(
      signals, windows, cfg.mode == "ap" ? physio::AnalysisMode::ap : physio::AnalysisMode::ee);

  std::ofstream csv(fs::path(args.out) / "signals.csv");
  csv << "frame,resp,cardiac,ee_flag,beat_id\n";
  std::vector<int> beat_id(signals.resp.size(), -1);
  for (size_t b = 0; b < beats.beats.size(); ++b)
    for (int f = beats.beats[b].begin; f < beats.beats[b].end; ++f) beat_id[f] = int(b);
  std::vector<int> ee(signals.resp.size(), 0);
  for (auto [b, e] : windows)
    for (int f = b; f < e; ++f) ee[f] = 1;
  for (size_t f = 0; f < signals.resp.size(); ++f)
    csv << f << ',' << signals.resp[f] << ',' << signals.cardiac[f] << ',' << ee[f] << ','
        << beat_id[f] << '\n';

  io::write_container((fs::path(args.out) / "overlay.rtxc").string(),
                      io::overlay_to_container(physio::export_signal_overlay(series, signals)));
  std::cout << "physio: resp " << signals.resp_freq_hz << " Hz, HR " << signals.hr_bpm
            << " bpm, APHR " << signals.aphr_percent << "%, chosen beat ["
            << beats.beats[beats.chosen].begin << "," << beats.beats[beats.chosen].end << ") "
            << (beats.chosen_is_ee ? "EE" : "AP") << '\n';
  return 0;
}

int cmd_quant(double x1, double x2) {
  if (x1 >= 0 && x2 >= 0) {  // quick NMAE between two scalars
    std::cout << "nmae: " << quant::nmae(x1, x2) << " %\n";
    return 0;
  }
  throw std::runtime_error("quant: pass --x1 and --x2, or use `run` for full quantification");
}

int cmd_run(const CommonArgs& args) {
  auto cfg = load_with_overrides(args);
  const auto result = harness::run_experiment(cfg);
  int failures = 0;
  for (const auto& run : result.runs) {
    std::cout << (run.ok ? "[ok]   " : "[FAIL] ") << run.stage << " repeat " << run.repeat;
    if (!run.ok) {
      std::cout << " — " << run.error;
      ++failures;
    }
    std::cout << '\n';
  }
  harness::write_report(cfg.output.directory, cfg.output.format);
  std::cout << "artifacts in " << cfg.output.directory << ", report in "
            << cfg.output.directory << "/report\n";
  return failures == 0 ? 0 : 1;
}

int cmd_report(const CommonArgs& args) {
  harness::write_report(args.out, args.format.empty() ? "csv" : args.format);
  std::cout << "report written to " << (fs::path(args.out) / "report").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rtxc: accelerated real-time cardiac cine/flow simulation and reconstruction"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string csv_path, input;
  double age = 30.0, x1 = -1.0, x2 = -1.0;
  int iterations = 0;
  double tol = 0.0, threshold_scale = -1.0;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", args.config_path, "experiment config file (JSON)");
    if (need_config) opt->required();
    sub->add_option("--stage", args.stage, "restrict to one stage label");
    sub->add_option("--mode", args.mode, "analysis mode")->check(CLI::IsMember({"ee", "ap"}));
    sub->add_flag("--no-reweight", args.no_reweight, "disable coil reweighting");
    sub->add_option("--seed", args.seed, "override the seed (single repeat)");
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--format", args.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* phantom_cmd = app.add_subcommand("phantom", "generate a phantom and its ground truth");
  add_common(phantom_cmd, true);

  auto* sample_cmd = app.add_subcommand("sample", "generate an undersampling pattern");
  add_common(sample_cmd, true);
  sample_cmd->add_option("--csv", csv_path, "dump the frames x ny 0/1 matrix as CSV");

  auto* encode_cmd = app.add_subcommand("encode", "simulate multi-coil k-space for the mid slice");
  add_common(encode_cmd, true);

  auto* recon_cmd = app.add_subcommand("recon", "reconstruct a k-space container");
  add_common(recon_cmd, true);
  recon_cmd->add_option("--in", input, "kspace.rtxc input")->required();
  recon_cmd->add_option("--iterations", iterations, "solver iterations");
  recon_cmd->add_option("--tol", tol, "relative-change stopping tolerance");
  recon_cmd->add_option("--threshold-scale", threshold_scale, "threshold scale k");

  auto* physio_cmd = app.add_subcommand("physio", "extract respiratory/cardiac signals");
  add_common(physio_cmd, true);
  physio_cmd->add_option("--in", input, "image series container")->required();
  physio_cmd->add_option("--age", age, "subject age for APHR");

  auto* quant_cmd = app.add_subcommand("quant", "quantification helpers");
  add_common(quant_cmd, false);
  quant_cmd->add_option("--x1", x1, "first repeat value (NMAE)");
  quant_cmd->add_option("--x2", x2, "second repeat value (NMAE)");

  auto* run_cmd = app.add_subcommand("run", "run the full experiment pipeline");
  add_common(run_cmd, true);

  auto* report_cmd = app.add_subcommand("report", "aggregate runs into plot-data tables");
  add_common(report_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom_cmd->parsed()) return cmd_phantom(args);
    if (sample_cmd->parsed()) return cmd_sample(args, csv_path);
    if (encode_cmd->parsed()) return cmd_encode(args);
    if (recon_cmd->parsed()) return cmd_recon(args, input, iterations, tol, threshold_scale);
    if (physio_cmd->parsed()) return cmd_physio(args, input, age);
    if (quant_cmd->parsed()) return cmd_quant(x1, x2);
    if (run_cmd->parsed()) return cmd_run(args);
    if (report_cmd->parsed()) return cmd_report(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
