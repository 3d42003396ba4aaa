#pragma once

#include <string>
#include <vector>

#include "rtxc/config.hpp"

namespace rtxc::harness {

struct RunResult {
  std::string stage;
  int repeat = 0;  ///< 1-based
  bool reweight = true;
  bool ok = false;
  std::string error;
  std::string dir;  ///< run directory relative to the experiment root
};

struct ExperimentResult {
  std::string out_dir;
  std::vector<RunResult> runs;
};

/// Full pipeline per (stage, repeat): phantom -> sample -> encode ->
/// (reweight) -> reconstruct -> physio -> quant. Every intermediate and
/// report is persisted under output.directory; a manifest records the config
/// hash and a content hash of every emitted file. A failing run is recorded
/// and does not stop the others.
ExperimentResult run_experiment(const config::ExperimentConfig& cfg);

/// Aggregate completed runs in an experiment directory into plot-ready data
/// files: per-stage parameter traces, repeat scatter pairs, NMAE/CCC tables
/// and before/after coil-reweighting artifact scores. Missing runs are
/// skipped per table, not fatal.
void write_report(const std::string& out_dir, const std::string& format);

}  // namespace rtxc::harness
