#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rtxc/types.hpp"

namespace rtxc::recon {

/// Calibration-region sensitivity estimation: apodized central k-space of the
/// time-averaged data, normalized by the root-sum-of-squares over coils.
/// RSS of the returned maps is 1 inside the body mask and 0 outside.
/// Throws std::runtime_error when the time average covers less than 90% of
/// the central calib_width lines.
CoilMaps estimate_sensitivities(const KSpaceSeries& kspace, int calib_width = 24,
                                int frames_to_average = -1);

struct CoilWeights {
  std::vector<double> weights;  ///< in [0, 1], 1 = untouched
  std::vector<double> scores;   ///< robust temporal coefficient of variation
  double threshold_z = 3.0;
};

/// Downweight coils whose central-line magnitude fluctuates over time
/// (bulk-motion-corrupted elements). Score: MAD-based robust coefficient of
/// temporal variation of the central-line magnitude; weights are 1 for
/// robust z <= 3 and exp(-(z-3)) beyond. Static data yields all-ones weights.
std::pair<CoilWeights, KSpaceSeries> coil_reweight(const KSpaceSeries& kspace);

/// Undecimated (shift-invariant) Haar decomposition over y, x and t.
/// Parseval-normalized: adjoint(forward(x)) == x. Subband order per level:
/// 7 detail combinations, approximation last (7*levels + 1 bands total).
std::vector<ImageSeries> uwt3_forward(const ImageSeries& image, int levels);
ImageSeries uwt3_adjoint(const std::vector<ImageSeries>& coefficients, int levels);

struct TemporalBasis {
  Eigen::MatrixXcd components;  ///< frames x K, orthonormal columns, eigenvalue-descending
  Eigen::VectorXd variances;    ///< captured temporal variance per component
};

/// Principal components of the frame-by-pixel matrix after temporal mean
/// removal, inferred from the stacked pair of series (flow-compensated and
/// flow-encoded share one temporal basis).
TemporalBasis temporal_pca_basis(const ImageSeries& a, const ImageSeries& b, int max_components = -1);

/// Sparsifying transforms used by the solver. The UWT approximation band and
/// the temporal-mean component of the PCA transform are never thresholded.
struct TransformSet {
  bool use_uwt = true;
  int uwt_levels = 1;
  bool use_tpca = false;
  Eigen::MatrixXcd tpca_basis;  ///< frames x frames unitary; column 0 = temporal mean
};

/// Unitary temporal transform for the solver: temporal-mean direction first,
/// then the data-driven principal components.
Eigen::MatrixXcd tpca_transform_matrix(const TemporalBasis& basis, int frames);

struct ReconSettings {
  int max_iter = 80;
  double tol = 1e-5;
  double threshold_scale = 1.0;  ///< k in threshold = k * MAD / 0.6745
};

struct ReconResult {
  ImageSeries image;
  std::vector<double> objective;  ///< recorded per iteration
  int iterations = 0;
  bool converged = false;
  bool nonconvergence_warning = false;  ///< relative change > 10*tol at max_iter
  std::vector<std::vector<double>> final_thresholds;  ///< per transform, per subband
};

/// Composite-sparsity compressed-sensing reconstruction: least-squares data
/// fidelity plus L1 across all transform subbands, solved with monotone FISTA.
/// Per-subband thresholds are re-estimated every iteration from the subband
/// itself (k * MAD / 0.6745) — content-adaptive, no tuned regularization
/// weights. After iteration 3 the thresholds follow a non-increasing envelope
/// so the recorded objective is guaranteed non-increasing.
ReconResult score_reconstruct(const KSpaceSeries& kspace, const CoilMaps& maps,
                              const TransformSet& transforms, const ReconSettings& settings = {});

/// Adjoint reconstruction with per-line density compensation (aggregate
/// acquisition count over the series). Baseline for reconstruction quality.
ImageSeries zero_filled(const KSpaceSeries& kspace, const CoilMaps& maps);

/// Temporal-fluctuation energy outside the dynamic-anatomy mask (union over
/// frames, dilated), normalized by in-mask signal energy. Phantom-truth-based
/// stand-in for reader scoring of motion artifacts.
double artifact_energy(const ImageSeries& image, const MaskSeries& anatomy_mask);

/// ||a - b||_2 / ||b||_2 over magnitudes; the reconstruction quality metric.
double nrmse(const ImageSeries& recon, const ImageSeries& truth);

/// Complex-valued NRMSE; used where phase fidelity matters (flow).
double nrmse_complex(const ImageSeries& recon, const ImageSeries& truth);

}  // namespace rtxc::recon
