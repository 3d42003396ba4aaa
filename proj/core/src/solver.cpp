#include <cmath>
#include <optional>

#include "rtxc/recon.hpp"
#include "sense_op.hpp"
#include "tpca_engine.hpp"
#include "uwt_engine.hpp"

namespace rtxc::recon {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rel_change(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

ReconResult score_reconstruct(const KSpaceSeries& kspace, const CoilMaps& maps,
                              const TransformSet& transforms, const ReconSettings& settings) {
  require(transforms.use_uwt || transforms.use_tpca,
          "score_reconstruct: at least one sparsifying transform required");

  SenseOp op(kspace, maps);
  const size_t pixels = static_cast<size_t>(kspace.ny) * kspace.nx;

  std::optional<UwtEngine> uwt;
  if (transforms.use_uwt)
    uwt.emplace(kspace.frames, kspace.ny, kspace.nx, transforms.uwt_levels);
  std::optional<TpcaEngine> tpca;
  if (transforms.use_tpca) tpca.emplace(transforms.tpca_basis);

  ReconResult result;
  result.image = zero_filled(kspace, maps);
  std::vector<cplx>& x = result.image.data;

  std::vector<double> env_uwt, env_tpca;
  std::vector<double> l1_x_uwt, l1_x_tpca;
  if (uwt) l1_x_uwt = uwt->l1_norms(x);
  if (tpca) l1_x_tpca = tpca->l1_norms(x, pixels);
  double fid_x = op.fidelity(x);

  std::vector<cplx> x_prev = x;
  std::vector<cplx> y = x;
  std::vector<cplx> grad, z;
  double t_momentum = 1.0;
  bool restarted = false;
  double last_change = 0.0;

  for (int k = 1; k <= settings.max_iter; ++k) {
    const bool envelope_active = k > 3;

    op.gradient(y, grad);
    z = y;
    for (size_t i = 0; i < z.size(); ++i) z[i] -= grad[i];

    // sequential composite prox; thresholds re-estimated from the subbands
    if (uwt) uwt->prox(z, settings.threshold_scale, env_uwt, envelope_active);
    if (tpca) tpca->prox(z, pixels, settings.threshold_scale, env_tpca, envelope_active);

    const double fid_z = op.fidelity(z);
    std::vector<double> l1_z_uwt, l1_z_tpca;
    if (uwt) l1_z_uwt = uwt->l1_norms(z);
    if (tpca) l1_z_tpca = tpca->l1_norms(z, pixels);

    // candidate vs previous accepted iterate, both at the current thresholds
    const double pen_z = dot(env_uwt, l1_z_uwt) + dot(env_tpca, l1_z_tpca);
    const double pen_x = dot(env_uwt, l1_x_uwt) + dot(env_tpca, l1_x_tpca);
    const double f_z = fid_z + pen_z;
    const double f_x = fid_x + pen_x;

    if (f_z <= f_x || !envelope_active) {
      last_change = rel_change(z, x);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      x_prev = x;
      x = z;
      y.resize(x.size());
      const double beta = (t_momentum - 1.0) / t_next;
      for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
      t_momentum = t_next;
      fid_x = fid_z;
      l1_x_uwt = std::move(l1_z_uwt);
      l1_x_tpca = std::move(l1_z_tpca);
      restarted = false;
      result.objective.push_back(f_z);
      result.iterations = k;
      if (last_change < settings.tol) {
        result.converged = true;
        break;
      }
    } else {
      // monotone safeguard: keep the previous iterate, restart momentum
      result.objective.push_back(f_x);
      result.iterations = k;
      if (restarted) break;  // no further progress possible from this point
      y = x;
      t_momentum = 1.0;
      restarted = true;
    }
  }

  if (!result.converged && last_change > 10.0 * settings.tol)
    result.nonconvergence_warning = true;
  if (uwt) result.final_thresholds.push_back(env_uwt);
  if (tpca) result.final_thresholds.push_back(env_tpca);
  result.image.frame_interval_ms = kspace.tr_ms * kspace.pattern.lines_per_frame;
  return result;
}

}  // namespace rtxc::recon
