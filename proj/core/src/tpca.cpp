#include "tpca_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtxc/detail/stats.hpp"
#include "rtxc/recon.hpp"

namespace rtxc::recon {

namespace {
constexpr double kMadToSigma = 0.6745;

using RowMajorMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double row_mad(const Eigen::MatrixXcd& coeffs, int row, std::vector<double>& scratch) {
  const auto n = coeffs.cols();
  scratch.resize(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    scratch[2 * j] = coeffs(row, j).real();
    scratch[2 * j + 1] = coeffs(row, j).imag();
  }
  const double med = detail::median_inplace(scratch);
  for (Eigen::Index j = 0; j < n; ++j) {
    scratch[2 * j] = std::abs(coeffs(row, j).real() - med);
    scratch[2 * j + 1] = std::abs(coeffs(row, j).imag() - med);
  }
  return detail::median_inplace(scratch);
}
}  // namespace

TpcaEngine::TpcaEngine(Eigen::MatrixXcd basis) : basis_(std::move(basis)) {
  require(basis_.rows() == basis_.cols() && basis_.rows() >= 2,
          "tpca: transform basis must be square");
}

std::vector<double> TpcaEngine::l1_norms(const std::vector<cplx>& x, size_t pixels) const {
  const auto frames = basis_.rows();
  Eigen::Map<const RowMajorMat> X(x.data(), frames, static_cast<Eigen::Index>(pixels));
  Eigen::MatrixXcd coeffs = basis_.adjoint() * X;
  std::vector<double> norms(detail_bands());
  for (Eigen::Index r = 1; r < frames; ++r)
    norms[r - 1] = coeffs.row(r).cwiseAbs().sum();
  return norms;
}

void TpcaEngine::prox(std::vector<cplx>& x, size_t pixels, double scale,
                      std::vector<double>& envelope, bool envelope_active) const {
  if (envelope.empty())
    envelope.assign(detail_bands(), std::numeric_limits<double>::infinity());
  const auto frames = basis_.rows();
  Eigen::Map<RowMajorMat> X(x.data(), frames, static_cast<Eigen::Index>(pixels));
  Eigen::MatrixXcd coeffs = basis_.adjoint() * X;

  std::vector<double> scratch;
  for (Eigen::Index r = 1; r < frames; ++r) {
    double lambda = scale * row_mad(coeffs, static_cast<int>(r), scratch) / kMadToSigma;
    if (envelope_active) lambda = std::min(lambda, envelope[r - 1]);
    envelope[r - 1] = lambda;
    if (lambda <= 0.0) continue;
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
      cplx& c = coeffs(r, j);
      const double mag = std::abs(c);
      c = mag > lambda ? c * ((mag - lambda) / mag) : cplx(0.0, 0.0);
    }
  }
  X = basis_ * coeffs;
}

TemporalBasis temporal_pca_basis(const ImageSeries& a, const ImageSeries& b,
                                 int max_components) {
  require(a.frames >= 8, "temporal_pca_basis: need at least 8 frames");
  const bool stacked = b.frames > 0;
  if (stacked)
    require(b.frames == a.frames, "temporal_pca_basis: stacked series must share frame count");

  const Eigen::Index frames = a.frames;
  const Eigen::Index pa = static_cast<Eigen::Index>(a.frame_size());
  const Eigen::Index pb = stacked ? static_cast<Eigen::Index>(b.frame_size()) : 0;

  Eigen::MatrixXcd m(frames, pa + pb);
  for (Eigen::Index f = 0; f < frames; ++f) {
    for (Eigen::Index p = 0; p < pa; ++p) m(f, p) = a.data[f * pa + p];
    for (Eigen::Index p = 0; p < pb; ++p) m(f, pa + p) = b.data[f * pb + p];
  }
  m.rowwise() -= m.colwise().mean();  // temporal mean removal per pixel

  Eigen::MatrixXcd gram = m * m.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);

  const Eigen::Index k_all = frames - 1;  // mean removal costs one rank
  const Eigen::Index k =
      max_components > 0 ? std::min<Eigen::Index>(max_components, k_all) : k_all;

  TemporalBasis out;
  out.components.resize(frames, k);
  out.variances.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    // Eigen orders eigenvalues ascending
    out.components.col(i) = eig.eigenvectors().col(frames - 1 - i);
    out.variances[i] = std::max(eig.eigenvalues()(frames - 1 - i), 0.0);
  }
  return out;
}

Eigen::MatrixXcd tpca_transform_matrix(const TemporalBasis& basis, int frames) {
  require(basis.components.rows() == frames,
          "tpca_transform_matrix: basis frame count mismatch");
  require(basis.components.cols() >= frames - 1,
          "tpca_transform_matrix: need a full basis (frames-1 components)");

  Eigen::MatrixXcd b(frames, frames);
  b.col(0).setConstant(cplx(1.0 / std::sqrt(static_cast<double>(frames)), 0.0));
  for (int i = 0; i < frames - 1; ++i) b.col(i + 1) = basis.components.col(i);

  // one round of modified Gram-Schmidt to pin down unitarity
  for (int j = 0; j < frames; ++j) {
    for (int i = 0; i < j; ++i) b.col(j) -= b.col(i).dot(b.col(j)) * b.col(i);
    const double norm = b.col(j).norm();
    require(norm > 1e-12, "tpca_transform_matrix: degenerate basis");
    b.col(j) /= norm;
  }
  return b;
}

}  // namespace rtxc::recon
