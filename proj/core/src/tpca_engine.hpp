#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rtxc/types.hpp"

namespace rtxc::recon {

// Unitary temporal transform along the frame axis. Row 0 of the coefficient
// matrix corresponds to the temporal-mean direction and is never thresholded;
// the remaining rows are the data-driven principal components.
class TpcaEngine {
 public:
  explicit TpcaEngine(Eigen::MatrixXcd basis);

  int detail_bands() const { return static_cast<int>(basis_.cols()) - 1; }

  std::vector<double> l1_norms(const std::vector<cplx>& x, size_t pixels) const;
  void prox(std::vector<cplx>& x, size_t pixels, double scale, std::vector<double>& envelope,
            bool envelope_active) const;

  const Eigen::MatrixXcd& basis() const { return basis_; }

 private:
  Eigen::MatrixXcd basis_;  // frames x frames, unitary
};

}  // namespace rtxc::recon
