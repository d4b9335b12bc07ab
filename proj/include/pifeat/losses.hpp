#pragma once

// Training losses, evaluated forward-only: the covariance-weighted geodesic
// loss over se(3) residuals and the beta-balanced polar loss, plus the
// finite-difference machinery used to sanity check loss gradients.

#include <span>
#include <vector>

#include "pifeat/dataset.hpp"
#include "pifeat/lie.hpp"

namespace pifeat::loss {

struct GeodesicLossReport {
  double total = 0.0;
  std::vector<lie::Se3Tangent> residuals;  // g_i per example
};

/// total = sum_i g_i^T Sigma^-1 g_i with g_i = log(gt_i^-1 * exp(xi_i)).
/// Sigma is factored once (LDLT).
GeodesicLossReport geodesic_loss(std::span<const lie::Se3Tangent> predictions,
                                 std::span<const lie::Pose> gt_deltas,
                                 const data::EmpiricalCovariance& cov);

/// d(total)/d(xi_i) per example, via a fourth-order central-difference
/// stencil (the loss separates per example). Throws NearCutLocus when any
/// residual rotation angle reaches pi - 0.1.
std::vector<lie::Se3Tangent> geodesic_loss_gradient(
    std::span<const lie::Se3Tangent> predictions, std::span<const lie::Pose> gt_deltas,
    const data::EmpiricalCovariance& cov);

/// Max relative deviation between the implemented gradient and plain central
/// differences with the given step (denominator floored at 1e-8).
double geodesic_loss_gradient_check(std::span<const lie::Se3Tangent> predictions,
                                    std::span<const lie::Pose> gt_deltas,
                                    const data::EmpiricalCovariance& cov,
                                    double step = 1e-5);

struct PolarLossConfig {
  double beta = 1.0;  // > 0, weights the heading term
};

/// sum_i (dl_i - dl_hat_i)^2 + beta * (dphi_i - dphi_hat_i)^2.
double polar_loss(std::span<const data::PolarOdometry> predictions,
                  std::span<const data::PolarOdometry> labels, const PolarLossConfig& cfg);

/// beta that equalizes the summed translation and heading terms on a batch.
double calibrate_beta(std::span<const data::PolarOdometry> predictions,
                      std::span<const data::PolarOdometry> labels);

}  // namespace pifeat::loss
