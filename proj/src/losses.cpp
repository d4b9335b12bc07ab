#include "pifeat/losses.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

namespace pifeat::loss {

using lie::Pose;
using lie::Se3Tangent;

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw LengthMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

Se3Tangent residual(const Se3Tangent& prediction, const Pose& gt_delta) {
  return lie::se3_log(gt_delta.inverse() * lie::se3_exp(prediction));
}

double example_term(const Se3Tangent& prediction, const Pose& gt_delta,
                    const Eigen::LDLT<Eigen::Matrix<double, 6, 6>>& sigma_ldlt) {
  const Se3Tangent g = residual(prediction, gt_delta);
  return g.dot(sigma_ldlt.solve(g));
}

}  // namespace

GeodesicLossReport geodesic_loss(std::span<const Se3Tangent> predictions,
                                 std::span<const Pose> gt_deltas,
                                 const data::EmpiricalCovariance& cov) {
  check_lengths(predictions.size(), gt_deltas.size(), "geodesic_loss");
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> sigma_ldlt(cov.sigma);
  GeodesicLossReport report;
  report.residuals.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Se3Tangent g = residual(predictions[i], gt_deltas[i]);
    report.total += g.dot(sigma_ldlt.solve(g));
    report.residuals.push_back(g);
  }
  return report;
}

std::vector<Se3Tangent> geodesic_loss_gradient(std::span<const Se3Tangent> predictions,
                                               std::span<const Pose> gt_deltas,
                                               const data::EmpiricalCovariance& cov) {
  check_lengths(predictions.size(), gt_deltas.size(), "geodesic_loss_gradient");
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> sigma_ldlt(cov.sigma);

  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double angle = residual(predictions[i], gt_deltas[i]).tail<3>().norm();
    if (angle >= M_PI - 0.1) {
      throw NearCutLocus("residual rotation angle " + std::to_string(angle) +
                         " too close to pi for a reliable gradient");
    }
  }

  constexpr double h = 1e-3;
  std::vector<Se3Tangent> grads(predictions.size(), Se3Tangent::Zero());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (int j = 0; j < 6; ++j) {
      const auto term_at = [&](double delta) {
        Se3Tangent xi = predictions[i];
        xi[j] += delta;
        return example_term(xi, gt_deltas[i], sigma_ldlt);
      };
      // five-point stencil, O(h^4)
      grads[i][j] = (-term_at(2.0 * h) + 8.0 * term_at(h) - 8.0 * term_at(-h) +
                     term_at(-2.0 * h)) /
                    (12.0 * h);
    }
  }
  return grads;
}

double geodesic_loss_gradient_check(std::span<const Se3Tangent> predictions,
                                    std::span<const Pose> gt_deltas,
                                    const data::EmpiricalCovariance& cov, double step) {
  const std::vector<Se3Tangent> implemented =
      geodesic_loss_gradient(predictions, gt_deltas, cov);
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> sigma_ldlt(cov.sigma);

  double max_dev = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (int j = 0; j < 6; ++j) {
      const auto term_at = [&](double delta) {
        Se3Tangent xi = predictions[i];
        xi[j] += delta;
        return example_term(xi, gt_deltas[i], sigma_ldlt);
      };
      const double fd = (term_at(step) - term_at(-step)) / (2.0 * step);
      const double denom = std::max({std::abs(fd), std::abs(implemented[i][j]), 1e-8});
      max_dev = std::max(max_dev, std::abs(fd - implemented[i][j]) / denom);
    }
  }
  return max_dev;
}

double polar_loss(std::span<const data::PolarOdometry> predictions,
                  std::span<const data::PolarOdometry> labels, const PolarLossConfig& cfg) {
  check_lengths(predictions.size(), labels.size(), "polar_loss");
  if (!(cfg.beta > 0.0)) {
    throw ConfigError("polar loss beta must be positive");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double dl = predictions[i].delta_l - labels[i].delta_l;
    const double dphi = predictions[i].delta_phi - labels[i].delta_phi;
    total += dl * dl + cfg.beta * dphi * dphi;
  }
  return total;
}

double calibrate_beta(std::span<const data::PolarOdometry> predictions,
                      std::span<const data::PolarOdometry> labels) {
  check_lengths(predictions.size(), labels.size(), "calibrate_beta");
  double translation_term = 0.0;
  double heading_term = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double dl = predictions[i].delta_l - labels[i].delta_l;
    const double dphi = predictions[i].delta_phi - labels[i].delta_phi;
    translation_term += dl * dl;
    heading_term += dphi * dphi;
  }
  if (translation_term == 0.0 || heading_term == 0.0) {
    throw DegenerateBatch("both loss terms must be nonzero to calibrate beta");
  }
  return translation_term / heading_term;
}

}  // namespace pifeat::loss
