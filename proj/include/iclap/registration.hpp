#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "iclap/kdtree.hpp"
#include "iclap/rng.hpp"
#include "iclap/types.hpp"

namespace iclap {

/// x -> R x + T with R a proper rotation.
struct RigidTransform {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd translation;

  static RigidTransform identity(int dim);

  int dim() const noexcept { return static_cast<int>(translation.size()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
  /// (*this) after `first`.
  RigidTransform compose(const RigidTransform& first) const;
};

Eigen::VectorXd centroid(const Cloud& cloud);
Eigen::VectorXd centroid(const Eigen::MatrixXd& points);

/// H = sum_i p'_i q'_i^T over centroid deviations of matched columns.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& p_matched, const Eigen::MatrixXd& q_matched);

/// Proper rotation maximizing tr(R H): V diag(1, ..., det(V U^T)) U^T for
/// H = U S V^T. Returns I when H is exactly zero.
Eigen::MatrixXd optimal_rotation(const Eigen::MatrixXd& h);

/// Least-squares proper rigid motion taking p_matched onto q_matched
/// (columns are matched pairs).
///
/// R = V diag(1, ..., det(V U^T)) U^T from the SVD H = U S V^T, and
/// T = q_mean - R p_mean. Coordinates along which both sets have zero spread
/// are left fixed; with no spread at all R = I. Throws ArgumentError for empty
/// or mismatched inputs.
RigidTransform kabsch(const Eigen::MatrixXd& p_matched, const Eigen::MatrixXd& q_matched);

/// Uniformly distributed proper rotation (QR of a Gaussian matrix).
Eigen::MatrixXd random_rotation(int dim, Rng& rng);

/// Sum of singular values of H, i.e. tr(sqrt(H^T H)).
double nuclear_norm(const Eigen::MatrixXd& h);

/// Checks tr(R H) against `trials` random proper rotations and the upper bound
/// tr(sqrt(H^T H)), both with 1e-9 slack.
bool trace_optimality_check(const Eigen::MatrixXd& h, const Eigen::MatrixXd& rotation, int trials,
                            std::uint64_t seed);

enum class StopReason { AbsTolerance, MaxIters, RelChange };
std::string_view to_string(StopReason reason);

enum class InitMode { Centroid, Identity };

struct IcpParams {
  int max_iters = 50;
  double abs_tolerance = 1e-6;
  double rel_change_threshold = 1e-4;
  /// Used when set; otherwise `init_mode` decides.
  std::optional<RigidTransform> init;
  InitMode init_mode = InitMode::Centroid;

  /// Throws ArgumentError on non-positive max_iters or negative/non-finite
  /// thresholds.
  void validate() const;
};

struct RegistrationResult {
  RigidTransform transform;
  /// Root-mean-square distance over matched pairs after alignment.
  double error = 0.0;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIters;
  std::vector<double> error_trace;
};

/// Iterative closest point in 3 or 4 dimensions.
///
/// Each iteration transforms the test cloud, matches every point to its
/// nearest model point, solves kabsch on the pairs and records the RMS pair
/// distance. A solve that does not lower the error on its own pairs is not
/// applied, and an iteration that would raise the error (round-off at
/// convergence) ends the run as RelChange, so error_trace never increases.
RegistrationResult icp_register(const Cloud& test, const Cloud& model, const IcpParams& params);
RegistrationResult icp_register(const Cloud& test, const Cloud& model, const KdTree& model_tree,
                                const IcpParams& params);

/// Registration error of a 4D test cloud against a 4D model.
double iclap_distance(const Cloud& test4, const Cloud& model4, const IcpParams& params);

}  // namespace iclap
