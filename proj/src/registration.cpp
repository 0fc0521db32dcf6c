#include "iclap/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "iclap/error.hpp"

namespace iclap {

namespace {

constexpr double kRelEpsilon = 1e-12;

void require_same_shape(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  if (p.cols() == 0) throw ArgumentError("no matched pairs");
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw ArgumentError("matched point lists differ in shape");
}

}  // namespace

RigidTransform RigidTransform::identity(int dim) {
  return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

// Loops are written out so that a zero row/column contributes exact zeros;
// the 4D result on a constant fourth coordinate then equals the 3D one.
Eigen::MatrixXd RigidTransform::apply(const Eigen::MatrixXd& points) const {
  const Eigen::Index dim = points.rows();
  Eigen::MatrixXd out(dim, points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      double s = 0.0;
      for (Eigen::Index b = 0; b < dim; ++b) s += rotation(a, b) * points(b, i);
      out(a, i) = s + translation(a);
    }
  }
  return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& first) const {
  const Eigen::Index dim = translation.size();
  RigidTransform out{Eigen::MatrixXd(dim, dim), Eigen::VectorXd(dim)};
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) s += rotation(a, c) * first.rotation(c, b);
      out.rotation(a, b) = s;
    }
    double t = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) t += rotation(a, c) * first.translation(c);
    out.translation(a) = t + translation(a);
  }
  return out;
}

Eigen::VectorXd centroid(const Eigen::MatrixXd& points) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(points.rows());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index a = 0; a < points.rows(); ++a) c(a) += points(a, i);
  }
  return c / static_cast<double>(points.cols());
}

Eigen::VectorXd centroid(const Cloud& cloud) { return centroid(cloud.points()); }

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& p_matched, const Eigen::MatrixXd& q_matched) {
  require_same_shape(p_matched, q_matched);
  const Eigen::VectorXd pc = centroid(p_matched);
  const Eigen::VectorXd qc = centroid(q_matched);
  const Eigen::Index dim = p_matched.rows();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < p_matched.cols(); ++i) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      const double pa = p_matched(a, i) - pc(a);
      for (Eigen::Index b = 0; b < dim; ++b) h(a, b) += pa * (q_matched(b, i) - qc(b));
    }
  }
  return h;
}

Eigen::MatrixXd optimal_rotation(const Eigen::MatrixXd& h) {
  const Eigen::Index dim = h.rows();
  if (h.isZero(0.0)) return Eigen::MatrixXd::Identity(dim, dim);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(dim);
  d(dim - 1) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return v * d.asDiagonal() * u.transpose();
}

RigidTransform kabsch(const Eigen::MatrixXd& p_matched, const Eigen::MatrixXd& q_matched) {
  require_same_shape(p_matched, q_matched);
  const Eigen::Index dim = p_matched.rows();
  const Eigen::VectorXd pc = centroid(p_matched);
  const Eigen::VectorXd qc = centroid(q_matched);

  // Axes on which both sets are constant carry no rotational information.
  std::vector<Eigen::Index> active;
  for (Eigen::Index a = 0; a < dim; ++a) {
    bool varies = false;
    for (Eigen::Index i = 0; i < p_matched.cols() && !varies; ++i) {
      varies = p_matched(a, i) != p_matched(a, 0) || q_matched(a, i) != q_matched(a, 0);
    }
    if (varies) active.push_back(a);
  }

  Eigen::MatrixXd rotation = Eigen::MatrixXd::Identity(dim, dim);
  if (active.size() >= 2) {
    const Eigen::MatrixXd h = cross_covariance(p_matched, q_matched);
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd sub(na, na);
    for (Eigen::Index a = 0; a < na; ++a) {
      for (Eigen::Index b = 0; b < na; ++b) sub(a, b) = h(active[a], active[b]);
    }
    const Eigen::MatrixXd r = optimal_rotation(sub);
    for (Eigen::Index a = 0; a < na; ++a) {
      for (Eigen::Index b = 0; b < na; ++b) rotation(active[a], active[b]) = r(a, b);
    }
  }

  RigidTransform out{rotation, Eigen::VectorXd(dim)};
  for (Eigen::Index a = 0; a < dim; ++a) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < dim; ++b) s += rotation(a, b) * pc(b);
    out.translation(a) = qc(a) - s;
  }
  return out;
}

Eigen::MatrixXd random_rotation(int dim, Rng& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) g(a, b) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int a = 0; a < dim; ++a) {
    if (r(a, a) < 0.0) q.col(a) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

double nuclear_norm(const Eigen::MatrixXd& h) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
  return svd.singularValues().sum();
}

bool trace_optimality_check(const Eigen::MatrixXd& h, const Eigen::MatrixXd& rotation, int trials,
                            std::uint64_t seed) {
  if (h.rows() != rotation.rows() || h.cols() != rotation.cols() || h.rows() != h.cols()) {
    throw ArgumentError("rotation and cross-covariance dimensions differ");
  }
  constexpr double kSlack = 1e-9;
  const double best = (rotation * h).trace();
  if (best > nuclear_norm(h) + kSlack) return false;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    if ((random_rotation(static_cast<int>(h.rows()), rng) * h).trace() > best + kSlack) return false;
  }
  return true;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::AbsTolerance: return "abs_tolerance";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::RelChange: return "rel_change";
  }
  return "unknown";
}

void IcpParams::validate() const {
  if (max_iters <= 0) throw ArgumentError("max_iters must be positive");
  if (!std::isfinite(abs_tolerance) || abs_tolerance < 0.0) throw ArgumentError("abs_tolerance must be >= 0");
  if (!std::isfinite(rel_change_threshold) || rel_change_threshold < 0.0) {
    throw ArgumentError("rel_change_threshold must be >= 0");
  }
}

namespace {

double rms_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) sum += squared_distance(a.col(i).data(), b.col(i).data(), static_cast<int>(a.rows()));
  return std::sqrt(sum / static_cast<double>(a.cols()));
}

}  // namespace

RegistrationResult icp_register(const Cloud& test, const Cloud& model, const IcpParams& params) {
  return icp_register(test, model, KdTree(model), params);
}

RegistrationResult icp_register(const Cloud& test, const Cloud& model, const KdTree& model_tree,
                                const IcpParams& params) {
  params.validate();
  const int dim = test.dim();
  if (model.dim() != dim || model_tree.dim() != dim) throw ArgumentError("test and model dimensions differ");

  RigidTransform current = RigidTransform::identity(dim);
  if (params.init) {
    if (params.init->dim() != dim) throw ArgumentError("initial transform dimension differs from the clouds");
    current = *params.init;
  } else if (params.init_mode == InitMode::Centroid) {
    current.translation = centroid(model) - centroid(test);
  }

  const auto n = static_cast<Eigen::Index>(test.size());
  Eigen::MatrixXd matched(dim, n);
  RegistrationResult result{current, std::numeric_limits<double>::infinity(), 0, StopReason::MaxIters, {}};

  for (int it = 1; it <= params.max_iters; ++it) {
    const Eigen::MatrixXd moved = current.apply(test.points());
    for (Eigen::Index i = 0; i < n; ++i) {
      matched.col(i) = model.point(model_tree.nearest(moved.col(i)).index);
    }
    const RigidTransform step = kabsch(moved, matched);
    const double before = rms_distance(moved, matched);
    const double after = rms_distance(step.apply(moved), matched);
    // a solve that does not improve on the new pairs is dropped
    const bool take = after <= before;
    const double error = take ? after : before;

    if (!result.error_trace.empty() && error > result.error) {
      result.stop_reason = StopReason::RelChange;
      break;
    }
    const double previous = result.error;
    if (take) current = step.compose(current);
    result.transform = current;
    result.error = error;
    result.iterations = it;
    result.error_trace.push_back(error);

    if (error <= params.abs_tolerance) {
      result.stop_reason = StopReason::AbsTolerance;
      break;
    }
    if (it == params.max_iters) {
      result.stop_reason = StopReason::MaxIters;
      break;
    }
    if (it > 1 && std::abs(previous - error) / std::max(previous, kRelEpsilon) < params.rel_change_threshold) {
      result.stop_reason = StopReason::RelChange;
      break;
    }
  }
  return result;
}

double iclap_distance(const Cloud& test4, const Cloud& model4, const IcpParams& params) {
  if (test4.dim() != 4 || model4.dim() != 4) throw ArgumentError("iclap_distance expects 4D clouds");
  return icp_register(test4, model4, params).error;
}

}  // namespace iclap
