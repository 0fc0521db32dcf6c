#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"

#include "iclap/error.hpp"
#include "iclap/kdtree.hpp"
#include "iclap/registration.hpp"
#include "iclap/rng.hpp"

using namespace iclap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_points(Rng& rng, int dim, int n, double scale = 10.0) {
  MatrixXd p(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) p(i, j) = rng.normal(0, scale);
  }
  return p;
}

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

MatrixXd grid3(int n, double spacing) {
  MatrixXd g(3, n * n * n);
  int k = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) g.col(k++) = Eigen::Vector3d(a, b, c) * spacing;
    }
  }
  return g;
}

double sum_sq(const RigidTransform& t, const MatrixXd& p, const MatrixXd& q) {
  return (t.apply(p) - q).colwise().squaredNorm().sum();
}

}  // namespace

TEST_CASE("centroid examples") {
  MatrixXd p(4, 2);
  p << 0, 2, 0, 2, 0, 2, 0, 2;
  CHECK(centroid(Cloud(p)) == VectorXd::Ones(4));
  MatrixXd one(3, 1);
  one << 1.5, -2, 7;
  CHECK(centroid(Cloud(one)) == VectorXd(one.col(0)));
  Rng rng(1);
  const MatrixXd r = random_points(rng, 4, 37);
  VectorXd sum = VectorXd::Zero(4);
  for (int j = 0; j < 37; ++j) sum += r.col(j);
  CHECK(max_abs(centroid(Cloud(r)) - sum / 37.0) <= 1e-12);
}

TEST_CASE("kabsch on identical sets") {
  Rng rng(2);
  for (int dim : {3, 4}) {
    const MatrixXd p = random_points(rng, dim, dim + 3);
    const RigidTransform t = kabsch(p, p);
    CHECK(max_abs(t.rotation - MatrixXd::Identity(dim, dim)) <= 1e-12);
    CHECK(max_abs(t.translation) <= 1e-12);
    CHECK(sum_sq(t, p, p) <= 1e-20);
  }
}

TEST_CASE("kabsch on a single pair") {
  MatrixXd p(4, 1), q(4, 1);
  p << 1, 2, 3, 4;
  q << 2, 2, 3, 4;
  const RigidTransform t = kabsch(p, q);
  CHECK(t.rotation == MatrixXd::Identity(4, 4));
  CHECK(t.translation == (VectorXd(4) << 1, 0, 0, 0).finished());
  CHECK_THROWS_AS(kabsch(MatrixXd(4, 0), MatrixXd(4, 0)), ArgumentError);
  CHECK_THROWS_AS(kabsch(MatrixXd::Zero(4, 2), MatrixXd::Zero(3, 2)), ArgumentError);
}

TEST_CASE("kabsch recovers a known four-dimensional motion") {
  const double deg = std::numbers::pi / 180.0;
  const MatrixXd r_true = oracle::givens(4, 0, 3, 30 * deg) * oracle::givens(4, 1, 2, 70 * deg);
  const VectorXd t_true = (VectorXd(4) << 1, -2, 3, 0.5).finished();
  Rng rng(3);
  const MatrixXd p = random_points(rng, 4, 20);
  const MatrixXd q = (r_true * p).colwise() + t_true;
  const RigidTransform t = kabsch(p, q);
  CHECK(max_abs(t.rotation - r_true) < 1e-9);
  CHECK(max_abs(t.translation - t_true) < 1e-9);
}

TEST_CASE("kabsch rotations are proper and orthonormal") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const int dim = 3 + t % 2;
    const MatrixXd p = random_points(rng, dim, 10), q = random_points(rng, dim, 10);
    const MatrixXd r = kabsch(p, q).rotation;
    CHECK(max_abs(r.transpose() * r - MatrixXd::Identity(dim, dim)) <= 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kabsch beats sampled rotations") {
  Rng rng(5);
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    const int dim = 3 + t % 2;
    const MatrixXd p = random_points(rng, dim, 12), q = random_points(rng, dim, 12);
    const RigidTransform best = kabsch(p, q);
    const double e = sum_sq(best, p, q);
    const VectorXd pm = centroid(p), qm = centroid(q);
    for (int s = 0; s < 500; ++s) {
      RigidTransform cand{random_rotation(dim, rng), VectorXd()};
      cand.translation = qm - cand.rotation * pm;
      if (sum_sq(cand, p, q) < e - 1e-9) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("kabsch residual under noise") {
  Rng rng(6);
  const double sigma = 0.3;
  for (int t = 0; t < 20; ++t) {
    const int dim = 3 + t % 2;
    const int n = 60;
    const MatrixXd p = random_points(rng, dim, n);
    MatrixXd q = (random_rotation(dim, rng) * p).colwise() + random_points(rng, dim, 1).col(0);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < dim; ++i) q(i, j) += rng.normal(0, sigma);
    }
    // per-coordinate residual RMS
    const double rms = std::sqrt(sum_sq(kabsch(p, q), p, q) / (n * dim));
    CHECK(rms >= 0.5 * sigma);
    CHECK(rms <= 1.5 * sigma);
  }
}

TEST_CASE("trace optimality") {
  for (int dim : {3, 4}) {
    const MatrixXd eye = MatrixXd::Identity(dim, dim);
    CHECK(optimal_rotation(eye) == eye);
    CHECK((optimal_rotation(eye) * eye).trace() == doctest::Approx(dim));
    CHECK(nuclear_norm(eye) == doctest::Approx(dim));
    CHECK(trace_optimality_check(eye, eye, 200, 1));
    const MatrixXd zero = MatrixXd::Zero(dim, dim);
    CHECK(optimal_rotation(zero) == eye);
    CHECK(trace_optimality_check(zero, eye, 200, 2));
  }
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const int dim = 3 + t % 2;
    const MatrixXd h = random_points(rng, dim, dim, 1.0);
    CHECK(trace_optimality_check(h, optimal_rotation(h), 1000, static_cast<std::uint64_t>(t)));
    // a reflection-flipped answer should not pass
    MatrixXd flipped = optimal_rotation(h);
    flipped.col(0) *= -1;
    flipped.col(1) *= -1;
    if ((flipped * h).trace() < (optimal_rotation(h) * h).trace() - 1e-6) {
      CHECK_FALSE(trace_optimality_check(h, flipped, 2000, 5));
    }
  }
}

TEST_CASE("kd tree shape") {
  MatrixXd one(4, 1);
  one << 1, 2, 3, 4;
  const KdTree t1{Cloud(one)};
  CHECK(t1.size() == 1);
  CHECK(t1.depth() == 1);
  Rng rng(8);
  for (int n : {2, 7, 64, 100}) {
    const KdTree t{Cloud(random_points(rng, 3, n))};
    CHECK(t.size() == static_cast<std::size_t>(n));
    CHECK(t.depth() == static_cast<std::size_t>(std::ceil(std::log2(n + 1))));
  }
}

TEST_CASE("kd tree examples") {
  MatrixXd two(4, 2);
  two << 0, 10, 0, 0, 0, 0, 0, 0;
  const KdTree t{Cloud(two)};
  const Neighbor n = t.nearest((VectorXd(4) << 4, 0, 0, 0).finished());
  CHECK(n.index == 0);
  CHECK(n.distance == 4.0);
  const Neighbor self = t.nearest(two.col(1));
  CHECK(self.index == 1);
  CHECK(self.distance == 0.0);
  CHECK_THROWS_AS(t.nearest(VectorXd::Zero(3)), ArgumentError);
}

TEST_CASE("kd tree matches linear scan") {
  Rng rng(9);
  for (int dim : {3, 4}) {
    const MatrixXd pts = random_points(rng, dim, 500);
    const KdTree tree{Cloud(pts)};
    for (int q = 0; q < 1000; ++q) {
      const VectorXd query = random_points(rng, dim, 1, 12.0).col(0);
      const Neighbor a = tree.nearest(query);
      const oracle::Nearest b = oracle::linear_nearest(pts, query);
      CHECK(a.index == b.index);
      CHECK(a.distance == b.distance);
    }
  }
}

TEST_CASE("kd tree ties go to the lowest index") {
  // integer lattice with duplicates, queried at half-integer points
  Rng rng(10);
  MatrixXd pts(4, 300);
  for (int j = 0; j < 300; ++j) {
    for (int i = 0; i < 4; ++i) pts(i, j) = static_cast<double>(rng.below(4));
  }
  const KdTree tree{Cloud(pts)};
  for (int q = 0; q < 2000; ++q) {
    VectorXd query(4);
    for (int i = 0; i < 4; ++i) query(i) = 0.5 * static_cast<double>(rng.below(8)) - 0.5;
    const Neighbor a = tree.nearest(query);
    const oracle::Nearest b = oracle::linear_nearest(pts, query);
    CHECK(a.index == b.index);
    CHECK(a.distance == b.distance);
  }
}

TEST_CASE("icp on identical clouds") {
  Rng rng(11);
  const Cloud c(random_points(rng, 4, 30));
  IcpParams params;
  params.init_mode = InitMode::Identity;
  const RegistrationResult r = icp_register(c, c, params);
  CHECK(r.error == 0.0);
  CHECK(r.iterations == 1);
  CHECK(r.stop_reason == StopReason::AbsTolerance);
  CHECK(iclap_distance(c, c, IcpParams{}) == 0.0);
}

TEST_CASE("icp undoes a grid translation") {
  const MatrixXd model = grid3(4, 10.0);
  const MatrixXd test = model.colwise() + Eigen::Vector3d(2, 0, 0);
  IcpParams params;
  params.init_mode = InitMode::Identity;
  const RegistrationResult r = icp_register(Cloud(test), Cloud(model), params);
  CHECK(r.error < 1e-6);
  CHECK(max_abs(r.transform.translation - Eigen::Vector3d(-2, 0, 0)) < 1e-6);
  CHECK(max_abs(r.transform.rotation - MatrixXd::Identity(3, 3)) < 1e-9);

  const oracle::IcpOut o = oracle::brute_icp(test, model, 50, 1e-6);
  CHECK(o.error < 1e-6);
  CHECK(max_abs(o.translation - r.transform.translation) < 1e-9);
  CHECK(max_abs(o.rotation - r.transform.rotation) < 1e-9);
}

TEST_CASE("icp agrees with a linear-scan loop") {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const int dim = 3 + t % 2;
    const MatrixXd model = random_points(rng, dim, 80);
    const double deg = std::numbers::pi / 180.0;
    const MatrixXd rot = oracle::givens(dim, 0, 1, 8 * deg) * oracle::givens(dim, 1, 2, -5 * deg);
    const MatrixXd test = (rot * model.leftCols(40)).colwise() + VectorXd::Constant(dim, 0.7);
    IcpParams params;
    params.init_mode = InitMode::Identity;
    params.max_iters = 30;
    params.abs_tolerance = 0.0;
    params.rel_change_threshold = 0.0;
    const RegistrationResult r = icp_register(Cloud(test), Cloud(model), params);
    const oracle::IcpOut o = oracle::brute_icp(test, model, r.iterations, 0.0);
    CHECK(r.error == doctest::Approx(o.error).epsilon(1e-9));
  }
}

TEST_CASE("icp stops after one solve when asked") {
  Rng rng(13);
  const Cloud model(random_points(rng, 3, 50));
  const Cloud test(random_points(rng, 3, 20));
  IcpParams params;
  params.max_iters = 1;
  const RegistrationResult r = icp_register(test, model, params);
  CHECK(r.iterations == 1);
  CHECK(r.error_trace.size() == 1);
  CHECK(r.stop_reason == StopReason::MaxIters);
}

TEST_CASE("icp parameter validation") {
  Rng rng(14);
  const Cloud c(random_points(rng, 3, 5));
  IcpParams p;
  p.max_iters = 0;
  CHECK_THROWS_AS(icp_register(c, c, p), ArgumentError);
  p = IcpParams{};
  p.abs_tolerance = -1;
  CHECK_THROWS_AS(icp_register(c, c, p), ArgumentError);
  CHECK_THROWS_AS(icp_register(c, Cloud(random_points(rng, 4, 5)), IcpParams{}), ArgumentError);
  CHECK_THROWS_AS(iclap_distance(c, c, IcpParams{}), ArgumentError);
  CHECK_THROWS_AS(Cloud{MatrixXd(3, 0)}, ArgumentError);
}

TEST_CASE("icp error traces never increase") {
  Rng rng(15);
  for (int t = 0; t < 40; ++t) {
    const int dim = 3 + t % 2;
    const Cloud model(random_points(rng, dim, 60));
    const Cloud test(random_points(rng, dim, 25));
    const RegistrationResult r = icp_register(test, model, IcpParams{});
    for (std::size_t i = 1; i < r.error_trace.size(); ++i) CHECK(r.error_trace[i] <= r.error_trace[i - 1]);
    CHECK(r.error == r.error_trace.back());
  }
}

TEST_CASE("iclap distance is rotation invariant") {
  Rng rng(16);
  for (int t = 0; t < 10; ++t) {
    const MatrixXd model = random_points(rng, 4, 60);
    const MatrixXd test = random_points(rng, 4, 20);
    const MatrixXd rot = random_rotation(4, rng);
    const double a = iclap_distance(Cloud(test), Cloud(model), IcpParams{});
    const double b = iclap_distance(Cloud(rot * test), Cloud(rot * model), IcpParams{});
    CHECK(std::abs(a - b) <= 1e-6);
  }
}

TEST_CASE("single point pair aligns exactly") {
  MatrixXd p(4, 1), q(4, 1);
  p << 1, 2, 3, 4;
  q << -5, 0.5, 9, 2;
  IcpParams params;
  params.init_mode = InitMode::Identity;
  params.max_iters = 1;
  CHECK(iclap_distance(Cloud(p), Cloud(q), params) == 0.0);
}

TEST_CASE("constant fourth coordinate reduces to three dimensions") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd m3 = random_points(rng, 3, 50), s3 = random_points(rng, 3, 15);
    MatrixXd m4(4, 50), s4(4, 15);
    m4 << m3, MatrixXd::Constant(1, 50, 3.0);
    s4 << s3, MatrixXd::Constant(1, 15, 3.0);
    for (InitMode mode : {InitMode::Centroid, InitMode::Identity}) {
      IcpParams params;
      params.init_mode = mode;
      const RegistrationResult a = icp_register(Cloud(s3), Cloud(m3), params);
      const RegistrationResult b = icp_register(Cloud(s4), Cloud(m4), params);
      CHECK(std::abs(a.error - b.error) <= 1e-9);
      CHECK(a.iterations == b.iterations);
    }
  }
}

TEST_CASE("transform helpers") {
  Rng rng(18);
  const RigidTransform a{random_rotation(4, rng), random_points(rng, 4, 1).col(0)};
  const RigidTransform b{random_rotation(4, rng), random_points(rng, 4, 1).col(0)};
  const MatrixXd p = random_points(rng, 4, 5);
  CHECK(max_abs(b.compose(a).apply(p) - b.apply(a.apply(p))) <= 1e-9);
  CHECK(RigidTransform::identity(3).apply(p.topRows(3)) == p.topRows(3));
  CHECK(to_string(StopReason::RelChange) == "rel_change");
}
