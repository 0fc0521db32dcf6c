#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "iclap/types.hpp"

namespace iclap {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Balanced k-d tree over a cloud, one point per node.
///
/// The split dimension cycles with depth (x, y, z, w); each node holds the
/// lower median of its range. Queries are exact, with equal distances resolved
/// toward the lowest point index.
class KdTree {
 public:
  explicit KdTree(const Cloud& cloud);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t depth() const noexcept { return depth_; }

  /// Throws ArgumentError if query.size() != dim().
  Neighbor nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const;

  const Eigen::MatrixXd& points() const noexcept { return points_; }

 private:
  struct Node {
    std::size_t point;
    int left;
    int right;
    int axis;
  };

  int build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth);
  void search(int node, const double* query, std::size_t& best, double& best_d2) const;

  int dim_;
  Eigen::MatrixXd points_;
  std::vector<Node> nodes_;
  int root_ = -1;
  std::size_t depth_ = 0;
};

/// Squared Euclidean distance summed over coordinates in index order.
double squared_distance(const double* a, const double* b, int dim);

}  // namespace iclap
