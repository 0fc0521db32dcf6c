#include "iclap/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "iclap/error.hpp"

namespace iclap {

double squared_distance(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

KdTree::KdTree(const Cloud& cloud) : dim_(cloud.dim()), points_(cloud.points()) {
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(order.size());
  root_ = build(order, 0, order.size(), 0);
}

int KdTree::build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  depth_ = std::max(depth_, static_cast<std::size_t>(depth) + 1);
  const int axis = depth % dim_;
  const std::size_t mid = lo + (hi - lo - 1) / 2;  // lower median
  const auto less = [&](std::size_t a, std::size_t b) {
    const double ca = points_(axis, static_cast<Eigen::Index>(a));
    const double cb = points_(axis, static_cast<Eigen::Index>(b));
    return ca < cb || (ca == cb && a < b);
  };
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(hi), less);

  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({order[mid], -1, -1, axis});
  const int left = build(order, lo, mid, depth + 1);
  const int right = build(order, mid + 1, hi, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::search(int node_id, const double* query, std::size_t& best, double& best_d2) const {
  if (node_id < 0) return;
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  const double* p = points_.data() + static_cast<std::ptrdiff_t>(node.point) * dim_;

  const double d2 = squared_distance(query, p, dim_);
  if (d2 < best_d2 || (d2 == best_d2 && node.point < best)) {
    best_d2 = d2;
    best = node.point;
  }

  // Left subtree holds coordinates <= split, right subtree >= split.
  const double diff = query[node.axis] - p[node.axis];
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, query, best, best_d2);
  if (diff * diff <= best_d2) search(far, query, best, best_d2);
}

Neighbor KdTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const {
  if (query.size() != dim_) {
    throw ArgumentError("query has " + std::to_string(query.size()) + " coordinates, tree has " + std::to_string(dim_));
  }
  const Eigen::VectorXd q = query;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, q.data(), best, best_d2);
  return {best, std::sqrt(best_d2)};
}

}  // namespace iclap
