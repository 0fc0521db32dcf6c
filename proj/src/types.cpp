#include "iclap/types.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "iclap/error.hpp"

namespace iclap {

TactileFrame::TactileFrame(int rows, int cols, std::vector<double> pressures)
    : rows_(rows), cols_(cols), pressures_(std::move(pressures)) {
  if (rows <= 0 || cols <= 0) throw ArgumentError("frame dimensions must be positive");
  if (pressures_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ArgumentError("frame expects " + std::to_string(rows * cols) + " pressures, got " +
                        std::to_string(pressures_.size()));
  }
  for (double v : pressures_) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError("pressure values must be finite and non-negative");
  }
}

TactileFrame TactileFrame::zeros(int rows, int cols) {
  return TactileFrame(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0));
}

double TactileFrame::total() const noexcept {
  return std::accumulate(pressures_.begin(), pressures_.end(), 0.0);
}

TouchSample::TouchSample(const Position& p, TactileFrame f) : position(p), frame(std::move(f)) {
  for (double c : position) {
    if (!std::isfinite(c)) throw ArgumentError("touch position must be finite");
  }
}

Exploration::Exploration(std::string object_id, std::vector<TouchSample> samples)
    : object_id_(std::move(object_id)), samples_(std::move(samples)) {
  if (samples_.empty()) throw ArgumentError("exploration needs at least one sample");
  const int rows = samples_.front().frame.rows();
  const int cols = samples_.front().frame.cols();
  for (const auto& s : samples_) {
    if (s.frame.rows() != rows || s.frame.cols() != cols) {
      throw ArgumentError("all frames of an exploration must share dimensions");
    }
  }
}

Cloud::Cloud(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() != 3 && points_.rows() != 4) throw ArgumentError("cloud dimension must be 3 or 4");
  if (points_.cols() == 0) throw ArgumentError("cloud must not be empty");
  if (!points_.allFinite()) throw ArgumentError("cloud coordinates must be finite");
}

Cloud Cloud::from_labeled(std::span<const LabeledPoint> points) {
  Eigen::MatrixXd m(4, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    m(0, c) = points[i].x;
    m(1, c) = points[i].y;
    m(2, c) = points[i].z;
    m(3, c) = points[i].w;
  }
  return Cloud(std::move(m));
}

Cloud Cloud::from_positions(std::span<const Position> positions) {
  Eigen::MatrixXd m(3, static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (int d = 0; d < 3; ++d) m(d, static_cast<Eigen::Index>(i)) = positions[i][static_cast<std::size_t>(d)];
  }
  return Cloud(std::move(m));
}

Cloud Cloud::spatial() const {
  if (dim() == 3) return *this;
  return Cloud(points_.topRows(3));
}

bool operator==(const Cloud& a, const Cloud& b) {
  return a.points_.rows() == b.points_.rows() && a.points_.cols() == b.points_.cols() && a.points_ == b.points_;
}

}  // namespace iclap
