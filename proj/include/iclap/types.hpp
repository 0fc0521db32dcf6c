#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iclap {

inline constexpr int kDefaultRows = 14;
inline constexpr int kDefaultCols = 6;

/// One pressure image from the sensor array, row-major, non-negative.
///
/// Image axes: x is the column index, y the row index, both 0-based.
class TactileFrame {
 public:
  /// Throws ArgumentError unless rows, cols > 0, the value count matches and
  /// every pressure is finite and >= 0.
  TactileFrame(int rows, int cols, std::vector<double> pressures);

  static TactileFrame zeros(int rows = kDefaultRows, int cols = kDefaultCols);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  double at(int row, int col) const { return pressures_[static_cast<std::size_t>(row) * cols_ + col]; }
  std::span<const double> pressures() const noexcept { return pressures_; }
  double total() const noexcept;

  friend bool operator==(const TactileFrame&, const TactileFrame&) = default;

 private:
  int rows_;
  int cols_;
  std::vector<double> pressures_;
};

using Position = std::array<double, 3>;

/// Contact location (mm) and the frame read there.
struct TouchSample {
  TouchSample(const Position& position, TactileFrame frame);

  Position position;
  TactileFrame frame;

  friend bool operator==(const TouchSample&, const TouchSample&) = default;
};

/// One recorded exploration of an object: an ordered, non-empty touch list.
class Exploration {
 public:
  /// Throws ArgumentError on an empty list or mismatched frame dimensions.
  Exploration(std::string object_id, std::vector<TouchSample> samples);

  const std::string& object_id() const noexcept { return object_id_; }
  const std::vector<TouchSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  int rows() const noexcept { return samples_.front().frame.rows(); }
  int cols() const noexcept { return samples_.front().frame.cols(); }

  friend bool operator==(const Exploration&, const Exploration&) = default;

 private:
  std::string object_id_;
  std::vector<TouchSample> samples_;
};

/// Contact position plus word-label coordinate.
struct LabeledPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 0.0;
};

/// A D-dimensional point set (D = 3 or 4). Points are the columns.
class Cloud {
 public:
  /// Throws ArgumentError when dim is not 3/4, the cloud is empty or an entry
  /// is non-finite.
  explicit Cloud(Eigen::MatrixXd points);

  static Cloud from_labeled(std::span<const LabeledPoint> points);
  static Cloud from_positions(std::span<const Position> positions);

  int dim() const noexcept { return static_cast<int>(points_.rows()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  auto point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }

  /// The 4D cloud with its label coordinate removed.
  Cloud spatial() const;

  friend bool operator==(const Cloud& a, const Cloud& b);

 private:
  Eigen::MatrixXd points_;
};

}  // namespace iclap
