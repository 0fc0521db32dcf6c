#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iclap/descriptors.hpp"
#include "iclap/types.hpp"

namespace iclap {

/// Per-dimension standardization applied before distances are taken.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// k word centroids over descriptor space. Labels are 1-based.
class Codebook {
 public:
  /// Throws ArgumentError unless there are k >= 1 finite centroids of equal
  /// length and norm_stats (if any) matches that length.
  Codebook(std::vector<std::vector<double>> centroids, DescriptorKind kind,
           std::optional<NormStats> norm_stats = std::nullopt);

  int k() const noexcept { return static_cast<int>(centroids_.size()); }
  std::size_t dim() const noexcept { return centroids_.front().size(); }
  DescriptorKind descriptor_kind() const noexcept { return kind_; }
  const std::vector<std::vector<double>>& centroids() const noexcept { return centroids_; }
  const std::optional<NormStats>& norm_stats() const noexcept { return norm_stats_; }

  /// Maps a raw descriptor into the space the centroids live in.
  std::vector<double> project(std::span<const double> descriptor) const;

 private:
  std::vector<std::vector<double>> centroids_;
  DescriptorKind kind_;
  std::optional<NormStats> norm_stats_;
};

struct KMeansOptions {
  int k = 50;
  std::uint64_t seed = 0;
  int max_iters = 100;
  bool standardize = false;
  DescriptorKind kind = DescriptorKind::ZernikeMoments;
};

struct KMeansFit {
  Codebook codebook;
  /// Inertia after seeding, then after every Lloyd iteration.
  std::vector<double> inertia_trace;
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding.
///
/// Stops when no assignment changes or after max_iters. A cluster that empties
/// is reseeded at the point farthest from its nearest centroid. Throws
/// ArgumentError for k <= 0, empty input or ragged vectors, and
/// InfeasibleError when fewer than k distinct descriptors exist.
KMeansFit kmeans_fit(std::span<const std::vector<double>> descriptors, const KMeansOptions& options);

/// Index (1-based) of the nearest centroid; ties go to the lowest index.
int assign_label(const Codebook& codebook, std::span<const double> descriptor);

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Sum of squared distances from each descriptor to its nearest centroid.
double inertia(const Codebook& codebook, std::span<const std::vector<double>> descriptors);

struct BowHistogram {
  std::vector<double> bins;
};

/// bin j = count(label j + 1) / total. Throws ArgumentError on an empty list or
/// a label outside 1..k.
BowHistogram bow_histogram(std::span<const int> labels, int k);

/// One (x, y, z, w_scale * label) point per entry, in entry order.
Cloud build_labeled_cloud(std::span<const DescribedTouch> entries, const Codebook& codebook, double w_scale);

/// Header `codebook k=<k> dim=<dim> kind=<kind>`, one centroid per line, then
/// optional `mean ...` and `stddev ...` lines when standardization is on.
std::string serialize_codebook(const Codebook& codebook);
Codebook parse_codebook(std::string_view text);

}  // namespace iclap
