#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iclap/codebook.hpp"
#include "iclap/descriptors.hpp"
#include "iclap/kdtree.hpp"
#include "iclap/registration.hpp"
#include "iclap/touch_io.hpp"
#include "iclap/types.hpp"

namespace iclap {

enum class Method { Iclap, Icp3, Bow };

std::string_view to_string(Method method);
/// "iclap", "icp3" or "bow".
Method method_from_string(std::string_view name);

/// Reference model of one object: labeled 4D cloud, its spatial 3D part, the
/// word histogram, and search trees over both clouds.
class ObjectModel {
 public:
  /// Throws ArgumentError unless cloud4 is 4-dimensional and the histogram is
  /// a valid distribution. With w_scale > 0 the histogram must also match the
  /// labels round(w / w_scale).
  ObjectModel(std::string object_id, Cloud cloud4, BowHistogram histogram, double w_scale);

  const std::string& object_id() const noexcept { return object_id_; }
  const Cloud& cloud4() const noexcept { return cloud4_; }
  const Cloud& cloud3() const noexcept { return cloud3_; }
  const BowHistogram& histogram() const noexcept { return histogram_; }
  double w_scale() const noexcept { return w_scale_; }
  const KdTree& tree4() const noexcept { return tree4_; }
  const KdTree& tree3() const noexcept { return tree3_; }

 private:
  std::string object_id_;
  Cloud cloud4_;
  Cloud cloud3_;
  BowHistogram histogram_;
  double w_scale_;
  KdTree tree4_;
  KdTree tree3_;
};

/// Pools the describable samples of every exploration (all of one object).
/// Throws ArgumentError on mixed object ids and ModelError when no sample is
/// usable.
ObjectModel build_model(std::span<const Exploration> explorations, const Codebook& codebook,
                        const DescriptorConfig& cfg, double w_scale);

/// Text form: `model <object_id> points=<n> k=<k> w_scale=<w>`, one `x y z w` line per
/// point, then `histogram h_1 ... h_k`.
std::string serialize_model(const ObjectModel& model);
ObjectModel parse_model(std::string_view text);

struct RankedModel {
  std::size_t model_index = 0;
  std::string object_id;
  double raw_error = 0.0;
  double normalized_score = 0.0;
};

struct ClassificationReport {
  Method method = Method::Iclap;
  /// Ascending raw error; equal errors keep model order.
  std::vector<RankedModel> ranked;
  std::string winner;
  std::size_t skipped_samples = 0;
};

/// Ranks models by raw error and divides each by the root of the sum of
/// squared errors (0 when every error is 0).
ClassificationReport rank_models(std::span<const double> raw_errors, std::span<const ObjectModel> models,
                                 Method method);

/// Labeled 4D cloud of the describable test samples. Throws ArgumentError if
/// none is describable.
Cloud build_test_cloud(std::span<const TouchSample> samples, const Codebook& codebook,
                       const DescriptorConfig& cfg, double w_scale, std::size_t* skipped = nullptr);

ClassificationReport classify_iclap(std::span<const TouchSample> test_samples, std::span<const ObjectModel> models,
                                    const Codebook& codebook, const DescriptorConfig& cfg, double w_scale,
                                    const IcpParams& params);

/// Positions only; no codebook involved.
ClassificationReport classify_icp3(std::span<const TouchSample> test_samples, std::span<const ObjectModel> models,
                                   const IcpParams& params);

/// Euclidean distance between L1-normalized word histograms.
ClassificationReport classify_bow(std::span<const TouchSample> test_samples, std::span<const ObjectModel> models,
                                  const Codebook& codebook, const DescriptorConfig& cfg);

enum class SubsetMode { Random, Prefix };

struct EvalOptions {
  std::vector<Method> methods{Method::Iclap, Method::Icp3, Method::Bow};
  std::vector<int> touches{1, 2, 4, 8, 12};
  int trials = 5;
  std::uint64_t seed = 1;
  KMeansOptions codebook;
  DescriptorConfig descriptor;
  double w_scale = 1.0;
  IcpParams icp;
  SubsetMode subset = SubsetMode::Random;
  /// Test with each object's own pooled training samples instead of the
  /// held-out exploration.
  bool sanity = false;
};

struct EvalCurve {
  Method method = Method::Iclap;
  std::vector<int> touches;
  std::vector<double> rate;
  int trials_per_point = 0;
  std::uint64_t seed = 0;
  /// Draws per m that asked for more touches than the exploration had.
  std::vector<std::size_t> clipped;
};

/// confusion[true_object][predicted_object] counts, one matrix per m.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

struct SweepResult {
  std::vector<std::string> object_ids;
  std::vector<EvalCurve> curves;                      // one per method
  std::vector<std::vector<ConfusionMatrix>> confusion;  // [method][m]
};

/// Leave-one-exploration-out sweep over the number of touches.
///
/// Fold f holds out exploration f of every object (f modulo the object's
/// exploration count); the codebook and models are rebuilt from the remaining
/// explorations. For each m and trial, m touches are drawn from the held-out
/// exploration and classified by every requested method. Requires at least
/// two explorations per object.
SweepResult evaluate_touch_sweep(const Dataset& dataset, const EvalOptions& options);

/// Single-method convenience wrapper.
EvalCurve evaluate_touch_sweep(const Dataset& dataset, Method method, const EvalOptions& options);

/// One line per m: `method m rate trials`.
std::string serialize_curve(const EvalCurve& curve);
std::string serialize_confusion(const SweepResult& result);

/// Correct fraction over the trials at touches[m_index] whose true object is
/// in `objects`.
double subset_rate(const SweepResult& result, std::size_t method_index, std::size_t m_index,
                   std::span<const std::size_t> objects);

}  // namespace iclap
