#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iclap/types.hpp"

namespace iclap {

enum class DescriptorKind { RawMoments, HuMoments, ZernikeMoments };

std::string_view to_string(DescriptorKind kind);
/// Accepts "raw", "hu", "zernike". Throws ArgumentError otherwise.
DescriptorKind descriptor_kind_from_string(std::string_view name);

struct DescriptorConfig {
  DescriptorKind kind = DescriptorKind::ZernikeMoments;
  int zernike_max_order = 4;
  /// Scale each frame to unit total pressure before extraction.
  bool normalize_pressure = false;
};

struct Descriptor {
  DescriptorKind kind;
  std::vector<double> values;
};

/// Number of (n, m) pairs with 0 <= m <= n <= max_order and n - m even.
std::size_t zernike_length(int max_order);
std::size_t descriptor_length(const DescriptorConfig& cfg);

/// (m00, m10, m01, m20, m11, m02) with m_pq = sum v(x, y) x^p y^q.
Descriptor raw_moments(const TactileFrame& frame);

/// Scale-normalized central moments eta_pq for 2 <= p + q <= 3, in the order
/// (20, 11, 02, 30, 21, 12, 03). Throws DegenerateFrameError on an empty frame.
std::array<double, 7> normalized_central_moments(const TactileFrame& frame);

/// The seven Hu invariants of the normalized central moments.
Descriptor hu_moments(const TactileFrame& frame);

/// Zernike magnitudes |A_nm|, n ascending then m ascending.
///
/// The unit disk is centred on the intensity centroid with radius equal to the
/// largest centroid-to-cell-centre distance over the whole grid.
Descriptor zernike_moments(const TactileFrame& frame, int max_order);

/// Dispatches on cfg.kind.
Descriptor describe(const TactileFrame& frame, const DescriptorConfig& cfg);

/// True when `describe` is defined for this frame (non-zero mass for Hu and
/// Zernike; always for raw moments).
bool is_describable(const TactileFrame& frame, const DescriptorConfig& cfg);

struct DescribedTouch {
  Descriptor descriptor;
  Position position;
};

struct DescribedExploration {
  std::vector<DescribedTouch> entries;
  std::size_t skipped = 0;
};

/// One entry per describable sample, in sample order; degenerate frames are
/// skipped and counted.
DescribedExploration describe_exploration(const Exploration& exploration, const DescriptorConfig& cfg);

/// Same as describe_exploration over an arbitrary sample list.
DescribedExploration describe_samples(std::span<const TouchSample> samples, const DescriptorConfig& cfg);

}  // namespace iclap
