#include "iclap/descriptors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "iclap/error.hpp"

namespace iclap {

std::string_view to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::RawMoments: return "raw";
    case DescriptorKind::HuMoments: return "hu";
    case DescriptorKind::ZernikeMoments: return "zernike";
  }
  return "unknown";
}

DescriptorKind descriptor_kind_from_string(std::string_view name) {
  if (name == "raw") return DescriptorKind::RawMoments;
  if (name == "hu") return DescriptorKind::HuMoments;
  if (name == "zernike") return DescriptorKind::ZernikeMoments;
  throw ArgumentError("unknown descriptor kind '" + std::string(name) + "'");
}

std::size_t zernike_length(int max_order) {
  if (max_order < 0) throw ArgumentError("zernike order must be >= 0");
  std::size_t n = 0;
  for (int order = 0; order <= max_order; ++order) n += static_cast<std::size_t>(order / 2 + 1);
  return n;
}

std::size_t descriptor_length(const DescriptorConfig& cfg) {
  switch (cfg.kind) {
    case DescriptorKind::RawMoments: return 6;
    case DescriptorKind::HuMoments: return 7;
    case DescriptorKind::ZernikeMoments: return zernike_length(cfg.zernike_max_order);
  }
  return 0;
}

Descriptor raw_moments(const TactileFrame& frame) {
  double m00 = 0, m10 = 0, m01 = 0, m20 = 0, m11 = 0, m02 = 0;
  for (int r = 0; r < frame.rows(); ++r) {
    const double y = r;
    for (int c = 0; c < frame.cols(); ++c) {
      const double x = c;
      const double v = frame.at(r, c);
      m00 += v;
      m10 += v * x;
      m01 += v * y;
      m20 += v * x * x;
      m11 += v * x * y;
      m02 += v * y * y;
    }
  }
  return {DescriptorKind::RawMoments, {m00, m10, m01, m20, m11, m02}};
}

namespace {

struct Centroid {
  double mass;
  double x;
  double y;
};

Centroid intensity_centroid(const TactileFrame& frame) {
  double m00 = 0, m10 = 0, m01 = 0;
  for (int r = 0; r < frame.rows(); ++r) {
    for (int c = 0; c < frame.cols(); ++c) {
      const double v = frame.at(r, c);
      m00 += v;
      m10 += v * c;
      m01 += v * r;
    }
  }
  if (!(m00 > 0.0)) throw DegenerateFrameError("frame has zero total pressure");
  return {m00, m10 / m00, m01 / m00};
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double zernike_radial(int n, int m, double rho) {
  double sum = 0.0;
  for (int s = 0; s <= (n - m) / 2; ++s) {
    const double coef = ((s % 2) ? -1.0 : 1.0) * factorial(n - s) /
                        (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
    sum += coef * std::pow(rho, n - 2 * s);
  }
  return sum;
}

}  // namespace

std::array<double, 7> normalized_central_moments(const TactileFrame& frame) {
  const Centroid cen = intensity_centroid(frame);
  double mu20 = 0, mu11 = 0, mu02 = 0, mu30 = 0, mu21 = 0, mu12 = 0, mu03 = 0;
  for (int r = 0; r < frame.rows(); ++r) {
    const double dy = r - cen.y;
    for (int c = 0; c < frame.cols(); ++c) {
      const double v = frame.at(r, c);
      if (v == 0.0) continue;
      const double dx = c - cen.x;
      mu20 += v * dx * dx;
      mu11 += v * dx * dy;
      mu02 += v * dy * dy;
      mu30 += v * dx * dx * dx;
      mu21 += v * dx * dx * dy;
      mu12 += v * dx * dy * dy;
      mu03 += v * dy * dy * dy;
    }
  }
  const double n2 = std::pow(cen.mass, 2.0);  // mu00^(1 + 2/2)
  const double n3 = std::pow(cen.mass, 2.5);  // mu00^(1 + 3/2)
  return {mu20 / n2, mu11 / n2, mu02 / n2, mu30 / n3, mu21 / n3, mu12 / n3, mu03 / n3};
}

Descriptor hu_moments(const TactileFrame& frame) {
  const auto [n20, n11, n02, n30, n21, n12, n03] = normalized_central_moments(frame);
  const double a = n30 + n12;
  const double b = n21 + n03;
  const double c = n30 - 3 * n12;
  const double d = 3 * n21 - n03;
  return {DescriptorKind::HuMoments,
          {
              n20 + n02,
              (n20 - n02) * (n20 - n02) + 4 * n11 * n11,
              c * c + d * d,
              a * a + b * b,
              c * a * (a * a - 3 * b * b) + d * b * (3 * a * a - b * b),
              (n20 - n02) * (a * a - b * b) + 4 * n11 * a * b,
              d * a * (a * a - 3 * b * b) - c * b * (3 * a * a - b * b),
          }};
}

Descriptor zernike_moments(const TactileFrame& frame, int max_order) {
  if (max_order < 0) throw ArgumentError("zernike order must be >= 0");
  const Centroid cen = intensity_centroid(frame);

  double radius = 0.0;
  for (int r = 0; r < frame.rows(); ++r) {
    for (int c = 0; c < frame.cols(); ++c) radius = std::max(radius, std::hypot(c - cen.x, r - cen.y));
  }
  if (radius == 0.0) radius = 1.0;  // 1x1 grid

  Descriptor out{DescriptorKind::ZernikeMoments, {}};
  out.values.reserve(zernike_length(max_order));
  for (int n = 0; n <= max_order; ++n) {
    for (int m = n % 2; m <= n; m += 2) {
      std::complex<double> acc{0.0, 0.0};
      for (int r = 0; r < frame.rows(); ++r) {
        for (int c = 0; c < frame.cols(); ++c) {
          const double v = frame.at(r, c);
          if (v == 0.0) continue;
          const double dx = (c - cen.x) / radius;
          const double dy = (r - cen.y) / radius;
          const double rho = std::hypot(dx, dy);
          if (rho > 1.0) continue;
          const double theta = std::atan2(dy, dx);
          acc += v * zernike_radial(n, m, rho) * std::polar(1.0, -m * theta);
        }
      }
      out.values.push_back(std::abs(acc) * (n + 1) / std::numbers::pi);
    }
  }
  return out;
}

namespace {

TactileFrame unit_mass(const TactileFrame& frame) {
  const double total = frame.total();
  if (!(total > 0.0)) return frame;
  std::vector<double> v(frame.pressures().begin(), frame.pressures().end());
  for (double& x : v) x /= total;
  return TactileFrame(frame.rows(), frame.cols(), std::move(v));
}

}  // namespace

Descriptor describe(const TactileFrame& frame, const DescriptorConfig& cfg) {
  if (cfg.normalize_pressure) {
    DescriptorConfig plain = cfg;
    plain.normalize_pressure = false;
    return describe(unit_mass(frame), plain);
  }
  switch (cfg.kind) {
    case DescriptorKind::RawMoments: return raw_moments(frame);
    case DescriptorKind::HuMoments: return hu_moments(frame);
    case DescriptorKind::ZernikeMoments: return zernike_moments(frame, cfg.zernike_max_order);
  }
  throw ArgumentError("unknown descriptor kind");
}

bool is_describable(const TactileFrame& frame, const DescriptorConfig& cfg) {
  return cfg.kind == DescriptorKind::RawMoments || frame.total() > 0.0;
}

DescribedExploration describe_samples(std::span<const TouchSample> samples, const DescriptorConfig& cfg) {
  DescribedExploration out;
  for (const auto& s : samples) {
    if (!is_describable(s.frame, cfg)) {
      ++out.skipped;
      continue;
    }
    out.entries.push_back({describe(s.frame, cfg), s.position});
  }
  return out;
}

DescribedExploration describe_exploration(const Exploration& exploration, const DescriptorConfig& cfg) {
  return describe_samples(exploration.samples(), cfg);
}

}  // namespace iclap
