#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"

#include "iclap/descriptors.hpp"
#include "iclap/error.hpp"
#include "iclap/rng.hpp"

using namespace iclap;

namespace {

TactileFrame single_cell(int rows, int cols, int r, int c, double v) {
  std::vector<double> p(static_cast<std::size_t>(rows * cols), 0.0);
  p[static_cast<std::size_t>(r * cols + c)] = v;
  return TactileFrame(rows, cols, std::move(p));
}

TactileFrame random_frame(Rng& rng, int rows = 14, int cols = 6, double zero_fraction = 0.3) {
  std::vector<double> p(static_cast<std::size_t>(rows * cols));
  for (double& v : p) v = rng.uniform() < zero_fraction ? 0.0 : rng.uniform(0.0, 3.0);
  p[0] += 0.1;  // never all-zero
  return TactileFrame(rows, cols, std::move(p));
}

// Sum of a few Gaussian blobs near (cx, cy).
TactileFrame smooth_pattern(Rng& rng, int rows, int cols, double cx, double cy, double spread, double scale = 1.0) {
  struct Blob {
    double x, y, s, a;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 3; ++i) {
    blobs.push_back({rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(1.5, 3.0),
                     rng.uniform(0.5, 2.0)});
  }
  return oracle::sample_frame(rows, cols, [&](double x, double y) {
    double v = 0.0;
    for (const auto& b : blobs) {
      const double dx = (x - cx) / scale - b.x, dy = (y - cy) / scale - b.y;
      v += b.a * std::exp(-(dx * dx + dy * dy) / (2 * b.s * b.s));
    }
    return v;
  });
}

double rel_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("raw moments of a single cell") {
  const Descriptor d = raw_moments(single_cell(14, 6, 2, 4, 3.0));
  CHECK(d.kind == DescriptorKind::RawMoments);
  CHECK(d.values == std::vector<double>{3, 12, 6, 48, 24, 12});
}

TEST_CASE("raw moments of a zero frame") {
  CHECK(raw_moments(TactileFrame::zeros()).values == std::vector<double>(6, 0.0));
}

TEST_CASE("raw moments match double sums") {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const TactileFrame f = random_frame(rng);
    const auto o = oracle::raw_moments(f);
    const auto d = raw_moments(f).values;
    for (int i = 0; i < 6; ++i) CHECK(std::abs(d[i] - o[i]) <= 1e-12 * std::abs(o[i]));
  }
}

TEST_CASE("raw moments are linear") {
  Rng rng(2);
  const TactileFrame a = random_frame(rng), b = random_frame(rng);
  std::vector<double> mix;
  for (std::size_t i = 0; i < a.pressures().size(); ++i) mix.push_back(2.0 * a.pressures()[i] + 0.5 * b.pressures()[i]);
  const auto ma = raw_moments(a).values, mb = raw_moments(b).values;
  const auto mm = raw_moments(TactileFrame(14, 6, mix)).values;
  for (int i = 0; i < 6; ++i) CHECK(mm[i] == doctest::Approx(2.0 * ma[i] + 0.5 * mb[i]).epsilon(1e-12));
}

TEST_CASE("hu moments of a single cell vanish") {
  for (int r : {0, 5, 13}) {
    for (int c : {0, 3, 5}) {
      for (double v : {0.5, 7.0}) {
        for (double h : hu_moments(single_cell(14, 6, r, c, v)).values) CHECK(h == 0.0);
      }
    }
  }
}

TEST_CASE("hu moments reject zero mass") {
  CHECK_THROWS_AS(hu_moments(TactileFrame::zeros()), DegenerateFrameError);
  CHECK_THROWS_AS(zernike_moments(TactileFrame::zeros(), 4), DegenerateFrameError);
}

TEST_CASE("hu moments are translation invariant") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    // pattern in the top-left 13x5 block, shifted by one row and one column
    std::vector<double> a(84, 0.0), b(84, 0.0);
    for (int r = 0; r < 13; ++r) {
      for (int c = 0; c < 5; ++c) {
        const double v = rng.uniform() < 0.4 ? 0.0 : rng.uniform(0.0, 2.0);
        a[static_cast<std::size_t>(r * 6 + c)] = v;
        b[static_cast<std::size_t>((r + 1) * 6 + c + 1)] = v;
      }
    }
    a[7] += 0.5;
    b[14] += 0.5;
    const auto ha = hu_moments(TactileFrame(14, 6, a)).values;
    const auto hb = hu_moments(TactileFrame(14, 6, b)).values;
    for (int i = 0; i < 7; ++i) CHECK(std::abs(ha[i] - hb[i]) <= 1e-9);
  }
}

TEST_CASE("hu moments match the textbook formulas") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const TactileFrame f = random_frame(rng);
    const auto o = oracle::hu(f);
    const auto d = hu_moments(f).values;
    for (int i = 0; i < 7; ++i) CHECK(std::abs(d[i] - o[i]) <= 1e-9 * (1.0 + std::abs(o[i])));
  }
}

TEST_CASE("normalized moments follow the intensity power law") {
  Rng rng(5);
  const TactileFrame f = random_frame(rng);
  const auto base = normalized_central_moments(f);
  const auto ref = oracle::eta(f);
  for (int i = 0; i < 7; ++i) CHECK(base[i] == doctest::Approx(ref[i]).epsilon(1e-9));
  for (double c : {0.25, 3.0, 40.0}) {
    std::vector<double> p(f.pressures().begin(), f.pressures().end());
    for (double& v : p) v *= c;
    const auto scaled = normalized_central_moments(TactileFrame(14, 6, p));
    const int order[7] = {2, 2, 2, 3, 3, 3, 3};
    for (int i = 0; i < 7; ++i) {
      const double expect = base[i] * std::pow(c, -order[i] / 2.0);
      CHECK(std::abs(scaled[i] - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST_CASE("hu moments survive geometric magnification") {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    Rng a = rng, b = rng;
    const auto small = hu_moments(smooth_pattern(a, 20, 20, 9.5, 9.5, 2.0)).values;
    const auto large = hu_moments(smooth_pattern(b, 40, 40, 19.5, 19.5, 2.0, 2.0)).values;
    rng.next_u64();
    CHECK(large[0] == doctest::Approx(small[0]).epsilon(0.02));
    CHECK(large[1] == doctest::Approx(small[1]).epsilon(0.02));
  }
}

TEST_CASE("zernike length and single-cell closed form") {
  CHECK(zernike_length(4) == 9);
  CHECK(zernike_length(0) == 1);
  CHECK(descriptor_length({DescriptorKind::HuMoments, 4, false}) == 7);
  // every cell sits at rho = 0 relative to itself, R_n0(0) = (-1)^(n/2)
  const auto z = zernike_moments(single_cell(14, 6, 4, 2, 2.0), 4).values;
  const double pi = std::numbers::pi;
  const std::vector<double> expect{2.0 / pi, 0.0, 3 * 2.0 / pi, 0.0, 0.0, 0.0, 5 * 2.0 / pi, 0.0, 0.0};
  REQUIRE(z.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(z[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("zernike constant frame angular terms follow grid symmetry") {
  // 2-fold symmetric rectangle: odd m cancel
  const auto rect = zernike_moments(TactileFrame(14, 6, std::vector<double>(84, 1.5)), 6).values;
  // 4-fold symmetric square: m = 2 mod 4 cancel as well
  const auto square = zernike_moments(TactileFrame(8, 8, std::vector<double>(64, 1.5)), 6).values;
  std::size_t i = 0;
  for (int n = 0; n <= 6; ++n) {
    for (int m = n % 2; m <= n; m += 2, ++i) {
      if (m % 2 == 1) CHECK(std::abs(rect[i]) <= 1e-9);
      if (m % 4 != 0) CHECK(std::abs(square[i]) <= 1e-9);
    }
  }
  CHECK(rect[0] > 0.0);
}

TEST_CASE("zernike magnitudes survive point reflection") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const TactileFrame f = random_frame(rng);
    std::vector<double> p(84);
    for (int r = 0; r < 14; ++r) {
      for (int c = 0; c < 6; ++c) p[static_cast<std::size_t>((13 - r) * 6 + (5 - c))] = f.at(r, c);
    }
    const auto a = zernike_moments(f, 4).values;
    const auto b = zernike_moments(TactileFrame(14, 6, p), 4).values;
    for (int i = 0; i < 9; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
  }
}

TEST_CASE("zernike magnitudes survive resampled rotation") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const TactileFrame f = smooth_pattern(rng, 24, 24, 11.5, 11.5, 3.0);
    const auto m = raw_moments(f).values;
    const TactileFrame g = oracle::rotate_bilinear(f, 30.0, m[1] / m[0], m[2] / m[0]);
    CHECK(rel_norm_diff(zernike_moments(f, 4).values, zernike_moments(g, 4).values) <= 0.02);
  }
}

TEST_CASE("describe_exploration skips degenerate frames") {
  Rng rng(9);
  std::vector<TouchSample> s;
  for (int i = 0; i < 5; ++i) {
    s.emplace_back(Position{double(i), 2.0 * i, 1.0}, i == 2 ? TactileFrame::zeros() : random_frame(rng));
  }
  const Exploration e("x", s);
  const auto hu = describe_exploration(e, {DescriptorKind::HuMoments, 4, false});
  CHECK(hu.entries.size() == 4);
  CHECK(hu.skipped == 1);
  CHECK(hu.entries[2].position == s[3].position);
  for (const auto& entry : hu.entries) CHECK(entry.descriptor.values.size() == 7);

  const auto raw = describe_exploration(e, {DescriptorKind::RawMoments, 4, false});
  REQUIRE(raw.entries.size() == 5);
  CHECK(raw.skipped == 0);
  for (int i = 0; i < 5; ++i) CHECK(raw.entries[static_cast<std::size_t>(i)].position == s[static_cast<std::size_t>(i)].position);

  const Exploration zeros("z", {TouchSample({0, 0, 0}, TactileFrame::zeros()), TouchSample({1, 0, 0}, TactileFrame::zeros())});
  CHECK(describe_exploration(zeros, {DescriptorKind::RawMoments, 4, false}).entries.size() == 2);
  CHECK(describe_exploration(zeros, {DescriptorKind::ZernikeMoments, 4, false}).skipped == 2);
}

TEST_CASE("descriptor kind names") {
  for (auto k : {DescriptorKind::RawMoments, DescriptorKind::HuMoments, DescriptorKind::ZernikeMoments}) {
    CHECK(descriptor_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(descriptor_kind_from_string("sift"), ArgumentError);
}

TEST_CASE("normalize_pressure makes descriptors mass independent") {
  Rng rng(10);
  const TactileFrame f = random_frame(rng);
  std::vector<double> p(f.pressures().begin(), f.pressures().end());
  for (double& v : p) v *= 5.0;
  const DescriptorConfig cfg{DescriptorKind::ZernikeMoments, 4, true};
  const auto a = describe(f, cfg).values, b = describe(TactileFrame(14, 6, p), cfg).values;
  for (int i = 0; i < 9; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}
