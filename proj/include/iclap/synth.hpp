#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "iclap/rng.hpp"
#include "iclap/touch_io.hpp"
#include "iclap/types.hpp"

namespace iclap::synth {

// Footprints are centred on the origin of the object's x-y plane (mm).
struct Rect {
  double width;
  double height;
};
struct Disk {
  double radius;
};
using Footprint = std::variant<Rect, Disk>;

struct Flat {};
/// Spherical cap of radius r centred on the origin.
struct Hemisphere {
  double radius;
};
/// Parabolic ridge along the x (axis 0) or y (axis 1) axis, peak height
/// width / 2, zero beyond `width` from the crest.
struct Ridge {
  int axis;
  double width;
};
using HeightField = std::variant<Flat, Hemisphere, Ridge>;

/// Gaussian bumps on a square lattice.
struct Dots {
  double pitch;
  double sigma;
};
/// Raised-cosine stripes; orientation is the stripe normal in degrees.
struct Bars {
  double orientation_deg;
  double pitch;
};
/// One circular ridge of the given radius around the origin, 2 mm wide.
struct Ring {
  double radius;
};
struct Blank {};
using Texture = std::variant<Dots, Bars, Ring, Blank>;

struct SynthObjectSpec {
  std::string object_id;
  std::string display_name;
  Footprint footprint;
  HeightField height_field;
  Texture texture;
  double pressure_gain = 1.0;

  /// Throws ArgumentError on non-positive dimensions, pitch or gain.
  void validate() const;
};

struct ExplorationSpec {
  int n_touches = 60;
  double position_noise = 0.5;
  double pressure_noise = 0.02;
  std::uint64_t seed = 0;
  int rows = kDefaultRows;
  int cols = kDefaultCols;
  double cell_pitch = 3.4;
};

bool inside_footprint(const Footprint& footprint, double x, double y);
double surface_height(const SynthObjectSpec& spec, double x, double y);
/// Texture intensity in [0, 1] at object-plane coordinates.
double texture_intensity(const Texture& texture, double x, double y);

/// Samples the texture on the sensor grid centred at `contact_xy` (row-major,
/// cell centres one pitch apart), scales by the gain, adds pressure noise and
/// clamps at 0. The position is (x, y, height) plus position noise. Throws
/// ArgumentError when the contact lies outside the footprint.
TouchSample render_touch(const SynthObjectSpec& spec, const std::array<double, 2>& contact_xy,
                         const ExplorationSpec& espec, Rng& rng);

/// n_touches contacts drawn uniformly over the footprint, in draw order.
Exploration generate_exploration(const SynthObjectSpec& spec, const ExplorationSpec& espec);

struct Catalog {
  std::vector<SynthObjectSpec> objects;
  /// Same footprint and height field, different texture.
  std::vector<std::pair<std::size_t, std::size_t>> geometry_twins;
  /// Same texture, different size or layout.
  std::vector<std::pair<std::size_t, std::size_t>> texture_twins;
};

/// The 10-object benchmark catalog, or the 20-object variant.
Catalog standard_catalog(bool twenty_objects = false);

struct BenchmarkOptions {
  bool twenty_objects = false;
  int explorations = 5;
  int touches = 60;
  double position_noise = 0.5;
  double pressure_noise = 0.02;
};

/// Every object explored `explorations` times; seeds derive from
/// (seed, object index, exploration index).
Dataset standard_benchmark(std::uint64_t seed, const BenchmarkOptions& options = {});

}  // namespace iclap::synth
