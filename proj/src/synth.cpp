#include "iclap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "iclap/error.hpp"

namespace iclap::synth {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(what + " must be positive");
}

}  // namespace

void SynthObjectSpec::validate() const {
  std::visit(Overloaded{[](const Rect& r) {
                          require_positive(r.width, "footprint width");
                          require_positive(r.height, "footprint height");
                        },
                        [](const Disk& d) { require_positive(d.radius, "footprint radius"); }},
             footprint);
  std::visit(Overloaded{[](const Flat&) {}, [](const Hemisphere& h) { require_positive(h.radius, "hemisphere radius"); },
                        [](const Ridge& r) {
                          require_positive(r.width, "ridge width");
                          if (r.axis != 0 && r.axis != 1) throw ArgumentError("ridge axis must be 0 (x) or 1 (y)");
                        }},
             height_field);
  std::visit(Overloaded{[](const Dots& d) {
                          require_positive(d.pitch, "dot pitch");
                          require_positive(d.sigma, "dot sigma");
                        },
                        [](const Bars& b) { require_positive(b.pitch, "bar pitch"); },
                        [](const Ring& r) { require_positive(r.radius, "ring radius"); }, [](const Blank&) {}},
             texture);
  require_positive(pressure_gain, "pressure gain");
}

bool inside_footprint(const Footprint& footprint, double x, double y) {
  return std::visit(Overloaded{[&](const Rect& r) { return std::abs(x) <= r.width / 2 && std::abs(y) <= r.height / 2; },
                               [&](const Disk& d) { return x * x + y * y <= d.radius * d.radius; }},
                    footprint);
}

double surface_height(const SynthObjectSpec& spec, double x, double y) {
  return std::visit(Overloaded{[](const Flat&) { return 0.0; },
                               [&](const Hemisphere& h) { return std::sqrt(std::max(0.0, h.radius * h.radius - x * x - y * y)); },
                               [&](const Ridge& r) {
                                 const double u = (r.axis == 0 ? y : x) / r.width;
                                 return 0.5 * r.width * std::max(0.0, 1.0 - u * u);
                               }},
                    spec.height_field);
}

double texture_intensity(const Texture& texture, double x, double y) {
  return std::visit(
      Overloaded{[&](const Dots& d) {
                   const double cx = d.pitch * std::round(x / d.pitch);
                   const double cy = d.pitch * std::round(y / d.pitch);
                   double sum = 0.0;
                   for (int i = -1; i <= 1; ++i) {
                     for (int j = -1; j <= 1; ++j) {
                       const double dx = x - (cx + i * d.pitch);
                       const double dy = y - (cy + j * d.pitch);
                       sum += std::exp(-(dx * dx + dy * dy) / (2 * d.sigma * d.sigma));
                     }
                   }
                   return std::min(1.0, sum);
                 },
                 [&](const Bars& b) {
                   const double a = b.orientation_deg * std::numbers::pi / 180.0;
                   const double u = x * std::cos(a) + y * std::sin(a);
                   return 0.5 * (1.0 + std::cos(2 * std::numbers::pi * u / b.pitch));
                 },
                 [&](const Ring& r) {
                   const double d = std::hypot(x, y) - r.radius;
                   return std::exp(-d * d / 2.0);
                 },
                 [](const Blank&) { return 0.0; }},
      texture);
}

TouchSample render_touch(const SynthObjectSpec& spec, const std::array<double, 2>& contact_xy,
                         const ExplorationSpec& espec, Rng& rng) {
  const double cx = contact_xy[0];
  const double cy = contact_xy[1];
  if (!inside_footprint(spec.footprint, cx, cy)) throw ArgumentError("contact lies outside the object footprint");
  if (espec.rows <= 0 || espec.cols <= 0) throw ArgumentError("sensor dimensions must be positive");
  if (espec.position_noise < 0.0 || espec.pressure_noise < 0.0) throw ArgumentError("noise must be non-negative");

  Position pos{cx, cy, surface_height(spec, cx, cy)};
  for (double& c : pos) c += espec.position_noise * rng.normal();

  std::vector<double> cells(static_cast<std::size_t>(espec.rows) * static_cast<std::size_t>(espec.cols));
  for (int r = 0; r < espec.rows; ++r) {
    const double y = cy + (r - (espec.rows - 1) / 2.0) * espec.cell_pitch;
    for (int c = 0; c < espec.cols; ++c) {
      const double x = cx + (c - (espec.cols - 1) / 2.0) * espec.cell_pitch;
      const double v = spec.pressure_gain * texture_intensity(spec.texture, x, y) + espec.pressure_noise * rng.normal();
      cells[static_cast<std::size_t>(r) * espec.cols + c] = std::max(0.0, v);
    }
  }
  return TouchSample(pos, TactileFrame(espec.rows, espec.cols, std::move(cells)));
}

Exploration generate_exploration(const SynthObjectSpec& spec, const ExplorationSpec& espec) {
  spec.validate();
  if (espec.n_touches <= 0) throw ArgumentError("n_touches must be positive");
  Rng rng(espec.seed);
  std::vector<TouchSample> samples;
  samples.reserve(static_cast<std::size_t>(espec.n_touches));
  for (int i = 0; i < espec.n_touches; ++i) {
    std::array<double, 2> xy{};
    std::visit(Overloaded{[&](const Rect& r) {
                            xy = {rng.uniform(-r.width / 2, r.width / 2), rng.uniform(-r.height / 2, r.height / 2)};
                          },
                          [&](const Disk& d) {
                            do {
                              xy = {rng.uniform(-d.radius, d.radius), rng.uniform(-d.radius, d.radius)};
                            } while (xy[0] * xy[0] + xy[1] * xy[1] > d.radius * d.radius);
                          }},
               spec.footprint);
    samples.push_back(render_touch(spec, xy, espec, rng));
  }
  return Exploration(spec.object_id, std::move(samples));
}

Catalog standard_catalog(bool twenty_objects) {
  Catalog cat;
  auto add = [&](std::string id, std::string name, Footprint fp, HeightField hf, Texture tx, double gain) {
    cat.objects.push_back({std::move(id), std::move(name), fp, hf, tx, gain});
    return cat.objects.size() - 1;
  };

  // Geometry twins: one plate, two surface patterns.
  const auto plate_dots = add("plate_dots", "plate with dot array", Rect{80, 50}, Flat{}, Dots{8, 1.5}, 1.0);
  const auto plate_bars = add("plate_bars", "plate with stripes", Rect{80, 50}, Flat{}, Bars{0, 10}, 1.0);
  cat.geometry_twins.push_back({plate_dots, plate_bars});

  // Texture twins: same stripes on differently sized and shaped bodies.
  const auto wrench_small = add("wrench_small", "fixed wrench 1", Rect{90, 30}, Ridge{0, 15}, Bars{90, 6}, 1.0);
  const auto wrench_large = add("wrench_large", "fixed wrench 2", Rect{170, 50}, Ridge{0, 25}, Bars{90, 6}, 1.0);
  cat.texture_twins.push_back({wrench_small, wrench_large});

  add("dome_ring", "ring on a hemisphere", Disk{40}, Hemisphere{40}, Ring{22}, 1.0);
  add("dome_dots", "dots on a hemisphere", Disk{40}, Hemisphere{40}, Dots{5, 1.0}, 1.0);
  add("ridge_dots", "ridge with coarse dots", Rect{120, 60}, Ridge{0, 30}, Dots{12, 2.5}, 1.0);
  add("ridge_bars", "ridge with diagonal stripes", Rect{120, 60}, Ridge{1, 40}, Bars{45, 14}, 1.0);
  add("disk_fine", "disk with fine stripes", Disk{30}, Flat{}, Bars{0, 4}, 1.0);
  add("dome_large_dots", "large dome with dot array", Disk{60}, Hemisphere{60}, Dots{8, 1.5}, 1.0);

  if (twenty_objects) {
    const auto pl1 = add("plier_1", "plier 1", Rect{150, 45}, Ridge{0, 20}, Dots{6, 1.2}, 0.8);
    const auto pl2 = add("plier_2", "plier 2", Rect{150, 45}, Ridge{0, 20}, Bars{30, 8}, 0.8);
    cat.geometry_twins.push_back({pl1, pl2});
    const auto cub1 = add("cuboid_1", "wooden cuboid 1", Rect{60, 60}, Flat{}, Bars{60, 12}, 1.2);
    const auto cub2 = add("cuboid_2", "wooden cuboid 2", Rect{110, 40}, Flat{}, Bars{60, 12}, 1.2);
    cat.texture_twins.push_back({cub1, cub2});
    add("bowl", "upturned bowl", Disk{60}, Hemisphere{60}, Bars{0, 20}, 0.7);
    add("ball_ring", "ball with seam", Disk{25}, Hemisphere{25}, Ring{12}, 1.3);
    add("key", "allen key", Rect{90, 12}, Ridge{0, 6}, Dots{10, 2.0}, 1.1);
    add("plug", "plug", Rect{45, 30}, Flat{}, Dots{15, 3.0}, 1.5);
    add("scissors", "scissors", Rect{140, 50}, Ridge{1, 25}, Ring{20}, 0.9);
    add("board", "textured board", Rect{200, 90}, Flat{}, Dots{4, 0.8}, 0.6);
  }
  return cat;
}

Dataset standard_benchmark(std::uint64_t seed, const BenchmarkOptions& options) {
  if (options.explorations <= 0 || options.touches <= 0) throw ArgumentError("benchmark sizes must be positive");
  const Catalog cat = standard_catalog(options.twenty_objects);
  Dataset dataset;
  for (std::size_t o = 0; o < cat.objects.size(); ++o) {
    const auto& spec = cat.objects[o];
    DatasetObject obj{spec.object_id, spec.display_name, {}, {}};
    for (int e = 0; e < options.explorations; ++e) {
      ExplorationSpec espec;
      espec.n_touches = options.touches;
      espec.position_noise = options.position_noise;
      espec.pressure_noise = options.pressure_noise;
      espec.seed = Rng{seed, o, static_cast<std::uint64_t>(e)}.next_u64();
      obj.exploration_ids.push_back("e" + std::to_string(e + 1));
      obj.explorations.push_back(generate_exploration(spec, espec));
    }
    dataset.objects.push_back(std::move(obj));
  }
  return dataset;
}

}  // namespace iclap::synth
