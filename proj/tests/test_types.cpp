#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "doctest.h"

#include "iclap/error.hpp"
#include "iclap/numfmt.hpp"
#include "iclap/rng.hpp"
#include "iclap/touch_io.hpp"
#include "iclap/types.hpp"

using namespace iclap;
namespace fs = std::filesystem;

namespace {

std::string zeros_line(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += " 0";
  return s;
}

Exploration random_exploration(std::uint64_t seed, int rows, int cols, int n) {
  Rng rng(seed);
  std::vector<TouchSample> samples;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(static_cast<std::size_t>(rows * cols));
    for (double& v : p) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 5.0);
    samples.emplace_back(Position{rng.normal(0, 50), rng.normal(0, 50), rng.uniform(-1e-3, 1e3)},
                         TactileFrame(rows, cols, std::move(p)));
  }
  return Exploration("obj", std::move(samples));
}

}  // namespace

TEST_CASE("frame construction checks") {
  CHECK_NOTHROW(TactileFrame(2, 3, std::vector<double>(6, 1.0)));
  CHECK_THROWS_AS(TactileFrame(2, 3, std::vector<double>(5, 1.0)), ArgumentError);
  CHECK_THROWS_AS(TactileFrame(0, 3, {}), ArgumentError);
  CHECK_THROWS_AS(TactileFrame(1, 2, {1.0, -0.5}), ArgumentError);
  CHECK_THROWS_AS(TactileFrame(1, 2, {1.0, std::nan("")}), ArgumentError);
  CHECK_THROWS_AS(TactileFrame(1, 2, {1.0, std::numeric_limits<double>::infinity()}), ArgumentError);

  const TactileFrame z = TactileFrame::zeros();
  CHECK(z.rows() == 14);
  CHECK(z.cols() == 6);
  CHECK(z.total() == 0.0);

  const TactileFrame f(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(f.at(1, 0) == 4);
  CHECK(f.at(0, 2) == 3);
  CHECK(f.total() == 21);
}

TEST_CASE("sample and exploration invariants") {
  CHECK_THROWS_AS(TouchSample(Position{0, std::nan(""), 0}, TactileFrame::zeros()), ArgumentError);
  CHECK_THROWS_AS(Exploration("a", {}), ArgumentError);
  std::vector<TouchSample> mixed{TouchSample({0, 0, 0}, TactileFrame::zeros(14, 6)),
                                 TouchSample({0, 0, 0}, TactileFrame::zeros(6, 14))};
  CHECK_THROWS_AS(Exploration("a", mixed), ArgumentError);
}

TEST_CASE("cloud invariants") {
  CHECK_THROWS_AS(Cloud{Eigen::MatrixXd(2, 3)}, ArgumentError);
  CHECK_THROWS_AS(Cloud{Eigen::MatrixXd(3, 0)}, ArgumentError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 2);
  bad(3, 1) = std::nan("");
  CHECK_THROWS_AS(Cloud{bad}, ArgumentError);

  const std::vector<LabeledPoint> pts{{1, 2, 3, 4}, {5, 6, 7, 8}};
  const Cloud c = Cloud::from_labeled(pts);
  CHECK(c.dim() == 4);
  CHECK(c.size() == 2);
  CHECK(c.point(1)(3) == 8);
  const Cloud s = c.spatial();
  CHECK(s.dim() == 3);
  CHECK(s.point(1)(2) == 7);
  CHECK(s == Cloud::from_positions(std::vector<Position>{{1, 2, 3}, {5, 6, 7}}));
  CHECK_FALSE(s == c);
}

TEST_CASE("number formatting round-trips") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
    double back = 0;
    REQUIRE(parse_double(format_double(v), back));
    CHECK(back == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(3.0) == "3");
  CHECK(format_double(-0.0) == "0");
  double x;
  CHECK_FALSE(parse_double("1.5x", x));
  CHECK_FALSE(parse_double("", x));
  CHECK(parse_double("+2.5", x));
  CHECK(x == 2.5);
  long long n;
  CHECK(parse_int("42", n));
  CHECK_FALSE(parse_int("4.2", n));
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(9), b(9), c({9, 1});
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.below(7) < 7);
  }
  Rng d(5);
  const auto idx = sample_without_replacement(10, 10, d);
  std::vector<bool> seen(10, false);
  for (auto i : idx) seen[i] = true;
  for (bool s : seen) CHECK(s);
}

TEST_CASE("single zero sample parses") {
  const Exploration e = parse_exploration("0 0 0" + zeros_line(84) + "\n");
  REQUIRE(e.size() == 1);
  CHECK(e.rows() == 14);
  CHECK(e.cols() == 6);
  CHECK(e.samples()[0].frame.total() == 0.0);
  CHECK(e.samples()[0].position == Position{0, 0, 0});
}

TEST_CASE("parse errors name the line") {
  const std::string good = "1 2 3" + zeros_line(84) + "\n";
  try {
    parse_exploration("# header\n" + good + "1 2 3" + zeros_line(83) + "\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_exploration(good + "\n1 2 x" + zeros_line(84) + "\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_exploration(good + "1 2 3 -1" + zeros_line(83) + "\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_exploration("# nothing\n\n"), ParseError);
  CHECK_THROWS_AS(parse_exploration(good + "dims 14 6\n"), ParseError);
  CHECK_THROWS_AS(parse_exploration("dims 0 6\n"), ParseError);
}

TEST_CASE("dims header and comments") {
  const Exploration e = parse_exploration("# c\ndims 2 2\n\n 1 2 3 0.5 0 0 1.25\n# end\n");
  CHECK(e.rows() == 2);
  CHECK(e.cols() == 2);
  CHECK(e.samples()[0].frame.at(1, 1) == 1.25);
  CHECK(serialize_exploration(e) == "dims 2 2\n1 2 3 0.5 0 0 1.25\n");
}

TEST_CASE("canonical form is a fixed point") {
  const std::string text = "dims 1 2\n  +1.50   2e0 3.000\t0.10 7\n";
  const std::string canon = serialize_exploration(parse_exploration(text));
  CHECK(canon == "dims 1 2\n1.5 2 3 0.1 7\n");
  CHECK(serialize_exploration(parse_exploration(canon)) == canon);
}

TEST_CASE("two samples give two data lines") {
  const Exploration e = random_exploration(4, 14, 6, 2);
  const std::string s = serialize_exploration(e);
  int lines = 0;
  for (char ch : s) lines += ch == '\n';
  CHECK(lines == 3);
}

TEST_CASE("parse(serialize(e)) == e on random explorations") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int rows = 1 + static_cast<int>(seed % 5), cols = 1 + static_cast<int>(seed % 7);
    const Exploration e = random_exploration(seed, rows, cols, 1 + static_cast<int>(seed % 9));
    CHECK(parse_exploration(serialize_exploration(e), "obj") == e);
  }
}

TEST_CASE("dataset directory round trip") {
  const fs::path root = fs::temp_directory_path() / "iclap_types_dataset";
  fs::remove_all(root);
  Dataset ds;
  for (int o = 0; o < 2; ++o) {
    DatasetObject obj;
    obj.object_id = "obj" + std::to_string(o);
    obj.display_name = "Object " + std::to_string(o);
    for (int e = 0; e < 3; ++e) {
      obj.exploration_ids.push_back("e" + std::to_string(e + 1));
      const Exploration ex = random_exploration(static_cast<std::uint64_t>(10 * o + e), 14, 6, 4);
      obj.explorations.emplace_back(obj.object_id, ex.samples());
    }
    ds.objects.push_back(obj);
  }
  save_dataset(ds, root);
  const Dataset back = load_dataset(root);
  REQUIRE(back.objects.size() == 2);
  CHECK(back.objects[1].display_name == "Object 1");
  CHECK(back.objects[1].exploration_ids == ds.objects[1].exploration_ids);
  CHECK(back.objects[1].explorations == ds.objects[1].explorations);
  CHECK(back.index_of("obj1") == 1);
  fs::remove_all(root);
}
