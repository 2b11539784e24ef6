#include <cmath>

#include "doctest.h"
#include "loopsoup/geometry.hpp"
#include "loopsoup/rng.hpp"

using namespace loopsoup;

namespace {

std::vector<Point> square_loop(double x0, double y0, double s) {
  return {Point(x0, y0), Point(x0 + s, y0), Point(x0 + s, y0 + s), Point(x0, y0 + s), Point(x0, y0)};
}

}  // namespace

TEST_CASE("h(l) closed forms") {
  CHECK(hausdorff_prediction(0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(hausdorff_prediction(1.0) == doctest::Approx(15.0 / 8.0).epsilon(1e-15));
  CHECK(hausdorff_prediction(0.5) == doctest::Approx(187.0 / 96.0).epsilon(1e-15));
  CHECK_THROWS(hausdorff_prediction(-0.1));
  CHECK_THROWS(hausdorff_prediction(1.1));
  double prev = hausdorff_prediction(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double h = hausdorff_prediction(i * 1e-3);
    REQUIRE(h < prev);
    REQUIRE(prev - h < 0.01);
    prev = h;
  }
}

TEST_CASE("raster cells and traversal") {
  const Raster r(Box{0, 0, 1, 1}, 0.25);
  CHECK(r.nx() == 4);
  CHECK(r.ny() == 4);
  CHECK(*r.cell_of(Point(0.3, 0.6)) == r.index(1, 2));
  CHECK(!r.cell_of(Point(1.5, 0.5)));
  const std::vector<Point> diag{Point(0.1, 0.1), Point(0.9, 0.1)};
  const PathCells pc = rasterize_path(diag, r);
  CHECK(pc.cells.size() == 4);
  CHECK(!pc.leaves_frame);
  const std::vector<Point> out{Point(0.5, 0.5), Point(1.5, 0.5)};
  CHECK(rasterize_path(out, r).leaves_frame);
}

TEST_CASE("clusters: overlapping loops merge, distant loops do not") {
  const Raster r(Box{0, 0, 10, 10}, 0.1);
  const std::vector<std::vector<Point>> loops{square_loop(1, 1, 2), square_loop(2, 2, 2), square_loop(6, 6, 1)};
  const ClusterSet set = build_clusters(loops, r);
  CHECK(set.clusters.size() == 2);
  CHECK(set.label[0] == set.label[1]);
  CHECK(set.label[0] != set.label[2]);
  // Filled cluster at an interior point of the second square only.
  const ClusterAt at = filled_cluster_at(set, r, Point(6.5, 6.5));
  REQUIRE(at.cluster);
  CHECK(at.diameter == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
  CHECK(!filled_cluster_at(set, r, Point(8.5, 1.5)).cluster);
}

TEST_CASE("filling a square loop covers its interior") {
  const Raster r(Box{0, 0, 1, 1}, 0.05);
  const std::vector<std::vector<Point>> loops{square_loop(0.2, 0.2, 0.5)};
  const ClusterSet set = build_clusters(loops, r);
  const auto filled = fill_cluster(set.clusters[0], r);
  // Roughly (0.5 / 0.05 + 1)^2 cells.
  CHECK(filled.size() >= 100);
  CHECK(filled.size() <= 144);
}

TEST_CASE("carpet of an empty soup is the whole window, slope 2") {
  const Box frame{0, 0, 1, 1}, window{0.25, 0.25, 0.75, 0.75};
  const std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  std::vector<std::vector<std::size_t>> counts;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::size_t> row;
    for (double e : eps) row.push_back(carpet_count({}, Raster(frame, e), window).carpet);
    counts.push_back(row);
  }
  CHECK(counts[0][0] == 16);
  const DimensionEstimate est = carpet_dimension(counts, eps);
  CHECK(est.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(est.stderr_ == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> few{1.0 / 8, 1.0 / 16};
  std::vector<std::vector<std::size_t>> small(20, std::vector<std::size_t>{16, 64});
  CHECK_THROWS(carpet_dimension(small, few));
}

TEST_CASE("crossing: empty soup crosses, a wall blocks") {
  const Box R{0, 0, 3, 1};
  CHECK(crossing_event({}, R, 0.1));
  const std::vector<std::vector<Point>> wall{{Point(1.5, -0.5), Point(1.5, 1.5), Point(1.5, -0.5)}};
  CHECK(!crossing_event(wall, R, 0.1));
}

TEST_CASE("property: adding loops never creates a crossing") {
  Xoshiro256 rng(13);
  const Box R{0, 0, 3, 1};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::vector<Point>> loops;
    bool prev = crossing_event(loops, R, 0.1);
    for (int k = 0; k < 25; ++k) {
      const double x = rng.uniform() * 3, y = rng.uniform(), s = rng.uniform() * 0.6;
      loops.push_back(square_loop(x, y, s));
      const bool now = crossing_event(loops, R, 0.1);
      REQUIRE(!(now && !prev));
      prev = now;
    }
  }
}

TEST_CASE("diameter tail fit recovers an exponential rate") {
  Xoshiro256 rng(5);
  std::vector<double> d;
  for (int i = 0; i < 20000; ++i) d.push_back(-0.4 * std::log(1.0 - rng.uniform()));
  std::vector<double> grid;
  for (double L = 0; L <= 3.0; L += 0.02) grid.push_back(L);
  const TailFit f = cluster_diameter_tail(d, grid);
  REQUIRE(f.defined);
  CHECK(f.log_survival_decreasing);
  CHECK(std::abs(f.xi - 0.4) < 4.0 * f.xi_stderr + 0.01);
  CHECK_THROWS(cluster_diameter_tail(std::vector<double>(100, 1.0), grid));
}
