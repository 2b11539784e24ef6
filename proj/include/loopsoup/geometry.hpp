#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "loopsoup/plane.hpp"

namespace loopsoup {

// Square cells of side eps covering a frame; cell (ix, iy) spans
// [x0 + ix eps, x0 + (ix+1) eps) x [y0 + iy eps, ...).
class Raster {
 public:
  Raster(Box frame, double eps);

  const Box& frame() const { return frame_; }
  double eps() const { return eps_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t cells() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  int index(int ix, int iy) const { return iy * nx_ + ix; }
  int ix(int cell) const { return cell % nx_; }
  int iy(int cell) const { return cell / nx_; }
  std::optional<int> cell_of(Point z) const;
  Point center(int cell) const;

 private:
  Box frame_;
  double eps_;
  int nx_, ny_;
};

struct PathCells {
  // Sorted, unique cells met by the polyline (clipped to the frame).
  std::vector<int> cells;
  // The polyline leaves the frame somewhere.
  bool leaves_frame = false;
};

// Every cell a segment of the polyline passes through (grid traversal).
PathCells rasterize_path(std::span<const Point> path, const Raster& raster);

struct Cluster {
  std::vector<std::size_t> loops;
  std::vector<int> cells;
  Box bbox;
  double diameter = 0.0;
  // Touches the outermost ring of cells or leaves the frame; its filling is ill-defined.
  bool touches_frame = false;
};

struct ClusterSet {
  std::vector<int> label;  // per loop
  std::vector<Cluster> clusters;
};

// Loops are adjacent when their rasterized paths share a cell; clusters are
// the connected components (union-find).
ClusterSet build_clusters(std::span<const std::vector<Point>> loops, const Raster& raster);

// Cluster cells plus the cells not reachable from outside the cluster's
// bounding box without crossing the cluster (4-connected flood fill).
std::vector<int> fill_cluster(const Cluster& cluster, const Raster& raster);

// Filled cluster containing z and its diameter; diameter 0 when no filled
// cluster contains z. `touches_frame` reports an ill-defined filling.
struct ClusterAt {
  std::optional<std::size_t> cluster;
  double diameter = 0.0;
  bool touches_frame = false;
};
ClusterAt filled_cluster_at(const ClusterSet& set, const Raster& raster, Point z);

// Number of cells of `window` that meet no filled cluster.
struct CarpetCount {
  std::size_t carpet = 0;
  std::size_t window_cells = 0;
  std::size_t frame_clusters = 0;
};
CarpetCount carpet_count(std::span<const std::vector<Point>> loops, const Raster& raster, const Box& window);

struct DimensionEstimate {
  double slope = 0.0;
  double stderr_ = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::vector<double> eps;
  std::vector<double> mean_log_count;
};

// counts[r][i] is the carpet count of replica r at resolution eps[i]. Each
// replica's log-count is regressed on log(1/eps); the estimate is the mean
// slope, the error its standard error. Replicas with a zero count are excluded.
DimensionEstimate carpet_dimension(std::span<const std::vector<std::size_t>> counts, std::span<const double> eps);

// Vacant set: cells of R met by no loop. True iff a 4-connected vacant path
// joins the left and right sides of R.
bool crossing_event(std::span<const std::vector<Point>> loops, const Box& R, double eps);

struct TailFit {
  std::vector<double> L;
  std::vector<double> survival;
  bool defined = false;
  double slope = 0.0;
  double xi = 0.0;
  double xi_stderr = 0.0;
  std::size_t fit_points = 0;
  bool log_survival_decreasing = false;
};

// Survival P(diam >= L) over the grid; fit of log-survival on L over the points
// with survival in [lo, hi]; xi = -1/slope with a 20-group jackknife error.
TailFit cluster_diameter_tail(std::span<const double> diameters, std::span<const double> L_grid, double lo = 0.05,
                              double hi = 0.30);

// (187 - 7 l + sqrt(25 + l^2 - 26 l)) / 96 for l in [0, 1].
double hausdorff_prediction(double l);

}  // namespace loopsoup
