#include "loopsoup/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace loopsoup {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

struct LeastSquares {
  double slope = 0.0;
  double intercept = 0.0;
};

LeastSquares fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return {0.0, my};
  const double b = sxy / sxx;
  return {b, my - b * mx};
}

}  // namespace

Raster::Raster(Box frame, double eps) : frame_(frame), eps_(eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("raster resolution must be positive");
  if (!(frame.width() > 0.0) || !(frame.height() > 0.0)) throw std::invalid_argument("empty raster frame");
  nx_ = std::max(1, static_cast<int>(std::ceil(frame.width() / eps - 1e-9)));
  ny_ = std::max(1, static_cast<int>(std::ceil(frame.height() / eps - 1e-9)));
}

std::optional<int> Raster::cell_of(Point z) const {
  const double fx = std::floor((z.real() - frame_.x0) / eps_);
  const double fy = std::floor((z.imag() - frame_.y0) / eps_);
  if (fx < 0 || fy < 0 || fx >= nx_ || fy >= ny_) return std::nullopt;
  return index(static_cast<int>(fx), static_cast<int>(fy));
}

Point Raster::center(int cell) const {
  return {frame_.x0 + (ix(cell) + 0.5) * eps_, frame_.y0 + (iy(cell) + 0.5) * eps_};
}

PathCells rasterize_path(std::span<const Point> path, const Raster& raster) {
  PathCells out;
  const Box& f = raster.frame();
  const double eps = raster.eps();
  auto record = [&](long cx, long cy) {
    if (cx < 0 || cy < 0 || cx >= raster.nx() || cy >= raster.ny()) {
      out.leaves_frame = true;
      return;
    }
    out.cells.push_back(raster.index(static_cast<int>(cx), static_cast<int>(cy)));
  };
  if (path.empty()) return out;
  if (path.size() == 1) {
    record(static_cast<long>(std::floor((path[0].real() - f.x0) / eps)),
           static_cast<long>(std::floor((path[0].imag() - f.y0) / eps)));
  }
  for (std::size_t j = 1; j < path.size(); ++j) {
    // Grid traversal of the segment p -> q.
    const double px = (path[j - 1].real() - f.x0) / eps, py = (path[j - 1].imag() - f.y0) / eps;
    const double qx = (path[j].real() - f.x0) / eps, qy = (path[j].imag() - f.y0) / eps;
    long cx = static_cast<long>(std::floor(px)), cy = static_cast<long>(std::floor(py));
    const long ex = static_cast<long>(std::floor(qx)), ey = static_cast<long>(std::floor(qy));
    const double dx = qx - px, dy = qy - py;
    const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double tx = dx != 0.0 ? ((cx + (sx > 0 ? 1 : 0)) - px) / dx : inf;
    double ty = dy != 0.0 ? ((cy + (sy > 0 ? 1 : 0)) - py) / dy : inf;
    const double ddx = dx != 0.0 ? std::abs(1.0 / dx) : inf;
    const double ddy = dy != 0.0 ? std::abs(1.0 / dy) : inf;
    record(cx, cy);
    long budget = std::labs(ex - cx) + std::labs(ey - cy);
    while ((cx != ex || cy != ey) && budget-- > 0) {
      if (tx < ty) {
        cx += sx;
        tx += ddx;
      } else {
        cy += sy;
        ty += ddy;
      }
      record(cx, cy);
    }
    if (cx != ex || cy != ey) record(ex, ey);
  }
  std::sort(out.cells.begin(), out.cells.end());
  out.cells.erase(std::unique(out.cells.begin(), out.cells.end()), out.cells.end());
  return out;
}

ClusterSet build_clusters(std::span<const std::vector<Point>> loops, const Raster& raster) {
  const std::size_t n = loops.size();
  std::vector<PathCells> cells(n);
  for (std::size_t i = 0; i < n; ++i) cells[i] = rasterize_path(loops[i], raster);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::vector<long> owner(raster.cells(), -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c : cells[i].cells) {
      auto& o = owner[static_cast<std::size_t>(c)];
      if (o < 0) {
        o = static_cast<long>(i);
        continue;
      }
      const std::size_t a = find_root(parent, i), b = find_root(parent, static_cast<std::size_t>(o));
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }

  ClusterSet set;
  set.label.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find_root(parent, i);
    if (set.label[r] < 0) {
      set.label[r] = static_cast<int>(set.clusters.size());
      set.clusters.emplace_back();
    }
    set.label[i] = set.label[r];
    set.clusters[static_cast<std::size_t>(set.label[i])].loops.push_back(i);
  }
  for (Cluster& cl : set.clusters) {
    std::vector<Point> pts;
    for (std::size_t i : cl.loops) {
      cl.cells.insert(cl.cells.end(), cells[i].cells.begin(), cells[i].cells.end());
      pts.insert(pts.end(), loops[i].begin(), loops[i].end());
      if (cells[i].leaves_frame) cl.touches_frame = true;
    }
    std::sort(cl.cells.begin(), cl.cells.end());
    cl.cells.erase(std::unique(cl.cells.begin(), cl.cells.end()), cl.cells.end());
    for (int c : cl.cells) {
      const int x = raster.ix(c), y = raster.iy(c);
      if (x == 0 || y == 0 || x == raster.nx() - 1 || y == raster.ny() - 1) cl.touches_frame = true;
    }
    cl.bbox = bounding_box(pts);
    cl.diameter = diameter(pts);
  }
  return set;
}

std::vector<int> fill_cluster(const Cluster& cluster, const Raster& raster) {
  if (cluster.cells.empty()) return {};
  int x0 = raster.nx(), x1 = -1, y0 = raster.ny(), y1 = -1;
  for (int c : cluster.cells) {
    x0 = std::min(x0, raster.ix(c));
    x1 = std::max(x1, raster.ix(c));
    y0 = std::min(y0, raster.iy(c));
    y1 = std::max(y1, raster.iy(c));
  }
  // Local grid with a free ring around the bounding box.
  const int w = x1 - x0 + 3, h = y1 - y0 + 3;
  std::vector<unsigned char> state(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);  // 1 cluster, 2 outside
  auto at = [&](int lx, int ly) -> unsigned char& { return state[static_cast<std::size_t>(ly) * w + lx]; };
  for (int c : cluster.cells) at(raster.ix(c) - x0 + 1, raster.iy(c) - y0 + 1) = 1;
  std::deque<std::pair<int, int>> queue{{0, 0}};
  at(0, 0) = 2;
  while (!queue.empty()) {
    const auto [lx, ly] = queue.front();
    queue.pop_front();
    const int nbr[4][2] = {{lx + 1, ly}, {lx - 1, ly}, {lx, ly + 1}, {lx, ly - 1}};
    for (const auto& p : nbr) {
      if (p[0] < 0 || p[1] < 0 || p[0] >= w || p[1] >= h) continue;
      if (at(p[0], p[1]) != 0) continue;
      at(p[0], p[1]) = 2;
      queue.emplace_back(p[0], p[1]);
    }
  }
  std::vector<int> filled;
  for (int ly = 1; ly < h - 1; ++ly)
    for (int lx = 1; lx < w - 1; ++lx)
      if (at(lx, ly) != 2) filled.push_back(raster.index(lx - 1 + x0, ly - 1 + y0));
  std::sort(filled.begin(), filled.end());
  return filled;
}

ClusterAt filled_cluster_at(const ClusterSet& set, const Raster& raster, Point z) {
  ClusterAt out;
  const auto cz = raster.cell_of(z);
  if (!cz) throw std::invalid_argument("point outside the raster");
  const int zx = raster.ix(*cz), zy = raster.iy(*cz);
  for (std::size_t k = 0; k < set.clusters.size(); ++k) {
    const Cluster& cl = set.clusters[k];
    if (cl.cells.empty()) continue;
    int x0 = raster.nx(), x1 = -1, y0 = raster.ny(), y1 = -1;
    for (int c : cl.cells) {
      x0 = std::min(x0, raster.ix(c));
      x1 = std::max(x1, raster.ix(c));
      y0 = std::min(y0, raster.iy(c));
      y1 = std::max(y1, raster.iy(c));
    }
    if (zx < x0 || zx > x1 || zy < y0 || zy > y1) continue;
    const auto filled = fill_cluster(cl, raster);
    if (!std::binary_search(filled.begin(), filled.end(), *cz)) continue;
    // Nested filled clusters: keep the outermost, i.e. the widest.
    if (!out.cluster || cl.diameter > out.diameter) {
      out.cluster = k;
      out.diameter = cl.diameter;
      out.touches_frame = cl.touches_frame;
    }
  }
  return out;
}

CarpetCount carpet_count(std::span<const std::vector<Point>> loops, const Raster& raster, const Box& window) {
  const ClusterSet set = build_clusters(loops, raster);
  std::vector<unsigned char> covered(raster.cells(), 0);
  CarpetCount out;
  for (const Cluster& cl : set.clusters) {
    if (cl.touches_frame) ++out.frame_clusters;
    for (int c : fill_cluster(cl, raster)) covered[static_cast<std::size_t>(c)] = 1;
  }
  for (std::size_t c = 0; c < raster.cells(); ++c) {
    if (!window.contains(raster.center(static_cast<int>(c)))) continue;
    ++out.window_cells;
    if (!covered[c]) ++out.carpet;
  }
  return out;
}

DimensionEstimate carpet_dimension(std::span<const std::vector<std::size_t>> counts, std::span<const double> eps) {
  if (eps.size() < 4) throw std::invalid_argument("carpet dimension needs at least 4 resolutions");
  if (counts.size() < 20) throw std::invalid_argument("carpet dimension needs at least 20 replicas");
  DimensionEstimate est;
  est.eps.assign(eps.begin(), eps.end());
  est.mean_log_count.assign(eps.size(), 0.0);
  std::vector<double> x(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) x[i] = std::log(1.0 / eps[i]);
  std::vector<double> slopes;
  for (const auto& row : counts) {
    if (row.size() != eps.size()) throw std::invalid_argument("count table has the wrong width");
    if (std::any_of(row.begin(), row.end(), [](std::size_t c) { return c == 0; })) {
      ++est.excluded;
      continue;
    }
    std::vector<double> y(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      y[i] = std::log(static_cast<double>(row[i]));
      est.mean_log_count[i] += y[i];
    }
    slopes.push_back(fit_line(x, y).slope);
  }
  est.used = slopes.size();
  if (slopes.empty()) return est;
  for (double& v : est.mean_log_count) v /= static_cast<double>(slopes.size());
  const double n = static_cast<double>(slopes.size());
  est.slope = std::accumulate(slopes.begin(), slopes.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : slopes) ss += (s - est.slope) * (s - est.slope);
  est.stderr_ = slopes.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return est;
}

bool crossing_event(std::span<const std::vector<Point>> loops, const Box& R, double eps) {
  const Raster raster(R, eps);
  std::vector<unsigned char> state(raster.cells(), 0);  // 1 occupied, 2 reached
  for (const auto& loop : loops)
    for (int c : rasterize_path(loop, raster).cells) state[static_cast<std::size_t>(c)] = 1;
  std::deque<int> queue;
  for (int y = 0; y < raster.ny(); ++y) {
    const int c = raster.index(0, y);
    if (state[static_cast<std::size_t>(c)] == 0) {
      state[static_cast<std::size_t>(c)] = 2;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int x = raster.ix(c), y = raster.iy(c);
    if (x == raster.nx() - 1) return true;
    const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
    for (const auto& p : nbr) {
      if (p[0] < 0 || p[1] < 0 || p[0] >= raster.nx() || p[1] >= raster.ny()) continue;
      const int d = raster.index(p[0], p[1]);
      if (state[static_cast<std::size_t>(d)] != 0) continue;
      state[static_cast<std::size_t>(d)] = 2;
      queue.push_back(d);
    }
  }
  return false;
}

namespace {

std::vector<double> survival_curve(std::span<const double> d, std::span<const double> L) {
  std::vector<double> sorted(d.begin(), d.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> s(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), L[i]) - sorted.begin();
    s[i] = static_cast<double>(sorted.size() - static_cast<std::size_t>(below)) / static_cast<double>(sorted.size());
  }
  return s;
}

double fit_xi(std::span<const double> L, std::span<const double> s, std::span<const std::size_t> use) {
  std::vector<double> x, y;
  for (std::size_t i : use) {
    if (!(s[i] > 0.0)) continue;
    x.push_back(L[i]);
    y.push_back(std::log(s[i]));
  }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double b = fit_line(x, y).slope;
  return b < 0.0 ? -1.0 / b : std::numeric_limits<double>::infinity();
}

}  // namespace

TailFit cluster_diameter_tail(std::span<const double> diameters, std::span<const double> L_grid, double lo,
                              double hi) {
  if (diameters.size() < 500) throw std::invalid_argument("diameter tail needs at least 500 replicas");
  TailFit fit;
  fit.L.assign(L_grid.begin(), L_grid.end());
  fit.survival = survival_curve(diameters, L_grid);
  if (std::all_of(diameters.begin(), diameters.end(), [](double d) { return d == 0.0; })) return fit;

  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < L_grid.size(); ++i)
    if (fit.survival[i] >= lo && fit.survival[i] <= hi) use.push_back(i);
  fit.fit_points = use.size();
  if (use.size() < 2) return fit;

  bool strict = true;
  for (std::size_t k = 1; k < use.size(); ++k)
    if (!(fit.survival[use[k]] < fit.survival[use[k - 1]])) strict = false;
  bool nonincreasing = true;
  for (std::size_t i = 1; i < fit.survival.size(); ++i)
    if (fit.survival[i] > fit.survival[i - 1]) nonincreasing = false;
  fit.log_survival_decreasing = strict && nonincreasing;

  fit.xi = fit_xi(fit.L, fit.survival, use);
  fit.slope = -1.0 / fit.xi;
  fit.defined = std::isfinite(fit.xi);
  if (!fit.defined) return fit;

  // Delete-a-group jackknife over contiguous replica blocks.
  constexpr std::size_t G = 20;
  const std::size_t n = diameters.size();
  std::vector<double> xs;
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t a = g * n / G, b = (g + 1) * n / G;
    std::vector<double> rest;
    rest.reserve(n - (b - a));
    rest.insert(rest.end(), diameters.begin(), diameters.begin() + static_cast<long>(a));
    rest.insert(rest.end(), diameters.begin() + static_cast<long>(b), diameters.end());
    const double xi = fit_xi(fit.L, survival_curve(rest, L_grid), use);
    if (std::isfinite(xi)) xs.push_back(xi);
  }
  if (xs.size() == G) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / G;
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    fit.xi_stderr = std::sqrt((G - 1.0) / G * ss);
  } else {
    fit.xi_stderr = std::numeric_limits<double>::infinity();
  }
  return fit;
}

double hausdorff_prediction(double l) {
  if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("h(l) is defined for l in [0, 1]");
  return (187.0 - 7.0 * l + std::sqrt(std::max(0.0, 25.0 + l * l - 26.0 * l))) / 96.0;
}

}  // namespace loopsoup
