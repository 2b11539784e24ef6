#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// the library's linear algebra or enumeration code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

using Cell = std::pair<int, int>;

// Rectangle [0,w) x [0,h) as a list of cells, row-major.
inline std::vector<Cell> rect(int w, int h) {
  std::vector<Cell> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.push_back({x, y});
  return out;
}

// Dense A = diag(k+4) - adjacency.
inline std::vector<std::vector<double>> precision(const std::vector<Cell>& cells, const std::vector<double>& k) {
  const std::size_t n = cells.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] = k[i] + 4.0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(cells[i].first - cells[j].first) + std::abs(cells[i].second - cells[j].second) == 1) A[i][j] = -1.0;
  }
  return A;
}

// Gaussian elimination with partial pivoting.
inline double det(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double d = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (p != c) {
      std::swap(a[p], a[c]);
      d = -d;
    }
    d *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return d;
}

inline std::vector<std::vector<double>> inverse(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double piv = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Sum of the weights of closed walks of exactly `len` steps from cell i
// (p = 1/(k+4) per step), by brute force over all walks.
inline double return_weight(const std::vector<Cell>& cells, const std::vector<double>& k, std::size_t i, int len) {
  std::map<Cell, std::size_t> idx;
  for (std::size_t j = 0; j < cells.size(); ++j) idx[cells[j]] = j;
  std::function<double(std::size_t, int)> go = [&](std::size_t at, int left) -> double {
    if (left == 0) return at == i ? 1.0 : 0.0;
    double s = 0.0;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      auto it = idx.find({cells[at].first + dx[d], cells[at].second + dy[d]});
      if (it != idx.end()) s += go(it->second, left - 1) / (k[at] + 4.0);
    }
    return s;
  };
  return go(i, len);
}

// Binomial coefficient as a double.
inline double choose(int n, int r) {
  double c = 1.0;
  for (int j = 1; j <= r; ++j) c = c * (n - r + j) / j;
  return c;
}

}  // namespace oracle
