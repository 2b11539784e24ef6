#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace loopsoup {

using Point = std::complex<double>;

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(Point z) const { return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1; }
  friend bool operator==(const Box&, const Box&) = default;
};

// Open rectangle or open disc in the plane.
class PlaneDomain {
 public:
  enum class Shape { Rectangle, Disc };

  static PlaneDomain rectangle(double x0, double y0, double x1, double y1);
  static PlaneDomain disc(double cx, double cy, double r);

  Shape shape() const { return shape_; }
  bool contains(Point z) const;
  double area() const;
  Box bounding_box() const { return box_; }
  double diameter() const;
  // Image under z -> scale * z.
  PlaneDomain scaled(double scale) const;
  std::string describe() const;

  friend bool operator==(const PlaneDomain&, const PlaneDomain&) = default;

 private:
  Shape shape_ = Shape::Rectangle;
  Box box_;
};

// Parses "rect:x0,y0,x1,y1" or "disc:cx,cy,r".
PlaneDomain parse_plane_domain(const std::string& text);

// Euclidean diameter of a point set (convex hull + pairwise search over hull vertices).
double diameter(std::span<const Point> points);

Box bounding_box(std::span<const Point> points);

}  // namespace loopsoup
