#include "loopsoup/plane.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace loopsoup {

PlaneDomain PlaneDomain::rectangle(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("zero-area domain");
  PlaneDomain d;
  d.shape_ = Shape::Rectangle;
  d.box_ = {x0, y0, x1, y1};
  return d;
}

PlaneDomain PlaneDomain::disc(double cx, double cy, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("zero-area domain");
  PlaneDomain d;
  d.shape_ = Shape::Disc;
  d.box_ = {cx - r, cy - r, cx + r, cy + r};
  return d;
}

bool PlaneDomain::contains(Point z) const {
  if (shape_ == Shape::Rectangle)
    return z.real() > box_.x0 && z.real() < box_.x1 && z.imag() > box_.y0 && z.imag() < box_.y1;
  const double r = 0.5 * box_.width();
  const Point c{0.5 * (box_.x0 + box_.x1), 0.5 * (box_.y0 + box_.y1)};
  return std::norm(z - c) < r * r;
}

double PlaneDomain::area() const {
  if (shape_ == Shape::Rectangle) return box_.area();
  const double r = 0.5 * box_.width();
  return std::numbers::pi * r * r;
}

double PlaneDomain::diameter() const {
  if (shape_ == Shape::Rectangle) return std::hypot(box_.width(), box_.height());
  return box_.width();
}

PlaneDomain PlaneDomain::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("scale must be positive");
  PlaneDomain d = *this;
  d.box_ = {s * box_.x0, s * box_.y0, s * box_.x1, s * box_.y1};
  return d;
}

std::string PlaneDomain::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (shape_ == Shape::Rectangle) {
    out << "rect:" << box_.x0 << "," << box_.y0 << "," << box_.x1 << "," << box_.y1;
  } else {
    out << "disc:" << 0.5 * (box_.x0 + box_.x1) << "," << 0.5 * (box_.y0 + box_.y1) << "," << 0.5 * box_.width();
  }
  return out.str();
}

PlaneDomain parse_plane_domain(const std::string& text) {
  auto numbers = [](const std::string& body) {
    std::vector<double> v;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
  };
  if (text.rfind("rect:", 0) == 0) {
    auto v = numbers(text.substr(5));
    if (v.size() != 4) throw std::invalid_argument("rect needs x0,y0,x1,y1: " + text);
    return PlaneDomain::rectangle(v[0], v[1], v[2], v[3]);
  }
  if (text.rfind("disc:", 0) == 0) {
    auto v = numbers(text.substr(5));
    if (v.size() != 3) throw std::invalid_argument("disc needs cx,cy,r: " + text);
    return PlaneDomain::disc(v[0], v[1], v[2]);
  }
  throw std::invalid_argument("unknown plane domain: " + text);
}

namespace {

double cross(Point o, Point a, Point b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

}  // namespace

double diameter(std::span<const Point> points) {
  if (points.size() < 2) return 0.0;
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) return 0.0;
  // Andrew's monotone chain.
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, std::norm(hull[i] - hull[j]));
  return std::sqrt(best);
}

Box bounding_box(std::span<const Point> points) {
  if (points.empty()) return {};
  Box b{points[0].real(), points[0].imag(), points[0].real(), points[0].imag()};
  for (const Point& p : points) {
    b.x0 = std::min(b.x0, p.real());
    b.x1 = std::max(b.x1, p.real());
    b.y0 = std::min(b.y0, p.imag());
    b.y1 = std::max(b.y1, p.imag());
  }
  return b;
}

}  // namespace loopsoup
