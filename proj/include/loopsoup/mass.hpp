#pragma once

#include <functional>
#include <string>
#include <vector>

namespace loopsoup {

// Mass function on plane coordinates. Values must be nonnegative.
using MassFunction = std::function<double(double x, double y)>;

// Serializable description of a mass function.
struct MassSpec {
  enum class Kind { Constant, Affine };
  Kind kind = Kind::Constant;
  // Constant: m = c0. Affine: m = c0 + cx*x + cy*y.
  double c0 = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  static MassSpec constant(double value) { return {Kind::Constant, value, 0.0, 0.0}; }
  static MassSpec affine(double c0, double cx, double cy) { return {Kind::Affine, c0, cx, cy}; }

  bool is_zero() const { return kind == Kind::Constant && c0 == 0.0; }
  MassFunction function() const;
  std::string describe() const;

  friend bool operator==(const MassSpec&, const MassSpec&) = default;
};

// Parses "0.5", "const:0.5" or "affine:c0,cx,cy".
MassSpec parse_mass_spec(const std::string& text);

}  // namespace loopsoup
