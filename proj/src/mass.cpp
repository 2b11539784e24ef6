#include "loopsoup/mass.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace loopsoup {

MassFunction MassSpec::function() const {
  const double a = c0, bx = cx, by = cy;
  if (kind == Kind::Constant) {
    if (a < 0.0) throw std::invalid_argument("negative mass");
    return [a](double, double) { return a; };
  }
  return [a, bx, by](double x, double y) {
    const double v = a + bx * x + by * y;
    if (v < 0.0) throw std::domain_error("mass function negative at evaluation point");
    return v;
  };
}

std::string MassSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (kind == Kind::Constant) {
    out << "const:" << c0;
  } else {
    out << "affine:" << c0 << "," << cx << "," << cy;
  }
  return out.str();
}

MassSpec parse_mass_spec(const std::string& text) {
  auto numbers = [](const std::string& body) {
    std::vector<double> v;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
  };
  MassSpec spec;
  if (text.rfind("affine:", 0) == 0) {
    auto v = numbers(text.substr(7));
    if (v.size() != 3) throw std::invalid_argument("affine mass needs 3 coefficients: " + text);
    spec = MassSpec::affine(v[0], v[1], v[2]);
  } else {
    const std::string body = text.rfind("const:", 0) == 0 ? text.substr(6) : text;
    spec = MassSpec::constant(std::stod(body));
    if (spec.c0 < 0.0) throw std::invalid_argument("negative mass: " + text);
  }
  return spec;
}

}  // namespace loopsoup
