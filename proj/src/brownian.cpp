#include "loopsoup/brownian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace loopsoup {

namespace {

const std::uint64_t kBrownianTag = stream_tag("brownian-soup");
const std::uint64_t kBrownianLoopTag = stream_tag("brownian-loop");

}  // namespace

double BrownianLoop::time_at(std::size_t j) const {
  if (!times.empty()) return times[j];
  return duration * static_cast<double>(j) / static_cast<double>(resolution());
}

bool BrownianLoop::suspicious_step() const {
  if (path.size() < 2 || !times.empty()) return false;
  const double limit = 6.0 * std::sqrt(duration / static_cast<double>(resolution()));
  for (std::size_t j = 1; j < path.size(); ++j)
    if (std::abs(path[j].real() - path[j - 1].real()) > limit || std::abs(path[j].imag() - path[j - 1].imag()) > limit)
      return true;
  return false;
}

void BrownianSoupConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(t_max > t0)) throw std::invalid_argument("t_max must exceed t0");
  if (!(h > 0.0)) throw std::invalid_argument("spatial step must be positive");
  if (min_resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  if (max_resolution < min_resolution) throw std::invalid_argument("max resolution below min resolution");
  if (!(domain.area() > 0.0)) throw std::invalid_argument("zero-area domain");
}

double BrownianSoupConfig::expected_proposals() const {
  const double inv = 1.0 / t0 - (std::isfinite(t_max) ? 1.0 / t_max : 0.0);
  return lambda * domain.bounding_box().area() * inv / (2.0 * std::numbers::pi);
}

int brownian_resolution(double duration, const BrownianSoupConfig& config) {
  const double want = std::max<double>(config.min_resolution, std::ceil(duration / (config.h * config.h)));
  if (want >= config.max_resolution) return static_cast<int>(std::bit_floor(static_cast<unsigned>(config.max_resolution)));
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(want)));
}

std::optional<std::vector<Point>> brownian_bridge(Point root, double duration, int M, Xoshiro256& rng,
                                                  const std::function<bool(Point)>& inside) {
  if (M < 1 || !std::has_single_bit(static_cast<unsigned>(M))) throw std::invalid_argument("resolution must be a power of two");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> path(static_cast<std::size_t>(M) + 1);
  path.front() = root;
  path.back() = root;
  // Levy construction: the midpoint of a bridge over an interval of length dt
  // is the average of the endpoints plus N(0, dt/4) per coordinate.
  for (int span = M; span >= 2; span /= 2) {
    const double dt = duration * span / M;
    const double sd = std::sqrt(dt / 4.0);
    for (int a = 0; a < M; a += span) {
      const auto l = static_cast<std::size_t>(a), r = static_cast<std::size_t>(a + span);
      const auto mid = static_cast<std::size_t>(a + span / 2);
      const double x = normal(rng), y = normal(rng);
      path[mid] = 0.5 * (path[l] + path[r]) + Point(sd * x, sd * y);
      if (inside && !inside(path[mid])) return std::nullopt;
    }
  }
  return path;
}

BrownianSoup sample_brownian_soup(const BrownianSoupConfig& config, std::uint64_t replica) {
  config.validate();
  const Box box = config.domain.bounding_box();
  const double inv0 = 1.0 / config.t0;
  const double inv1 = std::isfinite(config.t_max) ? 1.0 / config.t_max : 0.0;
  const bool prethin = config.mass.kind == MassSpec::Kind::Constant && !config.mass.is_zero();
  const double m2 = config.mass.c0 * config.mass.c0;

  BrownianSoup soup;
  soup.replica = replica;
  Xoshiro256 counter = make_stream(config.seed, {kBrownianTag, replica});
  soup.proposals = static_cast<std::size_t>(std::poisson_distribution<long>(config.expected_proposals())(counter));
  const auto inside = [&](Point z) { return config.domain.contains(z); };
  for (std::size_t i = 0; i < soup.proposals; ++i) {
    const std::uint64_t key = derive_key(config.seed, {kBrownianLoopTag, replica, i});
    Xoshiro256 rng(key);
    const Point root(box.x0 + box.width() * rng.uniform(), box.y0 + box.height() * rng.uniform());
    // Density proportional to t^-2 on [t0, t_max].
    const double t = 1.0 / (inv0 - rng.uniform() * (inv0 - inv1));
    const double mark = std::exponential_distribution<double>(1.0)(rng);
    soup.proposal_durations.push_back(t);
    if (!config.domain.contains(root)) continue;
    if (prethin && m2 * t > mark) {
      ++soup.killed;
      continue;
    }
    auto path = brownian_bridge(root, t, brownian_resolution(t, config), rng, inside);
    if (!path) continue;
    BrownianLoop loop;
    loop.root = root;
    loop.duration = t;
    loop.path = std::move(*path);
    loop.mark = mark;
    loop.id = key;
    soup.loops.push_back(std::move(loop));
  }
  if (!config.mass.is_zero() && !prethin) return thin_to_massive_brownian(soup, config.mass.function());
  return soup;
}

double killing_functional(const BrownianLoop& loop, const MassFunction& m) {
  if (loop.path.size() < 2) return 0.0;
  auto m2 = [&](Point z) {
    const double v = m(z.real(), z.imag());
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("mass undefined or negative on the loop");
    return v * v;
  };
  double total = 0.0;
  double prev = m2(loop.path[0]);
  for (std::size_t j = 1; j < loop.path.size(); ++j) {
    const double cur = m2(loop.path[j]);
    total += 0.5 * (prev + cur) * (loop.time_at(j) - loop.time_at(j - 1));
    prev = cur;
  }
  return total;
}

BrownianSoup thin_to_massive_brownian(const BrownianSoup& soup, const MassFunction& m) {
  BrownianSoup out;
  out.proposals = soup.proposals;
  out.proposal_durations = soup.proposal_durations;
  out.killed = soup.killed;
  out.replica = soup.replica;
  for (const BrownianLoop& loop : soup.loops)
    if (killing_functional(loop, m) <= loop.mark) out.loops.push_back(loop);
  return out;
}

ConformalMap ConformalMap::identity() {
  return {[](Point z) { return z; }, [](Point) { return Point(1.0, 0.0); }, [](Point w) { return w; }, {}};
}

ConformalMap ConformalMap::scaling(double alpha) {
  if (alpha == 0.0) throw std::invalid_argument("scaling by zero");
  return {[alpha](Point z) { return alpha * z; }, [alpha](Point) { return Point(alpha, 0.0); },
          [alpha](Point w) { return w / alpha; }, {}};
}

ConformalMap ConformalMap::half_square() {
  return {[](Point z) { return 0.5 * z * z; }, [](Point z) { return z; },
          [](Point w) { return std::sqrt(2.0 * w); },
          [](Point w) { return !(w.imag() == 0.0 && w.real() <= 0.0); }};
}

BrownianLoop conformal_transport(const BrownianLoop& loop, const ConformalMap& f) {
  BrownianLoop out;
  out.mark = loop.mark;
  out.id = loop.id;
  out.path.resize(loop.path.size());
  out.times.resize(loop.path.size());
  double prev = 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < loop.path.size(); ++j) {
    const double d = std::abs(f.df(loop.path[j]));
    if (!(d > 0.0)) throw std::invalid_argument("conformal map has zero derivative on the loop");
    const double cur = d * d;
    if (j > 0) s += 0.5 * (prev + cur) * (loop.time_at(j) - loop.time_at(j - 1));
    prev = cur;
    out.path[j] = f.f(loop.path[j]);
    out.times[j] = s;
  }
  out.root = out.path.empty() ? Point{} : out.path.front();
  out.duration = s;
  return out;
}

MassFunction mass_transport(const MassFunction& m, const ConformalMap& f) {
  return [m, f](double x, double y) {
    const Point w(x, y);
    if (f.in_range && !f.in_range(w)) throw std::invalid_argument("point outside the range of the map");
    const Point z = f.inverse(w);
    const double d = std::abs(f.df(z));
    if (!(d > 0.0)) throw std::invalid_argument("conformal map has zero derivative");
    return m(z.real(), z.imag()) / d;
  };
}

double loop_diameter(const BrownianLoop& loop) { return diameter(loop.path); }

}  // namespace loopsoup
