#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "loopsoup/brownian.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/geometry.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

namespace {

const std::uint64_t kBrownianStream = stream_tag("experiment-brownian");

Check make_check(std::string name, std::string rule, double estimate, double target, double tolerance,
                 std::size_t replicas, double se = 0.0, bool asserted = true) {
  Check c;
  c.name = std::move(name);
  c.rule = std::move(rule);
  c.estimate = estimate;
  c.target = target;
  c.tolerance = tolerance;
  c.stderr_ = se;
  c.replicas = replicas;
  c.asserted = asserted;
  return c;
}

std::vector<std::vector<Point>> paths_of(BrownianSoup&& soup, double min_duration = 0.0) {
  std::vector<std::vector<Point>> out;
  out.reserve(soup.loops.size());
  for (auto& l : soup.loops)
    if (l.duration >= min_duration) out.push_back(std::move(l.path));
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

StatReport brownian_sanity_experiment(const RunConfig& c) {
  StatReport r;
  const PlaneDomain domain = parse_plane_domain(c.plane_domain);
  const double lambda = c.lambdas.front();

  BrownianSoupConfig base;
  base.domain = domain;
  base.lambda = lambda;
  base.t0 = c.t0;
  base.h = c.h;
  base.seed = derive_key(c.seed, {kBrownianStream, 0});

  // Counts and durations of the critical soup.
  std::vector<double> counts(c.replicas);
  std::vector<std::vector<double>> durations(c.replicas);
  parallel_for(c.replicas, [&](std::size_t i) {
    BrownianSoup s = sample_brownian_soup(base, i);
    counts[i] = static_cast<double>(s.proposals);
    durations[i] = std::move(s.proposal_durations);
  });
  const double expected = base.expected_proposals();
  const MeanEstimate cm = mean_stderr(counts);
  r.checks.push_back(make_check("loop count mean = lambda A / (2 pi t0)", "within", cm.mean, expected, 4.0 * cm.stderr_,
                                c.replicas, cm.stderr_));
  std::vector<double> all;
  for (const auto& d : durations) all.insert(all.end(), d.begin(), d.end());
  std::size_t above = 0;
  for (double t : all) above += t > 2.0 * c.t0;
  const double se_half = std::sqrt(0.25 / static_cast<double>(all.size()));
  const double frac = static_cast<double>(above) / static_cast<double>(all.size());
  r.checks.push_back(make_check("P(duration > 2 t0) = 1/2 (median 2 t0)", "within", frac, 0.5, 4.0 * se_half, c.replicas,
                                se_half));
  std::vector<double> sorted = all;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];

  // Conformal covariance under f(z) = 2z.
  const MassSpec mass = parse_mass_spec(c.masses.empty() ? "1" : c.masses.front());
  if (mass.kind != MassSpec::Kind::Constant) throw std::invalid_argument("brownian-sanity uses a constant mass");
  const ConformalMap f = ConformalMap::scaling(2.0);
  const MassFunction transported = mass_transport(mass.function(), f);
  const MassSpec image_mass = MassSpec::constant(transported(0.5, 0.5));

  BrownianSoupConfig a = base;
  a.mass = mass;
  a.seed = derive_key(c.seed, {kBrownianStream, 1});
  BrownianSoupConfig b = a;
  b.domain = domain.scaled(2.0);
  b.t0 = 4.0 * c.t0;
  b.h = 2.0 * c.h;
  b.mass = image_mass;
  b.seed = derive_key(c.seed, {kBrownianStream, 2});

  std::vector<std::vector<double>> da(c.replicas), db(c.replicas), diam_a(c.replicas), diam_b(c.replicas);
  std::vector<double> na(c.replicas), nb(c.replicas);
  parallel_for(c.replicas, [&](std::size_t i) {
    const BrownianSoup sa = sample_brownian_soup(a, i);
    for (const auto& l : sa.loops) {
      const BrownianLoop moved = conformal_transport(l, f);
      da[i].push_back(moved.duration);
      diam_a[i].push_back(loop_diameter(moved));
    }
    const BrownianSoup sb = sample_brownian_soup(b, i);
    for (const auto& l : sb.loops) {
      db[i].push_back(l.duration);
      diam_b[i].push_back(loop_diameter(l));
    }
    na[i] = static_cast<double>(sa.loops.size());
    nb[i] = static_cast<double>(sb.loops.size());
  });
  auto flat = [](const std::vector<std::vector<double>>& v) {
    std::vector<double> out;
    for (const auto& x : v) out.insert(out.end(), x.begin(), x.end());
    return out;
  };
  const KsResult ks = two_sample_ks(flat(da), flat(db));
  r.checks.push_back(make_check("conformal covariance f(z)=2z: duration KS p-value", "above", ks.p_value, 0.01, 0.0,
                                c.replicas));
  const KsResult ksd = two_sample_ks(flat(diam_a), flat(diam_b));
  r.checks.push_back(make_check("conformal covariance f(z)=2z: diameter KS p-value", "above", ksd.p_value, 0.01, 0.0,
                                c.replicas, 0.0, false));
  const MeanEstimate ma = mean_stderr(na), mb = mean_stderr(nb);
  const double se = std::hypot(ma.stderr_, mb.stderr_);
  r.checks.push_back(make_check("retained loop count, transported vs direct", "within", ma.mean, mb.mean, 4.0 * se,
                                c.replicas, se, false));
  r.checks.push_back(make_check("proposal intensity, transported vs direct (analytic)", "within",
                                a.expected_proposals(), b.expected_proposals(), 1e-12 * a.expected_proposals(), 1));
  r.details = {{"domain", domain.describe()},   {"lambda", lambda},           {"t0", c.t0},
               {"h", c.h},                      {"expected_count", expected}, {"duration_median", median},
               {"duration_ks", ks.statistic},   {"diameter_ks", ksd.statistic}, {"mass", mass.describe()},
               {"image_mass", image_mass.describe()}, {"image_t0", b.t0}};
  return r;
}

StatReport geometry_experiment(const RunConfig& c) {
  StatReport r;
  // Closed-form predictions.
  r.checks.push_back(make_check("h(0) = 2", "within", hausdorff_prediction(0.0), 2.0, 0.0, 1));
  r.checks.push_back(make_check("h(1) = 15/8", "within", hausdorff_prediction(1.0), 15.0 / 8.0, 0.0, 1));
  r.checks.push_back(make_check("h(1/2) = 187/96", "within", hausdorff_prediction(0.5), 187.0 / 96.0, 0.0, 1));
  const double target = hausdorff_prediction(0.5);

  // Box counting. At resolution eps only loops with duration >= kappa eps^2
  // are drawn, so each raster sees the structure above its own scale.
  const PlaneDomain square = parse_plane_domain(c.plane_domain);
  const Box frame = square.bounding_box();
  const Box window{frame.x0 + 0.25 * frame.width(), frame.y0 + 0.25 * frame.height(), frame.x0 + 0.75 * frame.width(),
                   frame.y0 + 0.75 * frame.height()};
  std::vector<double> eps = c.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const double eps_min = eps.back();
  const std::vector<double> kappas = {1.0, 0.5};
  constexpr std::size_t kCarpetReplicas = 40;
  nlohmann::json carpet = nlohmann::json::array();
  std::ostringstream carpet_csv;
  carpet_csv << "mass,kappa,replica,eps,count\n";
  std::uint64_t index = 0;
  for (const auto& ms : c.masses) {
    BrownianSoupConfig bc;
    bc.domain = square;
    bc.lambda = 0.5;
    bc.t0 = kappas.back() * eps_min * eps_min;
    bc.h = c.h;
    bc.mass = parse_mass_spec(ms);
    bc.seed = derive_key(c.seed, {kBrownianStream, 10, index++});
    std::vector<std::vector<std::vector<std::size_t>>> counts(kappas.size(),
                                                             std::vector<std::vector<std::size_t>>(kCarpetReplicas));
    parallel_for(kCarpetReplicas, [&](std::size_t i) {
      BrownianSoup soup = sample_brownian_soup(bc, i);
      std::vector<double> durations;
      for (const auto& l : soup.loops) durations.push_back(l.duration);
      const auto paths = paths_of(std::move(soup));
      for (std::size_t k = 0; k < kappas.size(); ++k) {
        for (double e : eps) {
          std::vector<std::vector<Point>> visible;
          for (std::size_t j = 0; j < paths.size(); ++j)
            if (durations[j] >= kappas[k] * e * e) visible.push_back(paths[j]);
          counts[k][i].push_back(carpet_count(visible, Raster(frame, e), window).carpet);
        }
      }
    });
    for (std::size_t k = 0; k < kappas.size(); ++k) {
      const DimensionEstimate est = carpet_dimension(counts[k], eps);
      const bool main = k == 0;
      r.checks.push_back(make_check("carpet box-count slope, lambda=0.5, m=" + ms + ", kappa=" + fmt(kappas[k]),
                                    "within", est.slope, target, 0.15, kCarpetReplicas, est.stderr_, main));
      carpet.push_back({{"mass", ms}, {"kappa", kappas[k]}, {"slope", est.slope}, {"stderr", est.stderr_},
                        {"used", est.used}, {"excluded", est.excluded}, {"mean_log_count", est.mean_log_count}});
      for (std::size_t i = 0; i < kCarpetReplicas; ++i)
        for (std::size_t e = 0; e < eps.size(); ++e)
          carpet_csv << ms << ',' << kappas[k] << ',' << i << ',' << eps[e] << ',' << counts[k][i][e] << '\n';
    }
  }
  r.details["carpet"] = {{"eps", eps}, {"window", {window.x0, window.y0, window.x1, window.y1}}, {"lambda", 0.5},
                         {"replicas", kCarpetReplicas}, {"h", c.h}, {"results", carpet}};
  r.tables["carpet"] = carpet_csv.str();

  // Diameter of the filled cluster of the centre point.
  constexpr double kTailEps = 0.05;
  constexpr double kTailSide = 6.0;
  const double tail_t0 = kTailEps * kTailEps;
  std::vector<double> L_grid;
  for (double L = 0.0; L <= kTailSide + 1e-9; L += 0.05) L_grid.push_back(L);
  nlohmann::json tails = nlohmann::json::object();
  std::vector<TailFit> fits;
  std::ostringstream tail_csv;
  tail_csv << "mass,L,survival\n";
  for (double m : {1.0, 2.0}) {
    BrownianSoupConfig bc;
    bc.domain = PlaneDomain::rectangle(0.0, 0.0, kTailSide, kTailSide);
    bc.lambda = 0.5;
    bc.t0 = tail_t0;
    bc.h = kTailEps / 2.0;
    bc.mass = MassSpec::constant(m);
    bc.seed = derive_key(c.seed, {kBrownianStream, 20, static_cast<std::uint64_t>(m)});
    std::vector<double> diam(c.replicas);
    std::vector<char> framed(c.replicas);
    parallel_for(c.replicas, [&](std::size_t i) {
      const auto paths = paths_of(sample_brownian_soup(bc, i));
      const Raster raster(bc.domain.bounding_box(), kTailEps);
      const ClusterSet set = build_clusters(paths, raster);
      const ClusterAt at = filled_cluster_at(set, raster, Point(kTailSide / 2, kTailSide / 2));
      diam[i] = at.diameter;
      framed[i] = at.touches_frame;
    });
    std::vector<double> kept;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < c.replicas; ++i) {
      if (framed[i]) {
        ++excluded;
        continue;
      }
      kept.push_back(diam[i]);
    }
    const TailFit fit = cluster_diameter_tail(kept, L_grid);
    fits.push_back(fit);
    r.checks.push_back(make_check("log-survival of cluster diameter decreasing, m=" + fmt(m), "within",
                                  fit.log_survival_decreasing ? 1.0 : 0.0, 1.0, 0.0, kept.size(), 0.0, m == 1.0));
    r.checks.push_back(make_check("fitted xi finite, m=" + fmt(m), "within", fit.defined ? 1.0 : 0.0, 1.0, 0.0,
                                  kept.size(), 0.0, m == 1.0));
    tails[fmt(m)] = {{"xi", fit.xi}, {"xi_stderr", fit.xi_stderr}, {"fit_points", fit.fit_points},
                     {"excluded_frame", excluded}, {"used", kept.size()}};
    for (std::size_t k = 0; k < fit.L.size(); ++k) tail_csv << m << ',' << fit.L[k] << ',' << fit.survival[k] << '\n';
  }
  const double dxi = fits[0].xi - fits[1].xi;
  const double se_xi = std::hypot(fits[0].xi_stderr, fits[1].xi_stderr);
  r.checks.push_back(make_check("xi(m=1) - xi(m=2) > 3 stderr", "above", dxi, 0.0, 3.0 * se_xi, c.replicas, se_xi));
  r.details["tail"] = {{"eps", kTailEps}, {"t0", tail_t0}, {"side", kTailSide}, {"lambda", 0.5}, {"fits", tails}};
  r.tables["tail"] = tail_csv.str();

  // Crossing of R_l = [0, 3l] x [0, l] by the vacant set, m = 1.
  constexpr double kCrossEps = 0.05;
  const double cross_t0 = kCrossEps * kCrossEps;
  struct CrossCase {
    double lambda;
    double l;
  };
  const std::vector<CrossCase> cases = {{0.5, 1.0}, {0.5, 3.0}, {0.5, 9.0}, {1.5, 3.0}};
  std::vector<MeanEstimate> probs;
  nlohmann::json crossing = nlohmann::json::array();
  std::uint64_t ci = 0;
  for (const CrossCase& cc : cases) {
    BrownianSoupConfig bc;
    bc.domain = PlaneDomain::rectangle(-1.0, -1.0, 3.0 * cc.l + 1.0, cc.l + 1.0);
    bc.lambda = cc.lambda;
    bc.t0 = cross_t0;
    bc.h = kCrossEps / 2.0;
    bc.mass = MassSpec::constant(1.0);
    bc.seed = derive_key(c.seed, {kBrownianStream, 30, ci++});
    const Box R{0.0, 0.0, 3.0 * cc.l, cc.l};
    std::vector<char> hit(c.replicas);
    parallel_for(c.replicas, [&](std::size_t i) {
      hit[i] = crossing_event(paths_of(sample_brownian_soup(bc, i)), R, kCrossEps);
    });
    const auto hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    probs.push_back(proportion(hits, c.replicas));
    crossing.push_back({{"lambda", cc.lambda}, {"l", cc.l}, {"p", probs.back().mean}, {"stderr", probs.back().stderr_}});
  }
  auto contrast = [&](std::size_t hi, std::size_t lo, const std::string& name, bool asserted) {
    const double d = probs[hi].mean - probs[lo].mean;
    const double se = std::hypot(probs[hi].stderr_, probs[lo].stderr_);
    r.checks.push_back(make_check(name, "above", d, 0.0, 3.0 * se, c.replicas, se, asserted));
  };
  contrast(2, 0, "crossing P(l=9) - P(l=1) > 3 stderr, lambda=0.5", true);
  contrast(1, 0, "crossing P(l=3) - P(l=1) > 3 stderr, lambda=0.5", false);
  contrast(2, 1, "crossing P(l=9) - P(l=3) > 3 stderr, lambda=0.5", false);
  contrast(1, 3, "crossing P(lambda=0.5) - P(lambda=1.5) > 3 stderr, l=3", true);
  r.details["crossing"] = {{"eps", kCrossEps}, {"t0", cross_t0}, {"mass", 1.0}, {"results", crossing}};
  return r;
}

}  // namespace loopsoup
