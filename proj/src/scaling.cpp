#include "loopsoup/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "loopsoup/brownian.hpp"
#include "loopsoup/soup_sampler.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

namespace {

const std::uint64_t kWalkTag = stream_tag("scaling-walk");
const std::uint64_t kPlaneTag = stream_tag("scaling-brownian");
const std::uint64_t kBootTag = stream_tag("scaling-bootstrap");

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

struct KsWithError {
  double statistic = 0.0;
  double p_value = 0.0;
  double stderr_ = 0.0;
};

KsWithError bootstrap_ks(const std::vector<double>& a, const std::vector<double>& b, std::size_t B, Xoshiro256& rng) {
  const KsResult base = two_sample_ks(a, b);
  std::vector<double> ra(a.size()), rb(b.size()), stats;
  for (std::size_t k = 0; k < B; ++k) {
    for (auto& v : ra) v = a[static_cast<std::size_t>(rng.uniform() * static_cast<double>(a.size()))];
    for (auto& v : rb) v = b[static_cast<std::size_t>(rng.uniform() * static_cast<double>(b.size()))];
    stats.push_back(two_sample_ks(ra, rb).statistic);
  }
  double se = 0.0;
  if (stats.size() > 1) se = mean_stderr(stats).stderr_ * std::sqrt(static_cast<double>(stats.size()));
  return {base.statistic, base.p_value, se};
}

std::string n_label(int N) { return "N=" + std::to_string(N); }

std::vector<double> per_replica_counts(const std::vector<std::size_t>& replica_of, std::size_t replicas) {
  std::vector<double> counts(replicas, 0.0);
  for (std::size_t r : replica_of) counts[r] += 1.0;
  return counts;
}

}  // namespace

void ScalingParams::validate() const {
  if (N.empty()) throw std::invalid_argument("empty N list");
  for (std::size_t i = 0; i < N.size(); ++i) {
    if (N[i] < 4) throw std::invalid_argument("N must be >= 4");
    if (i > 0 && N[i] <= N[i - 1]) throw std::invalid_argument("N list must be ascending");
    if (t0 < 4.0 / (static_cast<double>(N[i]) * N[i])) throw std::invalid_argument("t0 below 4/N^2 (sub-lattice durations)");
  }
  if (!(t_max > t0)) throw std::invalid_argument("t_max must exceed t0");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (m < 0.0 || c < 0.0) throw std::invalid_argument("negative mass");
  if (domain.shape() != PlaneDomain::Shape::Rectangle) throw std::invalid_argument("scaling runs use rectangles");
  if (replicas < 2) throw std::invalid_argument("need at least two replicas");
}

WalkSoupSample sample_rescaled_walk_soups(int N, const PlaneDomain& domain, double lambda, double t0, double t_max,
                                          std::size_t replicas, std::uint64_t seed) {
  if (t0 < 4.0 / (static_cast<double>(N) * N)) throw std::invalid_argument("t0 below 4/N^2 (sub-lattice durations)");
  if (domain.shape() != PlaneDomain::Shape::Rectangle) throw std::invalid_argument("rectangular domains only");
  const Box b = domain.bounding_box();
  // Sites strictly inside N D.
  auto lo = [&](double v) { return static_cast<int>(std::floor(v * N)) + 1; };
  auto hi = [&](double v) { return static_cast<int>(std::ceil(v * N)) - 1; };
  const LatticeDomain lattice = build_domain(RectangleSpec{lo(b.x0), lo(b.y0), hi(b.x1), hi(b.y1)});
  const double scale = 2.0 * N * N;
  int min_len = static_cast<int>(std::ceil(scale * t0 - 1e-9));
  min_len += min_len % 2;
  int max_len = static_cast<int>(std::floor(scale * t_max + 1e-9));
  max_len -= max_len % 2;
  const RestrictionSampler sampler(lattice, min_len, max_len);

  std::vector<std::vector<WalkLoopRecord>> per(replicas);
  parallel_for(replicas, [&](std::size_t i) {
    const LoopSoupRealization soup = sampler.sample(lambda, seed, i);
    for (const SoupLoop& l : soup.loops) {
      const RescaledLoop rl = rescale_loop(l.loop, N);
      per[i].push_back({static_cast<int>(l.loop.length()), rl.duration, diameter(rl.points), l.mark, i});
    }
  });
  WalkSoupSample out;
  out.N = N;
  out.replicas = replicas;
  for (auto& v : per) out.loops.insert(out.loops.end(), v.begin(), v.end());
  return out;
}

ScalingParams scaling_params(const RunConfig& c) {
  ScalingParams p;
  p.N = c.N;
  p.lambda = c.lambdas.front();
  const MassSpec mass = parse_mass_spec(c.masses.empty() ? "1" : c.masses.front());
  if (mass.kind != MassSpec::Kind::Constant) throw std::invalid_argument("scaling runs use a constant mass");
  p.m = mass.c0;
  p.c = mass.c0;
  p.domain = parse_plane_domain(c.plane_domain);
  p.t0 = c.threshold;
  p.h = c.h;
  p.replicas = c.replicas;
  p.seed = c.seed;
  return p;
}

namespace {

struct ScalingData {
  std::vector<WalkSoupSample> walks;
};

ScalingData walk_data(const ScalingParams& p) {
  ScalingData d;
  for (int N : p.N)
    d.walks.push_back(sample_rescaled_walk_soups(N, p.domain, p.lambda, p.t0, p.t_max, p.replicas,
                                                 derive_key(p.seed, {kWalkTag, static_cast<std::uint64_t>(N)})));
  return d;
}

void scaling_into(StatReport& r, const ScalingParams& p, const ScalingData& data) {
  // Massive Brownian reference.
  BrownianSoupConfig bc;
  bc.domain = p.domain;
  bc.lambda = p.lambda;
  bc.t0 = p.t0;
  bc.t_max = p.t_max;
  bc.h = p.h;
  bc.mass = MassSpec::constant(p.m);
  bc.seed = derive_key(p.seed, {kPlaneTag});
  std::vector<std::vector<double>> bd(p.replicas), bdiam(p.replicas);
  parallel_for(p.replicas, [&](std::size_t i) {
    for (const BrownianLoop& l : sample_brownian_soup(bc, i).loops) {
      bd[i].push_back(l.duration);
      bdiam[i].push_back(loop_diameter(l));
    }
  });
  std::vector<double> b_dur, b_diam, b_counts(p.replicas);
  for (std::size_t i = 0; i < p.replicas; ++i) {
    b_dur.insert(b_dur.end(), bd[i].begin(), bd[i].end());
    b_diam.insert(b_diam.end(), bdiam[i].begin(), bdiam[i].end());
    b_counts[i] = static_cast<double>(bd[i].size());
  }
  const MeanEstimate bm = mean_stderr(b_counts);

  std::vector<KsWithError> ks_dur, ks_diam;
  std::vector<MeanEstimate> counts;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "N,count_mean,count_stderr,brownian_count_mean,ks_duration,ks_duration_se,ks_diameter,ks_diameter_se\n";
  for (const WalkSoupSample& w : data.walks) {
    // Per-step mass m / (sqrt 2 N): exponent |loop| m^2 / (2 N^2) = m^2 duration.
    const double step = p.m * p.m / (2.0 * w.N * w.N);
    std::vector<double> dur, diam;
    std::vector<std::size_t> rep;
    for (const WalkLoopRecord& l : w.loops) {
      if (l.length * step > l.mark) continue;
      dur.push_back(l.duration);
      diam.push_back(l.diameter);
      rep.push_back(l.replica);
    }
    counts.push_back(mean_stderr(per_replica_counts(rep, w.replicas)));
    Xoshiro256 rng = make_stream(p.seed, {kBootTag, static_cast<std::uint64_t>(w.N)});
    ks_dur.push_back(bootstrap_ks(dur, b_dur, p.bootstrap, rng));
    ks_diam.push_back(bootstrap_ks(diam, b_diam, p.bootstrap, rng));
    rows.push_back({{"N", w.N},
                    {"loops", dur.size()},
                    {"count_mean", counts.back().mean},
                    {"count_stderr", counts.back().stderr_},
                    {"ks_duration", ks_dur.back().statistic},
                    {"ks_duration_stderr", ks_dur.back().stderr_},
                    {"ks_duration_p", ks_dur.back().p_value},
                    {"ks_diameter", ks_diam.back().statistic},
                    {"ks_diameter_stderr", ks_diam.back().stderr_},
                    {"ks_diameter_p", ks_diam.back().p_value}});
    csv << w.N << ',' << counts.back().mean << ',' << counts.back().stderr_ << ',' << bm.mean << ','
        << ks_dur.back().statistic << ',' << ks_dur.back().stderr_ << ',' << ks_diam.back().statistic << ','
        << ks_diam.back().stderr_ << '\n';
  }
  const std::size_t first = 0, last = data.walks.size() - 1;
  const std::string span = n_label(p.N[first]) + " vs " + n_label(p.N[last]);
  auto contrast = [&](const std::vector<KsWithError>& ks, const std::string& what) {
    const double d = ks[first].statistic - ks[last].statistic;
    const double se = std::hypot(ks[first].stderr_, ks[last].stderr_);
    r.checks.push_back(make_check(what + " KS statistic decreases, " + span, "above", d, 0.0, 3.0 * se, p.replicas, se));
  };
  contrast(ks_dur, "duration");
  contrast(ks_diam, "diameter");
  {
    const double d = std::abs(counts[first].mean - bm.mean) - std::abs(counts[last].mean - bm.mean);
    const double se = std::hypot(counts[first].stderr_, counts[last].stderr_);
    r.checks.push_back(make_check("loop count gap to Brownian mean shrinks, " + span, "above", d, 0.0, 3.0 * se,
                                  p.replicas, se, false));
  }
  r.details["scaling"] = {{"lambda", p.lambda},
                          {"m", p.m},
                          {"t0", p.t0},
                          {"t_max", p.t_max},
                          {"h", p.h},
                          {"domain", p.domain.describe()},
                          {"brownian_count_mean", bm.mean},
                          {"brownian_count_stderr", bm.stderr_},
                          {"brownian_loops", b_dur.size()},
                          {"bootstrap", p.bootstrap},
                          {"rows", rows}};
  r.tables["scaling"] = csv.str();
}

void dichotomy_into(StatReport& r, const ScalingParams& p, const ScalingData& data) {
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "alpha,N,loops,survival,stderr\n";
  for (double alpha : p.alphas) {
    std::vector<MeanEstimate> surv;
    for (const WalkSoupSample& w : data.walks) {
      const double mN = p.c * std::pow(static_cast<double>(w.N), -alpha);
      std::size_t kept = 0;
      for (const WalkLoopRecord& l : w.loops) kept += l.length * mN * mN <= l.mark;
      surv.push_back(proportion(kept, w.loops.size()));
      rows.push_back({{"alpha", alpha}, {"N", w.N}, {"loops", w.loops.size()}, {"survival", surv.back().mean},
                      {"stderr", surv.back().stderr_}});
      csv << alpha << ',' << w.N << ',' << w.loops.size() << ',' << surv.back().mean << ',' << surv.back().stderr_ << '\n';
    }
    const std::size_t first = 0, last = surv.size() - 1;
    const double se = std::hypot(surv[first].stderr_, surv[last].stderr_);
    const std::string span = n_label(p.N[first]) + " vs " + n_label(p.N[last]);
    std::ostringstream a;
    a << alpha;
    if (alpha > 1.0) {
      r.checks.push_back(make_check("alpha=" + a.str() + ": survival increases toward 1, " + span, "above",
                                    surv[last].mean - surv[first].mean, 0.0, 3.0 * se, p.replicas, se));
    } else if (alpha < 1.0) {
      r.checks.push_back(make_check("alpha=" + a.str() + ": survival decreases toward 0, " + span, "above",
                                    surv[first].mean - surv[last].mean, 0.0, 3.0 * se, p.replicas, se));
    } else {
      r.checks.push_back(make_check("alpha=1: survival change across " + span + " (reported)", "within",
                                    surv[last].mean - surv[first].mean, 0.0, 3.0 * se, p.replicas, se, false));
    }
  }
  r.details["dichotomy"] = {{"c", p.c}, {"threshold", p.t0}, {"lambda", p.lambda}, {"rows", rows}};
  r.tables["dichotomy"] = csv.str();
}

}  // namespace

StatReport scaling_comparison(const ScalingParams& p) {
  p.validate();
  StatReport r;
  scaling_into(r, p, walk_data(p));
  return r;
}

StatReport dichotomy_experiment(const ScalingParams& p) {
  p.validate();
  StatReport r;
  dichotomy_into(r, p, walk_data(p));
  return r;
}

StatReport near_critical_experiment(const RunConfig& c) {
  const ScalingParams p = scaling_params(c);
  p.validate();
  const ScalingData data = walk_data(p);
  StatReport r;
  dichotomy_into(r, p, data);
  scaling_into(r, p, data);
  return r;
}

}  // namespace loopsoup
