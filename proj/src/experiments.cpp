#include "loopsoup/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "loopsoup/gff.hpp"
#include "loopsoup/io.hpp"
#include "loopsoup/lattice.hpp"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/soup_sampler.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

bool Check::pass() const {
  if (!std::isfinite(estimate)) return false;
  if (rule == "within") return std::abs(estimate - target) <= tolerance;
  if (rule == "above") return estimate > target + tolerance;
  if (rule == "below") return estimate < target - tolerance;
  if (rule == "at_least") return estimate >= target - tolerance;
  if (rule == "at_most") return estimate <= target + tolerance;
  throw std::invalid_argument("unknown check rule " + rule);
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

nlohmann::json to_json(const Check& c) {
  return {{"name", c.name},         {"rule", c.rule},       {"estimate", number(c.estimate)},
          {"target", number(c.target)}, {"tolerance", number(c.tolerance)}, {"stderr", number(c.stderr_)},
          {"replicas", c.replicas}, {"asserted", c.asserted}, {"pass", c.pass()}};
}

Check check_from_json(const nlohmann::json& j) {
  Check c;
  c.name = j.at("name").get<std::string>();
  c.rule = j.at("rule").get<std::string>();
  c.estimate = number_from(j.at("estimate"));
  c.target = number_from(j.at("target"));
  c.tolerance = number_from(j.at("tolerance"));
  c.stderr_ = number_from(j.at("stderr"));
  c.replicas = j.at("replicas").get<std::size_t>();
  c.asserted = j.at("asserted").get<bool>();
  return c;
}

bool StatReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.pass(); });
}

nlohmann::json StatReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Check& c : checks) arr.push_back(loopsoup::to_json(c));
  return {{"experiment", experiment}, {"config", config}, {"checks", arr},
          {"details", details},       {"pass", passed()}, {"format_version", kFormatVersion}};
}

std::string StatReport::dump() const { return to_json().dump(2) + "\n"; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::exception_ptr error;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

const std::vector<std::pair<std::string, Experiment>>& experiment_registry() {
  static const std::vector<std::pair<std::string, Experiment>> registry = {
      {"measure-oracle", measure_oracle_experiment},
      {"determinant-identity", determinant_identity_experiment},
      {"poisson-sampling", poisson_sampling_experiment},
      {"massive-thinning", massive_thinning_experiment},
      {"laplace-identity", laplace_identity_experiment},
      {"iso-covariance", iso_covariance_experiment},
      {"sign-exactness", sign_exactness_experiment},
      {"perturbation-coupling", perturbation_coupling_experiment},
      {"brownian-sanity", brownian_sanity_experiment},
      {"geometry", geometry_experiment},
      {"near-critical", near_critical_experiment},
      {"determinism", determinism_experiment},
  };
  return registry;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : experiment_registry()) names.push_back(name);
  return names;
}

StatReport run_experiment(const RunConfig& config) {
  config.validate();
  for (const auto& [name, fn] : experiment_registry()) {
    if (name != config.experiment) continue;
    if (config.workers > 0) omp_set_num_threads(config.workers);
    StatReport report = fn(config);
    report.experiment = name;
    report.config = to_json(config);
    return report;
  }
  std::string list;
  for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown experiment '" + config.experiment + "'; available: " + list);
}

void write_report(const StatReport& report, const std::string& out_dir, double seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / report.experiment;
  write_file(base.string() + ".json", report.dump());
  for (const auto& [name, csv] : report.tables) write_file(base.string() + "_" + name + ".csv", csv);
  nlohmann::json timing = {{"experiment", report.experiment}, {"seconds", seconds}};
  write_file(base.string() + ".timing.json", timing.dump(2) + "\n");
}

namespace {

const std::uint64_t kSoupStream = stream_tag("experiment-soup");
const std::uint64_t kDressStream = stream_tag("experiment-dress");
const std::uint64_t kGffStream = stream_tag("experiment-gff");
const std::uint64_t kSignStream = stream_tag("experiment-signs");

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

LatticeDomain domain_of(const std::string& spec) { return build_domain(parse_domain_spec(spec)); }

KillingRates killing_of(const LatticeDomain& d, const std::string& mass) {
  return killing_from_mass(d, parse_mass_spec(mass).function());
}

std::string label(const std::string& domain, const std::string& mass) { return domain + " m=" + mass; }

// Largest |estimate - G| / stderr over the upper triangle.
struct CovarianceFit {
  double max_z = 0.0;
  double max_abs = 0.0;
};

CovarianceFit compare_covariance(const std::vector<std::vector<double>>& samples, const Eigen::MatrixXd& G) {
  const MomentMatrix mm = second_moments(samples);
  CovarianceFit fit;
  for (std::size_t i = 0; i < mm.dim; ++i)
    for (std::size_t j = i; j < mm.dim; ++j) {
      const double d = std::abs(mm.at(i, j) - G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      fit.max_abs = std::max(fit.max_abs, d);
      fit.max_z = std::max(fit.max_z, mm.se(i, j) > 0.0 ? d / mm.se(i, j) : (d > 0.0 ? INFINITY : 0.0));
    }
  return fit;
}

int sign_sweeps(const LatticeDomain& d, const Eigen::MatrixXd& G, std::uint64_t seed) {
  // Reference field at the mean occupation G_xx / 2.
  std::vector<double> L(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) L[i] = 0.5 * G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  SignSampler sampler(d.size(), ising_couplings(d, L));
  Xoshiro256 rng = make_stream(seed, {stream_tag("burn-in")});
  return sampler.calibrate_burn_in(rng, 10);
}

}  // namespace

StatReport measure_oracle_experiment(const RunConfig& c) {
  StatReport r;
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& ds : c.domains) {
    for (const auto& ms : c.masses) {
      const LatticeDomain D = domain_of(ds);
      const TransitionKernel P = transition_kernel(D, killing_of(D, ms));
      const auto loops = enumerate_loops(P, c.maxlen);
      const ReturnTable q = return_probabilities(P, c.maxlen);
      const std::size_t per = static_cast<std::size_t>(c.maxlen / 2);
      std::vector<double> rooted_sums(D.size() * per, 0.0);
      double max_rotation = 0.0;
      for (const WeightedLoop& w : loops) {
        double sum = 0.0;
        for (int s = 0; s < w.loop.rho(); ++s) {
          const RootedLoop rl = w.loop.rotation(static_cast<std::size_t>(s));
          const double rw = rooted_weight(rl, P);
          sum += rw;
          const std::size_t x = *D.index_of(rl.points.front());
          rooted_sums[x * per + w.loop.length() / 2 - 1] += rw;
        }
        max_rotation = std::max(max_rotation, std::abs(sum - w.weight));
      }
      double max_root = 0.0;
      for (std::size_t x = 0; x < D.size(); ++x)
        for (int len = 2; len <= c.maxlen; len += 2)
          max_root = std::max(max_root, std::abs(rooted_sums[x * per + static_cast<std::size_t>(len / 2 - 1)] -
                                                 q.rooted_mass(len, x)));
      r.checks.push_back(make_check("unrooted weight = rotation sum, " + label(ds, ms), "within", max_rotation, 0.0,
                                    1e-12, 1));
      r.checks.push_back(make_check("rooted sums = q/len per root and length, " + label(ds, ms), "within", max_root,
                                    0.0, 1e-12, 1));
      cases.push_back({{"domain", ds}, {"mass", ms}, {"loops", loops.size()}, {"maxlen", c.maxlen}});
    }
  }
  r.details["cases"] = cases;
  return r;
}

StatReport determinant_identity_experiment(const RunConfig& c) {
  StatReport r;
  // Two-site closed form.
  {
    const LatticeDomain D = domain_of("rect:0,0,1,0");
    const TransitionKernel P = transition_kernel(D, zero_killing(D));
    const double total = total_mass(P);
    r.checks.push_back(make_check("total mass two-site = ln(16/15)", "within", total, std::log(16.0 / 15.0), 1e-12, 1));
    const auto loops = enumerate_loops(P, 20);
    double sum = 0.0;
    for (const auto& w : loops) sum += w.weight;
    const double tail = truncation_tail(P, 20);
    r.checks.push_back(make_check("two-site enumeration + tail(20) = total mass", "within", sum + tail, total, 1e-12, 1));
    r.details["two_site"] = {{"total_mass", total}, {"enumerated_20", sum}, {"tail_20", tail}};
  }
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& ds : c.domains) {
    for (const auto& ms : c.masses) {
      const LatticeDomain D = domain_of(ds);
      const TransitionKernel P = transition_kernel(D, killing_of(D, ms));
      const double total = total_mass(P);
      const auto loops = enumerate_loops(P, c.maxlen);
      double sum = 0.0;
      for (const auto& w : loops) sum += w.weight;
      const double tail = truncation_tail(P, c.maxlen);
      r.checks.push_back(make_check("enumerated mass <= total mass, " + label(ds, ms), "at_most", sum, total, 1e-12, 1));
      r.checks.push_back(
          make_check("enumerated mass + tail bound >= total mass, " + label(ds, ms), "at_least", sum + tail, total, 1e-12, 1));
      // Same bracket from the return-probability tables at a longer cutoff.
      const int longer = std::max(c.maxlen, 100);
      const ReturnTable q = return_probabilities(P, longer);
      double qsum = 0.0;
      for (std::size_t x = 0; x < D.size(); ++x)
        for (int len = 2; len <= longer; len += 2) qsum += q.rooted_mass(len, x);
      const double qtail = truncation_tail(P, longer);
      r.checks.push_back(make_check("sum of q/len + tail = total mass, " + label(ds, ms), "within", qsum + qtail, total,
                                    1e-12, 1, 0.0, false));
      cases.push_back({{"domain", ds}, {"mass", ms}, {"total_mass", total}, {"enumerated", sum}, {"tail", tail},
                       {"maxlen", c.maxlen}, {"table_sum", qsum}, {"table_tail", qtail}, {"table_maxlen", longer}});
    }
  }
  r.details["cases"] = cases;
  return r;
}

StatReport poisson_sampling_experiment(const RunConfig& c) {
  StatReport r;
  const std::string ds = c.domains.empty() ? "rect:0,0,1,0" : c.domains.front();
  const double lambda = c.lambdas.front();
  const LatticeDomain D = domain_of(ds);
  const SoupSampler sampler(transition_kernel(D, zero_killing(D)), c.maxlen);
  const std::uint64_t seed = derive_key(c.seed, {kSoupStream});

  std::vector<long> short_counts(c.replicas), totals(c.replicas);
  parallel_for(c.replicas, [&](std::size_t i) {
    const auto soup = sampler.sample(lambda, seed, i);
    long k = 0;
    for (const auto& l : soup.loops) k += l.loop.length() == 2;
    short_counts[i] = k;
    totals[i] = static_cast<long>(soup.size());
  });

  double mean2 = 0.0;
  for (std::size_t x = 0; x < D.size(); ++x) mean2 += lambda * sampler.intensity(x, 2);
  const GofResult gof = poisson_gof(short_counts, mean2);
  r.checks.push_back(make_check("2-step loop counts: Poisson goodness-of-fit p-value", "above", gof.p_value, 0.01, 0.0,
                                c.replicas));
  std::vector<double> a(short_counts.begin(), short_counts.end()), b(totals.begin(), totals.end());
  const MeanEstimate m2 = mean_stderr(a);
  r.checks.push_back(make_check("2-step loop count mean", "within", m2.mean, mean2, 4.0 * m2.stderr_, c.replicas,
                                m2.stderr_));
  const MeanEstimate mt = mean_stderr(b);
  const double expected_total = lambda * sampler.total_intensity();
  r.checks.push_back(make_check("total loop count mean = lambda (total mass - tail)", "within", mt.mean, expected_total,
                                4.0 * mt.stderr_, c.replicas, mt.stderr_));
  const TransitionKernel& P = sampler.kernel();
  r.details = {{"domain", ds},
               {"lambda", lambda},
               {"maxlen", c.maxlen},
               {"tail_bound", truncation_tail(P, c.maxlen)},
               {"total_mass", total_mass(P)},
               {"chi_square", gof.statistic},
               {"dof", gof.dof},
               {"observed", gof.observed},
               {"expected", gof.expected}};
  return r;
}

StatReport massive_thinning_experiment(const RunConfig& c) {
  StatReport r;
  const MassSpec mass = parse_mass_spec(c.masses.empty() ? "0.7071067811865476" : c.masses.front());
  const MassFunction m = mass.function();
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& ds : c.domains) {
    const LatticeDomain D = domain_of(ds);
    const auto direct = intensity_table(transition_kernel(D, killing_from_mass(D, m)), c.maxlen);
    const auto thinned = thinned_intensity_table(D, m, c.maxlen);
    double diff = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i) diff = std::max(diff, std::abs(direct[i] - thinned[i]));
    r.checks.push_back(
        make_check("thinned critical intensities = massive intensities, " + ds, "within", diff, 0.0, 1e-12, 1));
    tables.push_back({{"domain", ds}, {"max_abs_difference", diff}});
  }

  // Empirical survival on the two-site domain.
  const LatticeDomain D = domain_of("rect:0,0,1,0");
  const SoupSampler sampler(transition_kernel(D, zero_killing(D)), c.maxlen);
  const double lambda = c.lambdas.front();
  const std::uint64_t seed = derive_key(c.seed, {kSoupStream});
  std::vector<long> before(c.replicas), after(c.replicas);
  parallel_for(c.replicas, [&](std::size_t i) {
    const auto soup = sampler.sample(lambda, seed, i);
    const auto thin = thin_to_massive(soup, D, m);
    long b = 0, a = 0;
    for (const auto& l : soup.loops) b += l.loop.length() == 2;
    for (const auto& l : thin.loops) a += l.loop.length() == 2;
    before[i] = b;
    after[i] = a;
  });
  long nb = 0, na = 0;
  for (std::size_t i = 0; i < c.replicas; ++i) {
    nb += before[i];
    na += after[i];
  }
  const double m2 = mass.c0 * mass.c0;
  const double target = std::exp(-2.0 * m2);
  const MeanEstimate surv = proportion(static_cast<std::size_t>(na), static_cast<std::size_t>(nb));
  const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(nb));
  r.checks.push_back(make_check("2-step loop survival = exp(-2 m^2)", "within", surv.mean, target, 4.0 * se, c.replicas, se));
  const double thinned_mean = lambda * (sampler.intensity(0, 2) + sampler.intensity(1, 2)) * target;
  const GofResult gof = poisson_gof(after, thinned_mean);
  r.checks.push_back(make_check("thinned 2-step counts: Poisson goodness-of-fit p-value", "above", gof.p_value, 0.01,
                                0.0, c.replicas, 0.0, false));
  r.details = {{"mass", mass.describe()}, {"m_squared", m2},  {"maxlen", c.maxlen},    {"loops_before", nb},
               {"loops_after", na},       {"tables", tables}, {"chi_square", gof.statistic}};
  return r;
}

StatReport laplace_identity_experiment(const RunConfig& c) {
  StatReport r;
  nlohmann::json cases = nlohmann::json::array();
  std::uint64_t index = 0;
  for (const auto& ds : c.domains) {
    for (const auto& ms : c.masses) {
      const LatticeDomain D = domain_of(ds);
      const KillingRates k = killing_of(D, ms);
      const SoupSampler sampler(transition_kernel(D, k), c.maxlen);
      const std::uint64_t seed = derive_key(c.seed, {kSoupStream, index});
      const std::uint64_t dress = derive_key(c.seed, {kDressStream, index});
      std::vector<OccupationField> fields(c.replicas);
      parallel_for(c.replicas, [&](std::size_t i) {
        fields[i] = occupation_field(sampler.sample(0.5, seed, i), D, dress);
      });
      const std::vector<double> v(D.size(), 1.0);
      const Estimate mc = laplace_mc(fields, v);
      const PrecisionMatrix A = precision_matrix(D, k);
      const double exact = laplace_exact(A, v);
      const double truncated = laplace_truncated(D, k, v, c.maxlen);
      const double bias = truncated - exact;
      r.checks.push_back(make_check("Laplace transform vs sqrt(det A / det(A + I)), " + label(ds, ms), "within", mc.value,
                                    exact, 3.0 * mc.stderr_ + std::abs(bias), c.replicas, mc.stderr_));

      // Gaussian side of the same identity.
      const Eigen::MatrixXd G = green_function(A);
      const GffSampler gff(G);
      std::vector<double> g(c.replicas);
      parallel_for(c.replicas, [&](std::size_t i) {
        Xoshiro256 rng = make_stream(c.seed, {kGffStream, index, i});
        const auto phi = gff.sample(rng).phi;
        double s = 0.0;
        for (double p : phi) s += 0.5 * p * p;
        g[i] = std::exp(-s);
      });
      const MeanEstimate ge = mean_stderr(g);
      r.checks.push_back(make_check("E exp(-phi^2/2) from GFF samples, " + label(ds, ms), "within", ge.mean, exact,
                                    3.0 * ge.stderr_, c.replicas, ge.stderr_, false));
      cases.push_back({{"domain", ds},
                       {"mass", ms},
                       {"exact", exact},
                       {"truncated_exact", truncated},
                       {"truncation_bias", bias},
                       {"tail_bound", truncation_tail(sampler.kernel(), c.maxlen)},
                       {"maxlen", c.maxlen},
                       {"mc", mc.value},
                       {"mc_stderr", mc.stderr_}});
      ++index;
    }
  }
  r.details["cases"] = cases;
  return r;
}

StatReport iso_covariance_experiment(const RunConfig& c) {
  StatReport r;
  nlohmann::json cases = nlohmann::json::array();
  std::uint64_t index = 0;
  for (const auto& ds : c.domains) {
    for (const auto& ms : c.masses) {
      const LatticeDomain D = domain_of(ds);
      const KillingRates k = killing_of(D, ms);
      const Eigen::MatrixXd G = green_function(precision_matrix(D, k));
      const SoupSampler sampler(transition_kernel(D, k), c.maxlen);
      const int sweeps = sign_sweeps(D, G, derive_key(c.seed, {index}));
      const std::uint64_t seed = derive_key(c.seed, {kSoupStream, index});
      const std::uint64_t dress = derive_key(c.seed, {kDressStream, index});
      const GffSampler gff(G);
      std::vector<std::vector<double>> psi(c.replicas), phi(c.replicas), L(c.replicas);
      parallel_for(c.replicas, [&](std::size_t i) {
        L[i] = occupation_field(sampler.sample(0.5, seed, i), D, dress).L;
        SignSampler signs(D.size(), ising_couplings(D, L[i]));
        Xoshiro256 rs = make_stream(c.seed, {kSignStream, index, i});
        psi[i] = isomorphism_field(L[i], signs.sample(rs, sweeps));
        Xoshiro256 rg = make_stream(c.seed, {kGffStream, index, i});
        phi[i] = gff.sample(rg).phi;
      });
      const CovarianceFit fit = compare_covariance(psi, G);
      r.checks.push_back(make_check("psi covariance vs G, max entrywise |z|, " + label(ds, ms), "at_most", fit.max_z, 3.0,
                                    0.0, c.replicas));
      double max_sq = 0.0, min_p = 1.0, max_ks_sq = 0.0;
      std::vector<double> site_p;
      for (std::size_t x = 0; x < D.size(); ++x) {
        std::vector<double> a(c.replicas), b(c.replicas), sq(c.replicas), twoL(c.replicas);
        for (std::size_t i = 0; i < c.replicas; ++i) {
          a[i] = psi[i][x];
          b[i] = phi[i][x];
          sq[i] = psi[i][x] * psi[i][x];
          twoL[i] = 2.0 * L[i][x];
          max_sq = std::max(max_sq, std::abs(sq[i] - twoL[i]) / twoL[i]);
          // Identical up to an ulp; compare on a 1e-9 grid so ties stay ties.
          sq[i] = std::nearbyint(sq[i] * 1e9);
          twoL[i] = std::nearbyint(twoL[i] * 1e9);
        }
        const KsResult ks = two_sample_ks(a, b);
        site_p.push_back(ks.p_value);
        min_p = std::min(min_p, ks.p_value);
        max_ks_sq = std::max(max_ks_sq, two_sample_ks(sq, twoL).statistic);
      }
      r.checks.push_back(make_check("psi^2 = 2L, max relative deviation, " + label(ds, ms), "at_most", max_sq, 0.0,
                                    1e-12, c.replicas));
      r.checks.push_back(make_check("KS statistic psi^2 vs 2L on a 1e-9 grid, " + label(ds, ms), "at_most", max_ks_sq,
                                    0.0, 0.0, c.replicas));
      r.checks.push_back(make_check("per-site KS psi vs GFF, min p-value, " + label(ds, ms), "above", min_p, 0.01, 0.0,
                                    c.replicas));
      const CovarianceFit gfit = compare_covariance(phi, G);
      cases.push_back({{"domain", ds},
                       {"mass", ms},
                       {"sweeps", sweeps},
                       {"max_abs_cov_error", fit.max_abs},
                       {"max_z", fit.max_z},
                       {"gff_max_z", gfit.max_z},
                       {"ks_p_values", site_p},
                       {"maxlen", c.maxlen},
                       {"tail_bound", truncation_tail(sampler.kernel(), c.maxlen)}});
      ++index;
    }
  }
  r.details["cases"] = cases;
  return r;
}

StatReport sign_exactness_experiment(const RunConfig& c) {
  StatReport r;
  nlohmann::json cases = nlohmann::json::array();
  std::uint64_t index = 0;
  for (const auto& ds : c.domains) {
    const LatticeDomain D = domain_of(ds);
    if (D.size() > kExactSignLimit) throw std::invalid_argument("sign-exactness needs domains with <= 16 sites");
    const std::string ms = c.masses.empty() ? "0" : c.masses.front();
    const KillingRates k = killing_of(D, ms);
    const SoupSampler sampler(transition_kernel(D, k), c.maxlen);
    const auto sampled = occupation_field(sampler.sample(0.5, derive_key(c.seed, {kSoupStream, index}), 0), D,
                                          derive_key(c.seed, {kDressStream, index}));
    // The sampled field and a stronger-coupled version of it.
    for (double scale : {1.0, 6.0}) {
      std::vector<double> L = sampled.L;
      for (double& v : L) v *= scale;
      const auto couplings = ising_couplings(D, L);
      const ExactSignLaw exact(D.size(), couplings);
      const SignSampler mcmc(D.size(), couplings);
      Xoshiro256 cal = make_stream(c.seed, {stream_tag("burn-in"), index});
      const int sweeps = mcmc.calibrate_burn_in(cal, 10);
      std::vector<std::uint32_t> configs(c.replicas);
      parallel_for(c.replicas, [&](std::size_t i) {
        Xoshiro256 rng = make_stream(c.seed, {kSignStream, index, i});
        const SignField S = mcmc.sample(rng, sweeps);
        std::uint32_t code = 0;
        for (std::size_t x = 0; x < S.S.size(); ++x)
          if (S.S[x] > 0) code |= 1U << x;
        configs[i] = code;
      });
      const double n = static_cast<double>(c.replicas);
      std::vector<double> freq(exact.probabilities().size(), 0.0);
      for (std::uint32_t code : configs) freq[code] += 1.0 / n;
      double tv = 0.0;
      for (std::size_t cc = 0; cc < freq.size(); ++cc) tv += 0.5 * std::abs(freq[cc] - exact.probabilities()[cc]);
      double max_marginal = 0.0;
      for (std::size_t x = 0; x < D.size(); ++x) {
        double plus = 0.0;
        for (std::size_t cc = 0; cc < freq.size(); ++cc)
          if ((cc >> x) & 1U) plus += freq[cc];
        max_marginal = std::max(max_marginal, std::abs(plus - exact.prob_plus(x)));
      }
      for (const Coupling& cp : couplings) {
        double eq = 0.0;
        for (std::size_t cc = 0; cc < freq.size(); ++cc)
          if (((cc >> cp.a) & 1U) == ((cc >> cp.b) & 1U)) eq += freq[cc];
        max_marginal = std::max(max_marginal, std::abs(eq - exact.prob_equal(cp.a, cp.b)));
      }
      std::ostringstream name;
      name << ds << " coupling scale " << scale;
      r.checks.push_back(make_check("site and neighbour-pair marginals, max TV, " + name.str(), "at_most", max_marginal,
                                    0.01, 0.0, c.replicas));
      r.checks.push_back(make_check("full configuration TV, " + name.str(), "at_most", tv, 0.01, 0.0, c.replicas, 0.0,
                                    D.size() <= 4));
      double maxJ = 0.0;
      for (const Coupling& cp : couplings) maxJ = std::max(maxJ, cp.J);
      cases.push_back({{"domain", ds}, {"scale", scale}, {"sweeps", sweeps}, {"max_coupling", maxJ},
                       {"max_marginal_tv", max_marginal}, {"config_tv", tv}});
      ++index;
    }
  }
  r.details["cases"] = cases;
  return r;
}

StatReport perturbation_coupling_experiment(const RunConfig& c) {
  StatReport r;
  const LatticeDomain D = domain_of(c.domains.front());
  const LatticeDomain Dp = domain_of(c.inner_domain);
  Site x0{};
  {
    const auto s = parse_domain_spec("sites:" + c.x0);
    x0 = std::get<SiteListSpec>(s).sites.at(0);
  }
  const std::string ms = c.masses.empty() ? "0" : c.masses.front();
  const MassFunction m = parse_mass_spec(ms).function();
  const Eigen::MatrixXd G = green_function(precision_matrix(D, killing_from_mass(D, m)));
  const Eigen::MatrixXd Gp = green_function(precision_matrix(Dp, killing_from_mass(Dp, m)));
  const int sweeps = sign_sweeps(D, G, c.seed);
  const PerturbationCoupling coupling(D, Dp, x0, m, c.maxlen, sweeps);

  std::vector<std::vector<double>> phi(c.replicas), phip(c.replicas);
  std::vector<char> touched(c.replicas), event(c.replicas);
  parallel_for(c.replicas, [&](std::size_t i) {
    PerturbationDraw d = coupling.draw(c.seed, i);
    phi[i] = std::move(d.phi);
    phip[i] = std::move(d.phi_prime);
    touched[i] = d.touched;
    event[i] = coupling.loop_event(c.seed, i);
  });
  std::size_t mismatches = 0, flags = 0, events = 0, inconsistent = 0;
  for (std::size_t i = 0; i < c.replicas; ++i) {
    const bool differ = phi[i][coupling.x0_outer()] != phip[i][coupling.x0_inner()];
    mismatches += differ;
    flags += touched[i] != 0;
    events += event[i] != 0;
    inconsistent += differ != (touched[i] != 0);
  }
  const MeanEstimate pc = proportion(mismatches, c.replicas);
  const MeanEstimate ps = proportion(events, c.replicas);
  const double se = std::hypot(pc.stderr_, ps.stderr_);
  r.checks.push_back(make_check("P(phi_x0 != phi'_x0) vs independent loop estimate", "within", pc.mean, ps.mean,
                                3.0 * se, c.replicas, se));
  r.checks.push_back(make_check("replicas where mismatch and flag disagree", "within",
                                static_cast<double>(inconsistent), 0.0, 0.0, c.replicas));
  const CovarianceFit f = compare_covariance(phi, G);
  const CovarianceFit fp = compare_covariance(phip, Gp);
  r.checks.push_back(make_check("phi covariance vs G_D, max |z|", "at_most", f.max_z, 3.0, 0.0, c.replicas));
  r.checks.push_back(make_check("phi' covariance vs G_D', max |z|", "at_most", fp.max_z, 3.0, 0.0, c.replicas));
  const double analytic = coupling.event_probability();
  r.checks.push_back(make_check("P(flag) vs determinant formula", "within", pc.mean, analytic, 3.0 * pc.stderr_,
                                c.replicas, pc.stderr_, false));
  r.details = {{"outer", c.domains.front()},
               {"inner", c.inner_domain},
               {"x0", c.x0},
               {"mass", ms},
               {"sweeps", sweeps},
               {"maxlen", c.maxlen},
               {"p_coupling", pc.mean},
               {"p_loop_estimate", ps.mean},
               {"p_analytic", analytic},
               {"flags", flags}};
  return r;
}

StatReport determinism_experiment(const RunConfig& c) {
  StatReport r;
  // Small versions of three sampling experiments, each at 1 and 3 workers and twice at 1.
  const std::vector<std::string> names = {"poisson-sampling", "iso-covariance", "perturbation-coupling"};
  nlohmann::json runs = nlohmann::json::array();
  const int saved = omp_get_max_threads();
  for (const auto& name : names) {
    RunConfig base = default_config(name);
    base.seed = c.seed;
    base.replicas = c.replicas;
    if (name == "iso-covariance") base.domains = {"rect:0,0,1,0"};
    std::vector<std::string> dumps;
    for (int workers : {1, 3, 1}) {
      omp_set_num_threads(workers);
      RunConfig cfg = base;
      cfg.workers = workers;
      StatReport sub;
      for (const auto& [n, fn] : experiment_registry())
        if (n == name) sub = fn(cfg);
      sub.experiment = name;
      sub.config = to_json(cfg);
      dumps.push_back(sub.dump());
    }
    const bool same = dumps[0] == dumps[1] && dumps[0] == dumps[2];
    r.checks.push_back(make_check("byte-identical reports at 1 and 3 workers, " + name, "within", same ? 1.0 : 0.0, 1.0,
                                  0.0, c.replicas));
    runs.push_back({{"experiment", name}, {"bytes", dumps[0].size()}});
  }
  omp_set_num_threads(saved);
  r.details["runs"] = runs;
  return r;
}

}  // namespace loopsoup
