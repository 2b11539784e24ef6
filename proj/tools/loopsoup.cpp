// loopsoup: sample loop soups, derived fields and geometry, and run the checks.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "loopsoup/brownian.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/geometry.hpp"
#include "loopsoup/io.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/scaling.hpp"
#include "loopsoup/soup_sampler.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<int> workers;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--replicas", c.replicas, "number of replicas");
  app->add_option("--workers", c.workers, "OpenMP threads (0 = runtime default)");
  app->add_option("--out", c.out, "output path");
}

RunConfig resolve(const Common& c, const std::string& experiment) {
  RunConfig rc = c.config.empty() ? default_config(experiment) : load_config(c.config);
  if (c.seed) rc.seed = *c.seed;
  if (c.replicas) rc.replicas = *c.replicas;
  if (c.workers) rc.workers = *c.workers;
  if (!c.out.empty()) rc.out = c.out;
  rc.validate();
  if (rc.workers > 0) omp_set_num_threads(rc.workers);
  return rc;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

std::string first_or(const std::vector<std::string>& v, const std::string& fallback) {
  return v.empty() ? fallback : v.front();
}

void print_checks(const StatReport& r) {
  for (const Check& c : r.checks) {
    std::printf("%-5s %s%s: estimate %.6g, target %.6g, tol %.3g\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(),
                c.asserted ? "" : " [reported]", c.estimate, c.target, c.tolerance);
  }
}

int finish(StatReport r, const RunConfig& rc, double seconds) {
  if (r.experiment.empty()) r.experiment = rc.experiment;
  if (r.config.is_null()) r.config = to_json(rc);
  if (!rc.out.empty()) write_report(r, rc.out, seconds);
  print_checks(r);
  return r.passed() ? 0 : 1;
}

double since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

BrownianSoupConfig brownian_config(const RunConfig& rc) {
  BrownianSoupConfig bc;
  bc.domain = parse_plane_domain(rc.plane_domain);
  bc.lambda = rc.lambdas.front();
  bc.t0 = rc.t0;
  bc.h = rc.h;
  bc.mass = parse_mass_spec(first_or(rc.masses, "0"));
  bc.seed = rc.seed;
  bc.validate();
  return bc;
}

std::vector<std::vector<Point>> paths(const BrownianSoup& s) {
  std::vector<std::vector<Point>> out;
  for (const auto& l : s.loops) out.push_back(l.path);
  return out;
}

int cmd_sample_soup(const Common& opt) {
  const RunConfig rc = resolve(opt, "poisson-sampling");
  const std::string dspec = first_or(rc.domains, "rect:0,0,1,0");
  const std::string mspec = first_or(rc.masses, "0");
  const LatticeDomain d = build_domain(parse_domain_spec(dspec));
  const MassSpec mass = parse_mass_spec(mspec);
  const SoupSampler sampler(transition_kernel(d, zero_killing(d)), rc.maxlen);
  json soups = json::array();
  for (std::size_t i = 0; i < rc.replicas; ++i) {
    LoopSoupRealization s = sampler.sample(rc.lambdas.front(), rc.seed, i);
    if (!mass.is_zero()) s = thin_to_massive(s, d, mass.function());
    soups.push_back(soup_to_json(s, dspec, mspec));
  }
  emit(rc.out, (rc.replicas == 1 ? soups.front() : json{{"soups", soups}}).dump() + "\n");
  return 0;
}

int cmd_brownian_soup(const Common& opt) {
  const RunConfig rc = resolve(opt, "brownian-sanity");
  const BrownianSoupConfig bc = brownian_config(rc);
  json soups = json::array();
  for (std::size_t i = 0; i < rc.replicas; ++i) soups.push_back(brownian_soup_to_json(sample_brownian_soup(bc, i), bc));
  emit(rc.out, (rc.replicas == 1 ? soups.front() : json{{"soups", soups}}).dump() + "\n");
  return 0;
}

int cmd_occupation(const std::string& soup_path, const std::string& out, std::uint64_t seed) {
  const json j = json::parse(read_file(soup_path));
  std::vector<json> docs;
  if (j.contains("soups"))
    for (const auto& s : j.at("soups")) docs.push_back(s);
  else
    docs.push_back(j);
  std::vector<OccupationField> fields;
  std::optional<LatticeDomain> domain;
  for (const auto& doc : docs) {
    const LatticeDomain d = build_domain(parse_domain_spec(doc.at("domain").get<std::string>()));
    const LoopSoupRealization soup = soup_from_json(doc);
    fields.push_back(occupation_field(soup, d, seed));
    domain = d;
  }
  const bool csv = out.size() >= 4 && out.substr(out.size() - 4) == ".csv";
  if (csv || out.empty() || out == "-") {
    if (fields.size() != 1) throw std::invalid_argument("CSV output takes a single soup; use a binary path");
    std::ostringstream s;
    write_field_csv(s, *domain, fields.front());
    emit(out, s.str());
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + out);
    write_fields_binary(f, fields);
  }
  return 0;
}

int cmd_gff_verify(Common opt, const std::string& domain, const std::string& mass) {
  const auto t = std::chrono::steady_clock::now();
  RunConfig rc = resolve(opt, "iso-covariance");
  if (!domain.empty()) rc.domains = {domain};
  if (!mass.empty()) rc.masses = {mass};
  rc.validate();
  StatReport r = run_experiment(rc);
  std::cout << r.dump();
  return finish(std::move(r), rc, since(t));
}

int cmd_clusters(const Common& opt) {
  RunConfig rc = resolve(opt, "geometry");
  const BrownianSoupConfig bc = brownian_config(rc);
  const double eps = rc.eps.empty() ? 0.01 : rc.eps.back();
  const Raster raster(bc.domain.bounding_box(), eps);
  std::ostringstream csv;
  csv << "replica,id,size,diameter,filled_area,touches_frame\n";
  for (std::size_t i = 0; i < rc.replicas; ++i) {
    const ClusterSet set = build_clusters(paths(sample_brownian_soup(bc, i)), raster);
    for (std::size_t k = 0; k < set.clusters.size(); ++k) {
      const Cluster& cl = set.clusters[k];
      const double area = static_cast<double>(fill_cluster(cl, raster).size()) * eps * eps;
      csv << i << ',' << k << ',' << cl.loops.size() << ',' << cl.diameter << ',' << area << ',' << cl.touches_frame
          << '\n';
    }
  }
  emit(rc.out, csv.str());
  return 0;
}

int cmd_carpet_dim(const Common& opt, double kappa) {
  const auto t = std::chrono::steady_clock::now();
  RunConfig rc = resolve(opt, "geometry");
  std::vector<double> eps = rc.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  BrownianSoupConfig bc = brownian_config(rc);
  bc.t0 = std::min(bc.t0, kappa * eps.back() * eps.back());
  const Box frame = bc.domain.bounding_box();
  const Box window{frame.x0 + 0.25 * frame.width(), frame.y0 + 0.25 * frame.height(), frame.x0 + 0.75 * frame.width(),
                   frame.y0 + 0.75 * frame.height()};
  std::vector<std::vector<std::size_t>> counts(rc.replicas);
  parallel_for(rc.replicas, [&](std::size_t i) {
    const BrownianSoup soup = sample_brownian_soup(bc, i);
    for (double e : eps) {
      std::vector<std::vector<Point>> visible;
      for (const auto& l : soup.loops)
        if (l.duration >= kappa * e * e) visible.push_back(l.path);
      counts[i].push_back(carpet_count(visible, Raster(frame, e), window).carpet);
    }
  });
  const DimensionEstimate est = carpet_dimension(counts, eps);
  StatReport r;
  r.experiment = "carpet-dim";
  r.config = to_json(rc);
  Check ch;
  ch.name = "carpet box-count slope vs h(lambda)";
  ch.estimate = est.slope;
  ch.target = rc.lambdas.front() <= 1.0 ? hausdorff_prediction(rc.lambdas.front()) : 0.0;
  ch.tolerance = 0.15;
  ch.stderr_ = est.stderr_;
  ch.replicas = rc.replicas;
  ch.asserted = rc.lambdas.front() <= 1.0;
  r.checks.push_back(ch);
  r.details = {{"kappa", kappa}, {"eps", eps}, {"mean_log_count", est.mean_log_count}, {"used", est.used},
               {"excluded", est.excluded}};
  std::ostringstream csv;
  csv << "replica,eps,count\n";
  for (std::size_t i = 0; i < rc.replicas; ++i)
    for (std::size_t e = 0; e < eps.size(); ++e) csv << i << ',' << eps[e] << ',' << counts[i][e] << '\n';
  r.tables["counts"] = csv.str();
  return finish(std::move(r), rc, since(t));
}

int cmd_crossing(const Common& opt, double l) {
  RunConfig rc = resolve(opt, "geometry");
  BrownianSoupConfig bc = brownian_config(rc);
  const double eps = rc.eps.empty() ? 0.05 : rc.eps.front();
  bc.domain = PlaneDomain::rectangle(-1.0, -1.0, 3.0 * l + 1.0, l + 1.0);
  const Box R{0.0, 0.0, 3.0 * l, l};
  std::vector<char> hit(rc.replicas);
  parallel_for(rc.replicas, [&](std::size_t i) { hit[i] = crossing_event(paths(sample_brownian_soup(bc, i)), R, eps); });
  std::size_t hits = 0;
  for (char h : hit) hits += h;
  const MeanEstimate p = proportion(hits, rc.replicas);
  const json out = {{"lambda", bc.lambda}, {"mass", bc.mass.describe()}, {"l", l}, {"eps", eps}, {"t0", bc.t0},
                    {"replicas", rc.replicas}, {"probability", p.mean}, {"stderr", p.stderr_}};
  emit(rc.out, out.dump(2) + "\n");
  return 0;
}

int run_named(const Common& opt, const std::string& experiment) {
  const auto t = std::chrono::steady_clock::now();
  const RunConfig rc = resolve(opt, experiment);
  StatReport r = run_experiment(rc);
  return finish(std::move(r), rc, since(t));
}

int cmd_scaling(const Common& opt, bool dichotomy) {
  const auto t = std::chrono::steady_clock::now();
  RunConfig rc = resolve(opt, "near-critical");
  const ScalingParams p = scaling_params(rc);
  StatReport r = dichotomy ? dichotomy_experiment(p) : scaling_comparison(p);
  r.experiment = dichotomy ? "dichotomy" : "scaling";
  return finish(std::move(r), rc, since(t));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-walk and Brownian loop soups"};
  app.require_subcommand(1);
  Common opt;
  std::string soup_path, domain, mass, experiment;
  double kappa = 1.0, l = 3.0;

  auto* sample = app.add_subcommand("sample-soup", "sample lattice loop soups to JSON");
  auto* brown = app.add_subcommand("brownian-soup", "sample Brownian loop soups to JSON");
  auto* occ = app.add_subcommand("occupation", "occupation fields of a dumped soup");
  auto* gff = app.add_subcommand("gff-verify", "isomorphism covariance and KS checks");
  auto* clusters = app.add_subcommand("clusters", "per-cluster table of Brownian soups");
  auto* carpet = app.add_subcommand("carpet-dim", "box-count slope of the carpet");
  auto* crossing = app.add_subcommand("crossing", "vacant-set crossing probability of [0,3l]x[0,l]");
  auto* laplace = app.add_subcommand("laplace", "occupation-field Laplace transform check");
  auto* scaling = app.add_subcommand("scaling", "random walk vs Brownian soups as N grows");
  auto* dich = app.add_subcommand("dichotomy", "survival under mass c N^-alpha");
  auto* report = app.add_subcommand("report", "run a registered experiment and write its report");
  for (auto* s : {sample, brown, occ, gff, clusters, carpet, crossing, laplace, scaling, dich, report}) add_common(s, opt);
  occ->add_option("--soup", soup_path, "soup JSON from sample-soup")->required();
  gff->add_option("--domain", domain, "lattice domain spec");
  gff->add_option("--mass", mass, "mass spec");
  carpet->add_option("--kappa", kappa, "draw loops with duration >= kappa eps^2 at resolution eps");
  crossing->add_option("--l", l, "rectangle height");
  report->add_option("--experiment", experiment, "experiment name, or 'all'");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sample) return cmd_sample_soup(opt);
    if (*brown) return cmd_brownian_soup(opt);
    if (*occ) return cmd_occupation(soup_path, opt.out, opt.seed.value_or(RunConfig{}.seed));
    if (*gff) return cmd_gff_verify(opt, domain, mass);
    if (*clusters) return cmd_clusters(opt);
    if (*carpet) return cmd_carpet_dim(opt, kappa);
    if (*crossing) return cmd_crossing(opt, l);
    if (*laplace) return run_named(opt, "laplace-identity");
    if (*scaling) return cmd_scaling(opt, false);
    if (*dich) return cmd_scaling(opt, true);
    if (*report) {
      if (experiment.empty() && opt.config.empty()) throw std::invalid_argument("report needs --experiment or --config");
      if (experiment == "all") {
        if (!opt.config.empty()) throw std::invalid_argument("'all' runs the default configurations; drop --config");
        int status = 0;
        for (const auto& name : experiment_names()) {
          std::printf("== %s\n", name.c_str());
          status |= run_named(opt, name);
        }
        return status;
      }
      if (experiment.empty()) experiment = load_config(opt.config).experiment;
      return run_named(opt, experiment);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "loopsoup: %s\n", e.what());
    return 2;
  }
  return 0;
}
