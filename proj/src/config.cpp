#include "loopsoup/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "loopsoup/brownian.hpp"
#include "loopsoup/lattice.hpp"
#include "loopsoup/mass.hpp"

namespace loopsoup {

void RunConfig::validate() const {
  if (version != kConfigVersion) throw std::invalid_argument("unsupported config version " + std::to_string(version));
  if (replicas == 0) throw std::invalid_argument("replicas must be positive");
  for (const auto& d : domains) build_domain(parse_domain_spec(d));
  if (!inner_domain.empty()) build_domain(parse_domain_spec(inner_domain));
  for (const auto& m : masses) parse_mass_spec(m);
  parse_plane_domain(plane_domain);
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (maxlen < 2 || maxlen % 2 != 0) throw std::invalid_argument("maxlen must be even and >= 2");
  if (!(t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  for (int n : N)
    if (n < 2) throw std::invalid_argument("N must be >= 2");
  for (double e : eps)
    if (!(e > 0.0)) throw std::invalid_argument("eps must be positive");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

RunConfig default_config(const std::string& experiment) {
  RunConfig c;
  c.experiment = experiment;
  if (experiment == "measure-oracle") {
    c.domains = {"rect:0,0,1,0", "rect:0,0,2,2"};
    c.masses = {"0", "0.5"};
    c.maxlen = 8;
    c.replicas = 1;
  } else if (experiment == "determinant-identity") {
    c.domains = {"rect:0,0,1,0", "rect:0,0,2,2"};
    c.masses = {"0"};
    c.maxlen = 12;
    c.replicas = 1;
  } else if (experiment == "poisson-sampling") {
    c.domains = {"rect:0,0,1,0"};
    c.lambdas = {1.0};
    c.maxlen = 8;
    c.replicas = 100000;
  } else if (experiment == "massive-thinning") {
    c.domains = {"rect:0,0,1,0", "rect:0,0,2,2"};
    c.masses = {"0.7071067811865476"};
    c.lambdas = {1.0};
    c.maxlen = 8;
    c.replicas = 100000;
  } else if (experiment == "laplace-identity") {
    c.domains = {"rect:0,0,2,2"};
    c.masses = {"0", "0.5"};
    c.maxlen = 40;
    c.replicas = 100000;
  } else if (experiment == "iso-covariance") {
    c.domains = {"sites:0,0", "rect:0,0,1,0", "rect:0,0,2,2"};
    c.masses = {"0"};
    c.maxlen = 40;
    c.replicas = 100000;
  } else if (experiment == "sign-exactness") {
    c.domains = {"rect:0,0,1,1", "rect:0,0,3,3"};
    c.masses = {"0"};
    c.maxlen = 40;
    c.replicas = 100000;
  } else if (experiment == "perturbation-coupling") {
    c.domains = {"rect:0,0,3,1"};
    c.inner_domain = "rect:0,0,1,1";
    c.x0 = "1,0";
    c.masses = {"0"};
    c.maxlen = 40;
    c.replicas = 100000;
  } else if (experiment == "brownian-sanity") {
    c.plane_domain = "rect:0,0,1,1";
    c.masses = {"1"};
    c.lambdas = {1.0};
    c.t0 = 0.01;
    c.h = 0.01;
    c.replicas = 4000;
  } else if (experiment == "geometry") {
    c.plane_domain = "rect:0,0,1,1";
    c.masses = {"0", "1"};
    c.lambdas = {0.5, 1.5};
    c.t0 = 4e-6;
    c.h = 0.002;
    c.eps = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    c.replicas = 500;
  } else if (experiment == "near-critical") {
    c.plane_domain = "rect:0,0,1,1";
    c.masses = {"1"};
    c.lambdas = {1.0};
    c.N = {8, 16, 32, 64};
    c.t0 = 0.1;
    c.threshold = 0.1;
    c.h = 0.005;
    c.replicas = 100000;
  } else if (experiment == "determinism") {
    c.domains = {"rect:0,0,1,0"};
    c.replicas = 2000;
  }
  return c;
}

namespace {

template <class T>
void take(const nlohmann::json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

const std::set<std::string> kKeys = {"version", "experiment", "domains", "masses", "inner_domain", "x0",
                                     "plane_domain", "lambdas", "maxlen", "t0", "h", "N", "threshold", "eps",
                                     "replicas", "seed", "workers", "out"};

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  std::string experiment;
  take(j, "experiment", experiment);
  RunConfig c = default_config(experiment);
  take(j, "version", c.version);
  take(j, "domains", c.domains);
  take(j, "masses", c.masses);
  take(j, "inner_domain", c.inner_domain);
  take(j, "x0", c.x0);
  take(j, "plane_domain", c.plane_domain);
  take(j, "lambdas", c.lambdas);
  take(j, "maxlen", c.maxlen);
  take(j, "t0", c.t0);
  take(j, "h", c.h);
  take(j, "N", c.N);
  take(j, "threshold", c.threshold);
  take(j, "eps", c.eps);
  take(j, "replicas", c.replicas);
  take(j, "seed", c.seed);
  take(j, "workers", c.workers);
  take(j, "out", c.out);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"version", c.version}, {"experiment", c.experiment}, {"domains", c.domains},
          {"masses", c.masses},   {"inner_domain", c.inner_domain}, {"x0", c.x0},
          {"plane_domain", c.plane_domain}, {"lambdas", c.lambdas}, {"maxlen", c.maxlen},
          {"t0", c.t0},           {"h", c.h},                   {"N", c.N},
          {"threshold", c.threshold}, {"eps", c.eps},           {"replicas", c.replicas},
          {"seed", c.seed}};
}

nlohmann::json to_json_full(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  j["workers"] = c.workers;
  j["out"] = c.out;
  return j;
}

}  // namespace loopsoup
