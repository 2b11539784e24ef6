#include <cmath>

#include "doctest.h"
#include "loopsoup/gff.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

namespace {

LatticeDomain dom(const std::string& s) { return build_domain(parse_domain_spec(s)); }

}  // namespace

TEST_CASE("GFF sampler covariance on two sites") {
  const auto d = dom("rect:0,0,1,0");
  const Eigen::MatrixXd G = green_function(precision_matrix(d, zero_killing(d)));
  const GffSampler s(G);
  Xoshiro256 rng(4);
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 50000; ++i) xs.push_back(s.sample(rng).phi);
  const MomentMatrix M = second_moments(xs);
  CHECK(std::abs(M.at(0, 0) - 4.0 / 15.0) < 4.0 * M.se(0, 0));
  CHECK(std::abs(M.at(0, 1) - 1.0 / 15.0) < 4.0 * M.se(0, 1));
  CHECK(std::abs(M.at(1, 1) - 4.0 / 15.0) < 4.0 * M.se(1, 1));

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS(GffSampler{bad});
}

TEST_CASE("Ising couplings J = 2 sqrt(L_x L_y)") {
  const auto d = dom("rect:0,0,1,1");
  const std::vector<double> L{1.0, 4.0, 0.25, 9.0};
  const auto c = ising_couplings(d, L);
  CHECK(c.size() == 4);
  for (const Coupling& e : c) CHECK(e.J == doctest::Approx(2.0 * std::sqrt(L[e.a] * L[e.b])));
  const std::vector<double> bad{1.0, 0.0, 1.0, 1.0};
  CHECK_THROWS(ising_couplings(d, bad));
}

TEST_CASE("exact sign law on two sites") {
  const double J = 0.7;
  const std::vector<Coupling> c{{0, 1, J}};
  const ExactSignLaw law(2, c);
  CHECK(law.prob_equal(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * J))));
  CHECK(law.prob_plus(0) == doctest::Approx(0.5));
  double total = 0.0;
  for (double p : law.probabilities()) total += p;
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS(ExactSignLaw(17, {}));
}

TEST_CASE("property: MCMC sign samplers agree with exhaustive enumeration") {
  Xoshiro256 rng(21);
  const auto d = dom("rect:0,0,2,1");
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> L(d.size());
    for (auto& v : L) v = 0.05 + rng.uniform() * 0.5;
    const auto c = ising_couplings(d, L);
    const ExactSignLaw law(d.size(), c);
    for (SignMethod method : {SignMethod::SwendsenWang, SignMethod::HeatBath}) {
      const SignSampler s(d.size(), c, method);
      const int sweeps = s.calibrate_burn_in(rng);
      CHECK(sweeps >= 8);
      const int n = 20000;
      std::vector<double> eq(c.size(), 0.0);
      for (int i = 0; i < n; ++i) {
        const SignField f = s.sample(rng, sweeps);
        for (std::size_t e = 0; e < c.size(); ++e) eq[e] += f.S[c[e].a] == f.S[c[e].b];
      }
      for (std::size_t e = 0; e < c.size(); ++e) {
        const double p = law.prob_equal(c[e].a, c[e].b);
        CHECK(std::abs(eq[e] / n - p) < 4.0 * std::sqrt(p * (1 - p) / n) + 1e-3);
      }
    }
  }
}

TEST_CASE("isomorphism field") {
  const std::vector<double> L{0.5, 2.0};
  const SignField S{{1, -1}};
  const auto psi = isomorphism_field(L, S);
  CHECK(psi[0] == doctest::Approx(1.0));
  CHECK(psi[1] == doctest::Approx(-2.0));
}

TEST_CASE("perturbation coupling: x0 must lie in both domains, fields are reproducible") {
  const auto D = dom("rect:0,0,3,1"), Dp = dom("rect:0,0,1,1");
  const auto m = [](double, double) { return 0.0; };
  CHECK_THROWS(PerturbationCoupling(D, Dp, Site{3, 0}, m, 20, 10));
  const PerturbationCoupling pc(D, Dp, Site{1, 0}, m, 20, 10);
  const auto a = pc.draw(5, 1), b = pc.draw(5, 1);
  CHECK(a.phi == b.phi);
  CHECK(a.phi_prime == b.phi_prime);
  CHECK(a.phi.size() == D.size());
  CHECK(a.phi_prime.size() == Dp.size());
  if (!a.touched) CHECK(a.phi[pc.x0_outer()] == doctest::Approx(a.phi_prime[pc.x0_inner()]));
  CHECK(pc.event_probability() > 0.0);
  CHECK(pc.event_probability() < 1.0);
}
