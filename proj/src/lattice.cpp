#include "loopsoup/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace loopsoup {

namespace {

bool row_major_less(const Site& a, const Site& b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

std::vector<int> parse_ints(const std::string& body, char sep) {
  std::vector<int> v;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, sep)) v.push_back(std::stoi(item));
  return v;
}

}  // namespace

DomainSpec parse_domain_spec(const std::string& text) {
  if (text.rfind("rect:", 0) == 0) {
    auto v = parse_ints(text.substr(5), ',');
    if (v.size() != 4) throw std::invalid_argument("rect needs x0,y0,x1,y1: " + text);
    return RectangleSpec{v[0], v[1], v[2], v[3]};
  }
  if (text.rfind("disc:", 0) == 0) {
    std::stringstream ss(text.substr(5));
    std::string item;
    std::vector<double> v;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (v.size() != 3) throw std::invalid_argument("disc needs cx,cy,r: " + text);
    return DiscSpec{v[0], v[1], v[2]};
  }
  if (text.rfind("sites:", 0) == 0) {
    SiteListSpec spec;
    std::stringstream ss(text.substr(6));
    std::string pair;
    while (std::getline(ss, pair, ';')) {
      if (pair.empty()) continue;
      auto v = parse_ints(pair, ',');
      if (v.size() != 2) throw std::invalid_argument("site needs x,y: " + pair);
      spec.sites.push_back({v[0], v[1]});
    }
    return spec;
  }
  throw std::invalid_argument("unknown domain spec: " + text);
}

std::string describe(const DomainSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  if (auto* r = std::get_if<RectangleSpec>(&spec)) {
    out << "rect:" << r->x0 << "," << r->y0 << "," << r->x1 << "," << r->y1;
  } else if (auto* d = std::get_if<DiscSpec>(&spec)) {
    out << "disc:" << d->cx << "," << d->cy << "," << d->r;
  } else {
    out << "sites:";
    const auto& sites = std::get<SiteListSpec>(spec).sites;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (i) out << ";";
      out << sites[i].x << "," << sites[i].y;
    }
  }
  return out.str();
}

LatticeDomain::LatticeDomain(std::vector<Site> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("empty domain");
  std::sort(sites_.begin(), sites_.end(), row_major_less);
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());

  int xmax = sites_.front().x, ymax = sites_.front().y;
  xmin_ = xmax;
  ymin_ = ymax;
  for (const Site& s : sites_) {
    xmin_ = std::min(xmin_, s.x);
    ymin_ = std::min(ymin_, s.y);
    xmax = std::max(xmax, s.x);
    ymax = std::max(ymax, s.y);
  }
  width_ = xmax - xmin_ + 1;
  height_ = ymax - ymin_ + 1;
  lookup_.assign(static_cast<std::size_t>(width_) * height_, kNoNeighbor);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const Site& s = sites_[i];
    lookup_[static_cast<std::size_t>(s.y - ymin_) * width_ + (s.x - xmin_)] = static_cast<int>(i);
  }

  neighbors_.resize(sites_.size());
  boundary_.assign(sites_.size(), false);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    for (std::size_t d = 0; d < 4; ++d) {
      const Site n{sites_[i].x + kSteps[d].x, sites_[i].y + kSteps[d].y};
      auto j = index_of(n);
      neighbors_[i][d] = j ? static_cast<int>(*j) : kNoNeighbor;
      if (!j) boundary_[i] = true;
    }
  }
}

std::optional<std::size_t> LatticeDomain::index_of(Site s) const {
  const int dx = s.x - xmin_, dy = s.y - ymin_;
  if (dx < 0 || dy < 0 || dx >= width_ || dy >= height_) return std::nullopt;
  const int idx = lookup_[static_cast<std::size_t>(dy) * width_ + dx];
  if (idx == kNoNeighbor) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

int LatticeDomain::degree(std::size_t i) const {
  return static_cast<int>(std::count_if(neighbors_[i].begin(), neighbors_[i].end(),
                                        [](int j) { return j != kNoNeighbor; }));
}

std::vector<std::size_t> LatticeDomain::boundary() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < boundary_.size(); ++i)
    if (boundary_[i]) out.push_back(i);
  return out;
}

LatticeDomain build_domain(const DomainSpec& spec) {
  std::vector<Site> sites;
  if (auto* r = std::get_if<RectangleSpec>(&spec)) {
    for (int y = r->y0; y <= r->y1; ++y)
      for (int x = r->x0; x <= r->x1; ++x) sites.push_back({x, y});
  } else if (auto* d = std::get_if<DiscSpec>(&spec)) {
    if (d->r >= 0.0) {
      const int xlo = static_cast<int>(std::floor(d->cx - d->r));
      const int xhi = static_cast<int>(std::ceil(d->cx + d->r));
      const int ylo = static_cast<int>(std::floor(d->cy - d->r));
      const int yhi = static_cast<int>(std::ceil(d->cy + d->r));
      for (int y = ylo; y <= yhi; ++y)
        for (int x = xlo; x <= xhi; ++x) {
          const double dx = x - d->cx, dy = y - d->cy;
          if (dx * dx + dy * dy <= d->r * d->r) sites.push_back({x, y});
        }
    }
  } else {
    sites = std::get<SiteListSpec>(spec).sites;
  }
  if (sites.empty()) throw std::invalid_argument("empty domain");
  return LatticeDomain(std::move(sites));
}

KillingRates zero_killing(const LatticeDomain& domain) { return {std::vector<double>(domain.size(), 0.0)}; }

KillingRates killing_from_mass(const LatticeDomain& domain, const MassFunction& m) {
  std::vector<double> values(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) values[i] = m(domain.site(i).x, domain.site(i).y);
  return killing_from_mass(values);
}

KillingRates killing_from_mass(std::span<const double> m) {
  KillingRates out;
  out.k.reserve(m.size());
  for (double v : m) {
    if (!(v >= 0.0)) throw std::invalid_argument("mass must be nonnegative");
    out.k.push_back(4.0 * std::expm1(v * v));
  }
  return out;
}

std::vector<double> mass_from_killing(const KillingRates& k) {
  std::vector<double> m;
  m.reserve(k.size());
  for (double v : k.k) m.push_back(std::sqrt(std::log1p(v / 4.0)));
  return m;
}

TransitionKernel::TransitionKernel(LatticeDomain domain, KillingRates k)
    : domain_(std::move(domain)), k_(std::move(k)) {
  if (k_.size() != domain_.size()) throw std::invalid_argument("killing rates do not match domain");
  weight_.resize(k_.size());
  for (std::size_t i = 0; i < k_.size(); ++i) {
    if (!(k_[i] >= 0.0)) throw std::invalid_argument("killing rates must be nonnegative");
    weight_[i] = 1.0 / (k_[i] + 4.0);
  }
}

double TransitionKernel::operator()(std::size_t x, std::size_t y) const {
  for (int j : domain_.neighbor_slots(x))
    if (j == static_cast<int>(y)) return weight_[x];
  return 0.0;
}

void TransitionKernel::apply(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  const std::size_t n = size();
  out.resize(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int j : domain_.neighbor_slots(x))
      if (j != LatticeDomain::kNoNeighbor) acc += v[j];
    out[static_cast<Eigen::Index>(x)] = weight_[x] * acc;
  }
}

Eigen::MatrixXd TransitionKernel::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (int j : domain_.neighbor_slots(static_cast<std::size_t>(x)))
      if (j != LatticeDomain::kNoNeighbor) P(x, j) = weight_[static_cast<std::size_t>(x)];
  return P;
}

Eigen::MatrixXd TransitionKernel::symmetrized() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (int j : domain_.neighbor_slots(static_cast<std::size_t>(x)))
      if (j != LatticeDomain::kNoNeighbor)
        S(x, j) = std::sqrt(weight_[static_cast<std::size_t>(x)] * weight_[static_cast<std::size_t>(j)]);
  return S;
}

TransitionKernel transition_kernel(const LatticeDomain& domain, const KillingRates& k) {
  return TransitionKernel(domain, k);
}

PrecisionMatrix precision_matrix(const LatticeDomain& domain, const KillingRates& k) {
  if (k.size() != domain.size()) throw std::invalid_argument("killing rates do not match domain");
  const auto n = static_cast<Eigen::Index>(domain.size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(domain.size() * 5);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    entries.emplace_back(i, i, k[i] + 4.0);
    for (int j : domain.neighbor_slots(i))
      if (j != LatticeDomain::kNoNeighbor) entries.emplace_back(i, j, -1.0);
  }
  PrecisionMatrix out;
  out.A.resize(n, n);
  out.A.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Eigen::MatrixXd green_function(const PrecisionMatrix& prec) {
  const Eigen::Index n = prec.A.rows();
  Eigen::MatrixXd G;
  if (static_cast<std::size_t>(n) <= kDenseGreenLimit) {
    const Eigen::MatrixXd A = prec.dense();
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw std::runtime_error("precision matrix is not positive definite");
    const double rcond = llt.rcond();
    if (!(rcond > 1e-14)) {
      std::ostringstream msg;
      msg << "precision matrix ill-conditioned (reciprocal condition estimate " << rcond << ")";
      throw std::runtime_error(msg.str());
    }
    G = llt.solve(Eigen::MatrixXd::Identity(n, n));
    G = 0.5 * (G + G.transpose());
    const double residual = (A * G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (residual > 1e-10) {
      std::ostringstream msg;
      msg << "Green function residual " << residual << " exceeds 1e-10 (rcond " << rcond << ")";
      throw std::runtime_error(msg.str());
    }
    return G;
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-13);
  cg.compute(prec.A);
  if (cg.info() != Eigen::Success) throw std::runtime_error("conjugate gradient setup failed");
  G.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, c);
    G.col(c) = cg.solve(e);
    if (cg.info() != Eigen::Success) throw std::runtime_error("conjugate gradient did not converge");
  }
  G = 0.5 * (G + G.transpose());
  return G;
}

double log_determinant(const Eigen::SparseMatrix<double>& A) {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  if (llt.info() != Eigen::Success) throw std::runtime_error("matrix is not positive definite");
  double logdet = 0.0;
  const auto& L = llt.matrixL();
  Eigen::SparseMatrix<double> Lm = L;
  for (Eigen::Index i = 0; i < Lm.rows(); ++i) logdet += 2.0 * std::log(Lm.coeff(i, i));
  return logdet;
}

}  // namespace loopsoup
