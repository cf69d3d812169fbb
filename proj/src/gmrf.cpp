#include "wde/gmrf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "wde/error.hpp"
#include "wde/normal.hpp"

namespace wde {

namespace {

constexpr std::size_t kDenseLimit = 2500;

struct AxisSpectrum {
  double lo = 0.0;
  double hi = 0.0;
};

AxisSpectrum path_spectrum(int n) {
  const double top = 2.0 * std::cos(std::numbers::pi / (n + 1));
  return {-top, top};
}

AxisSpectrum cycle_spectrum(int n) {
  if (n <= 2) return path_spectrum(n);
  const double lo = (n % 2 == 0) ? -2.0 : 2.0 * std::cos(std::numbers::pi * (n - 1) / n);
  return {lo, 2.0};
}

std::string describe(const EtaRange& r) {
  std::ostringstream os;
  os << "(" << r.lo << ", " << r.hi << ")";
  return os.str();
}

void require_admissible(const LatticeShape& shape, double eta) {
  if (eta == 0.0) return;
  const EtaRange range = admissible_eta_range(shape);
  if (!range.contains(eta)) {
    std::ostringstream os;
    os << "eta = " << eta << " outside the admissible interval " << describe(range);
    throw Error(ErrorCode::NonInvertible, os.str());
  }
}

Eigen::SparseMatrix<double> precision_operator(const LatticeShape& shape, double eta) {
  const NeighborTable nb(shape);
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t s = 0; s < nb.size(); ++s) {
    entries.emplace_back(static_cast<int>(s), static_cast<int>(s), 1.0);
    for (auto t = nb.begin(s); t != nb.end(s); ++t) {
      entries.emplace_back(static_cast<int>(s), static_cast<int>(*t), -eta);
    }
  }
  const auto n = static_cast<Eigen::Index>(shape.cardinality());
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

std::vector<double> variances_dense(const LatticeShape& shape, double eta) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(precision_operator(shape, eta));
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NonInvertible, "I - eta H is not positive definite");
  }
  // diag(A^{-1})_i = sum_k (L^{-1})_{k,i}^2
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  llt.matrixL().solveInPlace(linv);
  std::vector<double> out(shape.cardinality());
  for (Eigen::Index i = 0; i < a.cols(); ++i) out[static_cast<std::size_t>(i)] = 1.0 / linv.col(i).squaredNorm();
  return out;
}

std::vector<double> variances_cg(const LatticeShape& shape, double eta) {
  const Eigen::SparseMatrix<double> a = precision_operator(shape, eta);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-13);
  cg.compute(a);
  std::vector<double> out(shape.cardinality());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    e[i] = 1.0;
    const Eigen::VectorXd x = cg.solve(e);
    if (cg.info() != Eigen::Success) {
      throw Error(ErrorCode::NonInvertible, "conjugate gradient did not converge");
    }
    out[static_cast<std::size_t>(i)] = 1.0 / x[i];
    e[i] = 0.0;
  }
  return out;
}

// Eigenvectors of the free path are discrete sines, so the diagonal of the
// inverse is an explicit double sum over the product spectrum.
std::vector<double> variances_spectral(const LatticeShape& shape, double eta) {
  if (shape.rank() != 2) {
    throw Error(ErrorCode::Unsupported, "spectral variances need a two-dimensional lattice");
  }
  const int n1 = shape.dim(0);
  const int n2 = shape.dim(1);
  auto basis = [](int n) {
    Eigen::MatrixXd u(n, n);  // u(k, i): squared eigenvector entries
    Eigen::VectorXd lambda(n);
    const double scale = 2.0 / (n + 1);
    for (int k = 0; k < n; ++k) {
      lambda[k] = 2.0 * std::cos(std::numbers::pi * (k + 1) / (n + 1));
      for (int i = 0; i < n; ++i) {
        const double v = std::sin(std::numbers::pi * (k + 1) * (i + 1) / (n + 1));
        u(k, i) = scale * v * v;
      }
    }
    return std::pair{u, lambda};
  };
  const auto [u1, l1] = basis(n1);
  const auto [u2, l2] = basis(n2);
  Eigen::MatrixXd inv_eig(n1, n2);
  for (int k = 0; k < n1; ++k) {
    for (int l = 0; l < n2; ++l) {
      const double ev = 1.0 - eta * (l1[k] + l2[l]);
      if (ev <= 0.0) throw Error(ErrorCode::NonInvertible, "I - eta H is not positive definite");
      inv_eig(k, l) = 1.0 / ev;
    }
  }
  // diag[(s1, s2)] = sum_{k,l} u1(k,s1) u2(l,s2) / ev(k,l) = (u1^T inv_eig u2)(s1, s2)
  const Eigen::MatrixXd diag = u1.transpose() * inv_eig * u2;
  std::vector<double> out(shape.cardinality());
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) out[static_cast<std::size_t>(i * n2 + j)] = 1.0 / diag(i, j);
  }
  return out;
}

}  // namespace

EigenBounds adjacency_eigen_bounds(const LatticeShape& shape, Boundary boundary) {
  EigenBounds b;
  for (int n : shape.dims()) {
    const AxisSpectrum a = boundary == Boundary::Free ? path_spectrum(n) : cycle_spectrum(n);
    b.h0 += a.lo;
    b.hm += a.hi;
  }
  return b;
}

EtaRange admissible_eta_range(double h0, double hm) {
  if (!(h0 < 0.0) || !(hm > 0.0)) {
    throw Error(ErrorCode::BipartiteViolation,
                "admissible eta range needs h0 < 0 < hm");
  }
  return {1.0 / h0, 1.0 / hm};
}

EtaRange admissible_eta_range(const LatticeShape& shape) {
  const EigenBounds b = adjacency_eigen_bounds(shape);
  return admissible_eta_range(b.h0, b.hm);
}

std::vector<double> conditional_variances(const LatticeShape& shape, double eta,
                                          VarianceMethod method) {
  if (eta == 0.0) return std::vector<double>(shape.cardinality(), 1.0);
  require_admissible(shape, eta);
  if (method == VarianceMethod::Auto) {
    method = shape.cardinality() <= kDenseLimit ? VarianceMethod::Dense
                                                : VarianceMethod::ConjugateGradient;
  }
  std::vector<double> out;
  switch (method) {
    case VarianceMethod::Dense: out = variances_dense(shape, eta); break;
    case VarianceMethod::ConjugateGradient: out = variances_cg(shape, eta); break;
    case VarianceMethod::Spectral: out = variances_spectral(shape, eta); break;
    case VarianceMethod::Auto: break;
  }
  for (double v : out) {
    if (!(v > 0.0 && v <= 1.0 + 1e-12)) {
      throw Error(ErrorCode::NonInvertible, "conditional variance outside (0, 1]");
    }
  }
  return out;
}

const std::vector<double>& cached_conditional_variances(const LatticeShape& shape, double eta) {
  static std::mutex mutex;
  static std::map<std::pair<std::vector<int>, double>, std::vector<double>> cache;
  const std::lock_guard lock(mutex);
  const auto key = std::pair{shape.dims(), eta};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, conditional_variances(shape, eta)).first;
  return it->second;
}

GmrfSpec GmrfSpec::make(const LatticeShape& shape, double eta, double mean) {
  return GmrfSpec{shape, eta, mean, cached_conditional_variances(shape, eta)};
}

double conditional_mean(const GmrfSpec& spec, const NeighborTable& neighbors, std::size_t site,
                        std::span<const double> field) {
  double acc = 0.0;
  for (auto t = neighbors.begin(site); t != neighbors.end(site); ++t) acc += field[*t] - spec.mean;
  return spec.mean + spec.eta * acc;
}

double conditional_update(const GmrfSpec& spec, const NeighborTable& neighbors, std::size_t site,
                          std::span<const double> field, double u) {
  return conditional_mean(spec, neighbors, site, field) +
         std::sqrt(spec.cond_var.at(site)) * normal_quantile(u);
}

GaussianCopula::GaussianCopula(const Eigen::MatrixXd& correlation) : correlation_(correlation) {
  if (correlation.rows() != correlation.cols() || correlation.rows() == 0) {
    throw Error(ErrorCode::DecompositionFailure, "copula correlation must be a square matrix");
  }
  if (!correlation.isApprox(correlation.transpose(), 1e-12)) {
    throw Error(ErrorCode::DecompositionFailure, "copula correlation must be symmetric");
  }
  for (Eigen::Index i = 0; i < correlation.rows(); ++i) {
    if (std::abs(correlation(i, i) - 1.0) > 1e-12) {
      throw Error(ErrorCode::DecompositionFailure, "copula correlation needs a unit diagonal");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(correlation);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::DecompositionFailure, "copula correlation is not positive definite");
  }
  chol_ = llt.matrixL();
}

void GaussianCopula::correlate(std::span<const double> g, std::span<double> out) const {
  const std::size_t k = dim();
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += chol_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * g[j];
    out[i] = acc;
  }
}

std::vector<double> GaussianCopula::uniforms(std::span<const double> g) const {
  if (g.size() != dim()) throw Error(ErrorCode::InvalidArgument, "copula draw has wrong length");
  std::vector<double> w(dim());
  correlate(g, w);
  for (double& x : w) x = normal_cdf(x);
  return w;
}

std::vector<double> copula_coupled_uniforms(const Eigen::MatrixXd& correlation,
                                            std::span<const double> g) {
  return GaussianCopula(correlation).uniforms(g);
}

Eigen::MatrixXd default_copula_correlation(double rho12, double rho34) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(5, 5);
  r(0, 1) = r(1, 0) = rho12;
  r(2, 3) = r(3, 2) = rho34;
  return r;
}

MultiField make_multifield(const LatticeShape& shape, std::span<const double> etas,
                           const Eigen::MatrixXd& copula, Rng& rng) {
  if (etas.size() != kFieldComponents) {
    throw Error(ErrorCode::InvalidArgument, "expected one eta per field component");
  }
  if (copula.rows() != static_cast<Eigen::Index>(kFieldComponents)) {
    throw Error(ErrorCode::DecompositionFailure, "copula correlation must be 5 x 5");
  }
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (copula(4, i) != 0.0 || copula(i, 4) != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "Z5 must be independent of the other components");
    }
  }
  GaussianCopula check(copula);
  MultiField field;
  field.copula = copula;
  for (double eta : etas) field.components.push_back(GmrfSpec::make(shape, eta));
  std::normal_distribution<double> normal;
  field.values.assign(kFieldComponents, std::vector<double>(shape.cardinality()));
  for (auto& component : field.values) {
    for (double& z : component) z = normal(rng);
  }
  return field;
}

MultiField run_chain(MultiField field, int iterations, Rng& rng) {
  if (iterations <= 0) return field;
  const LatticeShape& shape = field.shape();
  const NeighborTable neighbors(shape);
  const auto [c1, c2] = conclique_indices(shape);
  const GaussianCopula copula(field.copula);
  std::normal_distribution<double> normal;

  std::array<std::vector<double>, kFieldComponents> sd;
  for (std::size_t i = 0; i < kFieldComponents; ++i) {
    sd[i].resize(shape.cardinality());
    for (std::size_t s = 0; s < sd[i].size(); ++s) sd[i][s] = std::sqrt(field.components[i].cond_var[s]);
  }

  std::array<double, kFieldComponents> g{};
  std::array<double, kFieldComponents> w{};
  auto half_sweep = [&](const std::vector<std::size_t>& sites) {
    for (std::size_t s : sites) {
      for (double& x : g) x = normal(rng);
      copula.correlate(g, w);
      for (std::size_t i = 0; i < kFieldComponents; ++i) {
        const GmrfSpec& spec = field.components[i];
        std::vector<double>& z = field.values[i];
        double acc = 0.0;
        for (auto t = neighbors.begin(s); t != neighbors.end(s); ++t) acc += z[*t] - spec.mean;
        z[s] = spec.mean + spec.eta * acc + sd[i][s] * w[i];
      }
    }
  };
  for (int it = 0; it < iterations; ++it) {
    half_sweep(c1);
    half_sweep(c2);
  }
  return field;
}

MultiField run_chain(MultiField field, int iterations, std::uint64_t seed) {
  Rng rng(seed);
  return run_chain(std::move(field), iterations, rng);
}

MultiField sample_independent(const LatticeShape& shape, const Eigen::MatrixXd& copula, Rng& rng) {
  const std::array<double, kFieldComponents> zeros{};
  MultiField field;
  field.copula = copula;
  for (double eta : zeros) field.components.push_back(GmrfSpec::make(shape, eta));
  const GaussianCopula coupler(copula);
  std::normal_distribution<double> normal;
  field.values.assign(kFieldComponents, std::vector<double>(shape.cardinality()));
  std::array<double, kFieldComponents> g{};
  std::array<double, kFieldComponents> w{};
  const auto [c1, c2] = conclique_indices(shape);
  for (const auto* sites : {&c1, &c2}) {
    for (std::size_t s : *sites) {
      for (double& x : g) x = normal(rng);
      coupler.correlate(g, w);
      for (std::size_t i = 0; i < kFieldComponents; ++i) field.values[i][s] = w[i];
    }
  }
  return field;
}

Sample transform_to_target(const MultiField& field) {
  const std::size_t n = field.shape().cardinality();
  std::vector<double> coords(2 * n);
  const auto& z = field.values;
  for (std::size_t s = 0; s < n; ++s) {
    const bool gaussian_block = normal_cdf(z[4][s]) > 0.5;
    if (gaussian_block) {
      coords[2 * s] = 0.5 + 0.2 * z[2][s];
      coords[2 * s + 1] = 0.5 + 0.2 * z[3][s];
    } else {
      coords[2 * s] = normal_cdf(z[0][s]);
      coords[2 * s + 1] = normal_cdf(z[1][s]);
    }
  }
  return Sample(2, std::move(coords));
}

double target_pdf(std::span<const double> x, double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::InvalidCorrelation, "target correlation must satisfy |rho| < 1");
  }
  constexpr double sigma = 0.2;
  const double inside = (x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0) ? 1.0 : 0.0;
  const double a = (x[0] - 0.5) / sigma;
  const double b = (x[1] - 0.5) / sigma;
  const double one_minus = 1.0 - rho * rho;
  const double q = (a * a - 2.0 * rho * a * b + b * b) / one_minus;
  const double gauss =
      std::exp(-0.5 * q) / (2.0 * std::numbers::pi * sigma * sigma * std::sqrt(one_minus));
  return 0.5 * inside + 0.5 * gauss;
}

}  // namespace wde
