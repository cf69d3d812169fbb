#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "wde/lattice.hpp"
#include "wde/sample.hpp"

namespace wde {

using Rng = std::mt19937_64;

enum class Boundary { Free, Torus };

struct EigenBounds {
  double h0 = 0.0;  // smallest adjacency eigenvalue
  double hm = 0.0;  // largest adjacency eigenvalue
};

/// Extreme eigenvalues of the four-neighbour adjacency matrix H, in closed
/// form from the path/cycle spectra (H is a Kronecker sum on the grid).
EigenBounds adjacency_eigen_bounds(const LatticeShape& shape, Boundary boundary = Boundary::Free);

/// Open interval of dependence parameters eta for which I - eta*H is invertible.
struct EtaRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double eta) const noexcept { return eta > lo && eta < hi; }
};

EtaRange admissible_eta_range(double h0, double hm);
EtaRange admissible_eta_range(const LatticeShape& shape);

enum class VarianceMethod { Auto, Dense, ConjugateGradient, Spectral };

/// Conditional variances varsigma^2(s) = 1 / [(I - eta H)^{-1}]_{ss}, chosen so
/// that every site has a standard normal marginal. Auto uses a dense
/// factorisation up to 2500 sites and per-site CG solves above.
std::vector<double> conditional_variances(const LatticeShape& shape, double eta,
                                          VarianceMethod method = VarianceMethod::Auto);

/// Auto-mode variances memoised per (shape, eta). Thread-safe.
const std::vector<double>& cached_conditional_variances(const LatticeShape& shape, double eta);

/// One component of the multivariate field: conditional specification with
/// constant mean, c(s,t) = eta * H(s,t) and conditional variances cond_var.
struct GmrfSpec {
  LatticeShape shape;
  double eta = 0.0;
  double mean = 0.0;
  std::vector<double> cond_var;

  static GmrfSpec make(const LatticeShape& shape, double eta, double mean = 0.0);
};

/// Conditional mean alpha(s) + sum_{t in Ne(s)} eta (z(t) - alpha(t)).
double conditional_mean(const GmrfSpec& spec, const NeighborTable& neighbors, std::size_t site,
                        std::span<const double> field);

/// Draw from the full conditional at `site` by inversion of the uniform u.
double conditional_update(const GmrfSpec& spec, const NeighborTable& neighbors, std::size_t site,
                          std::span<const double> field, double u);

/// Gaussian copula on k components through the lower Cholesky factor of R.
class GaussianCopula {
 public:
  explicit GaussianCopula(const Eigen::MatrixXd& correlation);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(chol_.rows()); }
  const Eigen::MatrixXd& correlation() const noexcept { return correlation_; }

  /// out = L g (correlated standard normal scores).
  void correlate(std::span<const double> g, std::span<double> out) const;

  /// Phi(L g) componentwise.
  std::vector<double> uniforms(std::span<const double> g) const;

 private:
  Eigen::MatrixXd correlation_;
  Eigen::MatrixXd chol_;
};

std::vector<double> copula_coupled_uniforms(const Eigen::MatrixXd& correlation,
                                            std::span<const double> g);

inline constexpr std::size_t kFieldComponents = 5;

/// Copula correlation used by the simulation study: Z1-Z2 and Z3-Z4 coupled,
/// Z5 independent of everything.
Eigen::MatrixXd default_copula_correlation(double rho12 = 0.1, double rho34 = 0.1);

inline constexpr std::array<double, kFieldComponents> kDefaultEta = {0.2, -0.1, -0.22, 0.2, 0.22};

/// Five lattice-indexed Gaussian fields sharing one shape.
struct MultiField {
  std::vector<GmrfSpec> components;
  std::vector<std::vector<double>> values;  // [component][linear site index]
  Eigen::MatrixXd copula;

  const LatticeShape& shape() const { return components.front().shape; }
};

/// Validates eta against the admissible interval and the copula matrix, then
/// fills every field with i.i.d. N(0,1) draws taken from `rng`.
MultiField make_multifield(const LatticeShape& shape, std::span<const double> etas,
                           const Eigen::MatrixXd& copula, Rng& rng);

/// Conclique sampler. Each sweep updates the even conclique given the odd one
/// and then the odd conclique given the new even values. At every visited
/// site one 5-dimensional normal vector g is drawn from `rng`, correlated as
/// L g and used as the innovation of all five components.
MultiField run_chain(MultiField field, int iterations, Rng& rng);
MultiField run_chain(MultiField field, int iterations, std::uint64_t seed);

/// Independent reference sample: one correlated normal vector L g per site,
/// with no spatial interaction. Sites are visited in conclique order, so one
/// eta = 0 sweep of run_chain with the same generator state gives the same
/// values bit for bit.
MultiField sample_independent(const LatticeShape& shape, const Eigen::MatrixXd& copula, Rng& rng);

/// S = 1{Phi(Z5) > 1/2}; Y = (Phi(Z1), Phi(Z2)) if S = 0 and
/// (0.5 + 0.2 Z3, 0.5 + 0.2 Z4) otherwise.
Sample transform_to_target(const MultiField& field);

/// Mixture density 1/2 * 1_{[0,1]^2} + 1/2 * N((0.5,0.5), 0.2^2 [[1,rho],[rho,1]]).
double target_pdf(std::span<const double> x, double rho);

}  // namespace wde
