#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wde {

/// Orthonormal 1-D filter pair. h is the father filter with sum sqrt(2),
/// g the quadrature mirror g_k = (-1)^k h_{L-k}; both live on {0..L}.
struct FilterBank {
  std::string name;
  std::vector<double> h;
  std::vector<double> g;
  int support = 0;  // L, so that supp(phi) = supp(psi) = [0, L]
};

FilterBank haar_filters();
FilterBank daubechies4_filters();

/// Builds a bank from a father filter alone.
FilterBank filter_bank_from_father(std::string name, std::vector<double> h);

/// Integer expanding dilation matrix. Evaluation only supports M = 2I, but
/// the rate calculators accept any matrix described here.
class DilationMatrix {
 public:
  explicit DilationMatrix(Eigen::MatrixXi m);
  static DilationMatrix isotropic(int d, int factor = 2);
  static DilationMatrix diagonal(std::vector<int> factors);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXi& matrix() const noexcept { return m_; }
  long long abs_det() const noexcept { return abs_det_; }
  double zeta_min() const noexcept { return zeta_min_; }
  double zeta_max() const noexcept { return zeta_max_; }
  bool is_diagonal() const noexcept;
  bool is_dyadic_isotropic() const noexcept;

 private:
  Eigen::MatrixXi m_;
  long long abs_det_ = 0;
  double zeta_min_ = 0.0;
  double zeta_max_ = 0.0;
};

/// Finite family a(gamma) on Z^d stored as parallel index/value lists.
struct FilterFamily {
  std::vector<std::vector<int>> index;
  std::vector<double> value;
};

/// Families a_k = |M|^{1/2} (xi_{k_1} (x) ... (x) xi_{k_d}) with xi_0 = h, xi_1 = g.
std::vector<FilterFamily> tensor_filter_families(const FilterBank& fb, int d);

struct FilterConditionReport {
  double orthogonality_residual = 0.0;  // max |sum a_j a_k(M g + .) - |M| delta delta|
  double sum_residual = 0.0;            // |sum a_0 - |M||
  bool pass(double tol = 1e-12) const noexcept {
    return orthogonality_residual <= tol && sum_residual <= tol;
  }
};

FilterConditionReport verify_filter_conditions(const std::vector<FilterFamily>& families,
                                               const DilationMatrix& m);

/// phi and psi sampled on the dyadic grid k 2^{-R}, k = 0..L 2^R, by the
/// cascade recursion started from the integer values of phi.
class CascadeTable {
 public:
  CascadeTable(const FilterBank& fb, int depth);

  int depth() const noexcept { return depth_; }
  int support() const noexcept { return support_; }
  const std::vector<double>& phi() const noexcept { return phi_; }
  const std::vector<double>& psi() const noexcept { return psi_; }

  /// Linear interpolation between grid nodes; zero outside [0, L].
  double phi_at(double x) const noexcept { return lookup(phi_, x); }
  double psi_at(double x) const noexcept { return lookup(psi_, x); }

  void write_csv(const std::string& path) const;

 private:
  double lookup(const std::vector<double>& table, double x) const noexcept;

  int depth_;
  int support_;
  double scale_;
  std::vector<double> phi_;
  std::vector<double> psi_;
};

/// Isotropic tensor-product basis with M = 2I on R^d. Mother k uses psi on
/// axis i iff bit (d-1-i) of k is set, so for d = 2 the mothers are
/// k=1: phi(x)psi, k=2: psi(x)phi, k=3: psi(x)psi.
class WaveletBasis {
 public:
  WaveletBasis(FilterBank fb, int d, int cascade_depth = 12);

  int dim() const noexcept { return dim_; }
  int support() const noexcept { return filters_.support; }
  int num_mothers() const noexcept { return (1 << dim_) - 1; }
  long long abs_det() const noexcept { return 1LL << dim_; }
  bool closed_form() const noexcept { return !table_; }
  const FilterBank& filters() const noexcept { return filters_; }
  const DilationMatrix& dilation() const noexcept { return dilation_; }
  const CascadeTable* table() const noexcept { return table_.get(); }
  const std::string& name() const noexcept { return filters_.name; }

  /// 1-D factors: which = 0 for phi, 1 for psi.
  double phi(double x) const noexcept;
  double psi(double x) const noexcept;
  double factor(int which, double x) const noexcept { return which == 0 ? phi(x) : psi(x); }
  static int factor_of(int k, int axis, int d) noexcept { return (k >> (d - 1 - axis)) & 1; }

  double father(std::span<const double> x) const;
  double mother(int k, std::span<const double> x) const;

  /// Phi_{j,gamma}(x) = 2^{jd/2} Phi(2^j x - gamma).
  double eval_father(int j, std::span<const int> gamma, std::span<const double> x) const;
  /// Psi_{k,j,gamma}(x) = 2^{jd/2} Psi_k(2^j x - gamma), 1 <= k <= 2^d - 1.
  double eval_mother(int k, int j, std::span<const int> gamma, std::span<const double> x) const;

  /// k = 0 selects the father.
  double eval(int k, int j, std::span<const int> gamma, std::span<const double> x) const;

 private:
  FilterBank filters_;
  int dim_;
  DilationMatrix dilation_;
  std::shared_ptr<const CascadeTable> table_;
};

WaveletBasis tensor_basis(const FilterBank& fb, int d, int cascade_depth = 12);

/// Only M = 2I can be evaluated; other matrices raise Unsupported.
WaveletBasis make_basis(const FilterBank& fb, const DilationMatrix& m, int cascade_depth = 12);

/// Looks up "haar" or "d4".
WaveletBasis basis_by_name(const std::string& name, int d, int cascade_depth = 12);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Translations whose support 2^{-j}([0,L]^d + gamma) meets the half-open
/// box [lo, hi), in row-major order.
std::vector<std::vector<int>> support_translations(const WaveletBasis& basis, int j,
                                                   const Box& box);

/// Per-axis range [first, last] of the same set.
std::pair<int, int> support_translation_range(int support, int j, double lo, double hi);

/// One basis element (k, j, gamma); k = 0 is the father.
struct BasisIndex {
  int k = 0;
  int j = 0;
  std::vector<int> gamma;
};

/// max |<b_u, b_v> - delta(u, v)| over the pairs. Inner products factor over
/// axes; each 1-D integral is a midpoint rule (closed form bases) or a
/// trapezoid rule on the cascade grid, with `resolution` nodes per unit
/// length at the finer of the two levels.
double orthonormality_report(const WaveletBasis& basis,
                             const std::vector<std::pair<BasisIndex, BasisIndex>>& pairs,
                             int resolution);

/// 1-D inner product of 2^{j/2} xi_a(2^j x - ga) and its b counterpart.
double inner_product_1d(const WaveletBasis& basis, int which_a, int ja, int ga, int which_b, int jb,
                        int gb, int resolution);

}  // namespace wde
