#include "wde/wavelet.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "wde/error.hpp"

namespace wde {

FilterBank filter_bank_from_father(std::string name, std::vector<double> h) {
  if (h.size() < 2) throw Error(ErrorCode::InvalidArgument, "father filter needs two taps");
  FilterBank fb;
  fb.name = std::move(name);
  fb.support = static_cast<int>(h.size()) - 1;
  fb.g.resize(h.size());
  for (int k = 0; k <= fb.support; ++k) {
    fb.g[static_cast<std::size_t>(k)] = (k % 2 == 0 ? 1.0 : -1.0) * h[static_cast<std::size_t>(fb.support - k)];
  }
  fb.h = std::move(h);
  return fb;
}

FilterBank haar_filters() {
  const double r = 1.0 / std::sqrt(2.0);
  return filter_bank_from_father("haar", {r, r});
}

FilterBank daubechies4_filters() {
  const double s3 = std::sqrt(3.0);
  const double c = 1.0 / (4.0 * std::sqrt(2.0));
  return filter_bank_from_father("d4", {(1.0 + s3) * c, (3.0 + s3) * c, (3.0 - s3) * c, (1.0 - s3) * c});
}

DilationMatrix::DilationMatrix(Eigen::MatrixXi m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw Error(ErrorCode::InvalidArgument, "dilation matrix must be square");
  }
  const Eigen::MatrixXd md = m_.cast<double>();
  abs_det_ = std::llround(std::abs(md.determinant()));
  const Eigen::VectorXd mod = Eigen::EigenSolver<Eigen::MatrixXd>(md, false).eigenvalues().cwiseAbs();
  zeta_min_ = mod.minCoeff();
  zeta_max_ = mod.maxCoeff();
  if (!(zeta_min_ > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "dilation matrix must be strictly expanding");
  }
}

DilationMatrix DilationMatrix::isotropic(int d, int factor) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return DilationMatrix(Eigen::MatrixXi::Identity(d, d) * factor);
}

DilationMatrix DilationMatrix::diagonal(std::vector<int> factors) {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(factors.size()),
                                            static_cast<Eigen::Index>(factors.size()));
  for (std::size_t i = 0; i < factors.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = factors[i];
  return DilationMatrix(std::move(m));
}

bool DilationMatrix::is_diagonal() const noexcept {
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
      if (i != j && m_(i, j) != 0) return false;
    }
  }
  return true;
}

bool DilationMatrix::is_dyadic_isotropic() const noexcept {
  return m_ == Eigen::MatrixXi::Identity(m_.rows(), m_.cols()) * 2;
}

std::vector<FilterFamily> tensor_filter_families(const FilterBank& fb, int d) {
  const int count = 1 << d;
  const int taps = fb.support + 1;
  const double norm = std::sqrt(static_cast<double>(count));
  std::vector<FilterFamily> out(static_cast<std::size_t>(count));
  int total = 1;
  for (int i = 0; i < d; ++i) total *= taps;
  for (int k = 0; k < count; ++k) {
    auto& fam = out[static_cast<std::size_t>(k)];
    for (int flat = 0; flat < total; ++flat) {
      std::vector<int> idx(static_cast<std::size_t>(d));
      double v = norm;
      int rest = flat;
      for (int axis = d - 1; axis >= 0; --axis) {
        const int g = rest % taps;
        rest /= taps;
        idx[static_cast<std::size_t>(axis)] = g;
        const auto& filt = WaveletBasis::factor_of(k, axis, d) == 0 ? fb.h : fb.g;
        v *= filt[static_cast<std::size_t>(g)];
      }
      fam.index.push_back(std::move(idx));
      fam.value.push_back(v);
    }
  }
  return out;
}

FilterConditionReport verify_filter_conditions(const std::vector<FilterFamily>& families,
                                               const DilationMatrix& m) {
  if (families.empty()) throw Error(ErrorCode::InvalidArgument, "no filter families");
  const int d = m.dim();
  const double det = static_cast<double>(m.abs_det());
  std::vector<std::map<std::vector<int>, double>> lookup(families.size());
  int extent = 0;
  for (std::size_t k = 0; k < families.size(); ++k) {
    const auto& fam = families[k];
    for (std::size_t i = 0; i < fam.index.size(); ++i) {
      if (static_cast<int>(fam.index[i].size()) != d) {
        throw Error(ErrorCode::InvalidArgument, "filter index dimension does not match M");
      }
      lookup[k][fam.index[i]] += fam.value[i];
      for (int c : fam.index[i]) extent = std::max(extent, std::abs(c));
    }
  }

  FilterConditionReport report;
  double sum0 = 0.0;
  for (double v : families[0].value) sum0 += v;
  report.sum_residual = std::abs(sum0 - det);

  // M expands, so M gamma leaves the support difference set once |gamma| > 2 extent.
  const int bound = 2 * extent + 1;
  const int width = 2 * bound + 1;
  int total = 1;
  for (int i = 0; i < d; ++i) total *= width;
  std::vector<int> gamma(static_cast<std::size_t>(d));
  std::vector<int> shifted(static_cast<std::size_t>(d));
  for (int flat = 0; flat < total; ++flat) {
    int rest = flat;
    bool zero = true;
    for (int axis = d - 1; axis >= 0; --axis) {
      gamma[static_cast<std::size_t>(axis)] = rest % width - bound;
      rest /= width;
      zero = zero && gamma[static_cast<std::size_t>(axis)] == 0;
    }
    for (std::size_t a = 0; a < families.size(); ++a) {
      for (std::size_t b = 0; b < families.size(); ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < families[a].index.size(); ++i) {
          const auto& gp = families[a].index[i];
          for (int r = 0; r < d; ++r) {
            int mg = 0;
            for (int c = 0; c < d; ++c) mg += m.matrix()(r, c) * gamma[static_cast<std::size_t>(c)];
            shifted[static_cast<std::size_t>(r)] = mg + gp[static_cast<std::size_t>(r)];
          }
          const auto it = lookup[b].find(shifted);
          if (it != lookup[b].end()) acc += families[a].value[i] * it->second;
        }
        const double expected = (a == b && zero) ? det : 0.0;
        report.orthogonality_residual = std::max(report.orthogonality_residual, std::abs(acc - expected));
      }
    }
  }
  return report;
}

CascadeTable::CascadeTable(const FilterBank& fb, int depth)
    : depth_(depth), support_(fb.support), scale_(std::ldexp(1.0, depth)) {
  if (depth < 0 || depth > 20) throw Error(ErrorCode::InvalidArgument, "cascade depth out of range");
  const int L = support_;
  const double r2 = std::sqrt(2.0);
  auto h = [&](int k) { return (k >= 0 && k <= L) ? fb.h[static_cast<std::size_t>(k)] : 0.0; };

  // phi at the integers: fixed point of A(i,m) = sqrt2 h_{2i-m} with sum one.
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(L + 2, L + 1);
  for (int i = 0; i <= L; ++i) {
    for (int m = 0; m <= L; ++m) sys(i, m) = r2 * h(2 * i - m) - (i == m ? 1.0 : 0.0);
  }
  sys.row(L + 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L + 2);
  rhs[L + 1] = 1.0;
  const Eigen::VectorXd ints = sys.colPivHouseholderQr().solve(rhs);

  const std::size_t n = static_cast<std::size_t>(L) * (std::size_t{1} << depth) + 1;
  phi_.assign(n, 0.0);
  const std::size_t full = std::size_t{1} << depth;
  for (int i = 0; i <= L; ++i) phi_[static_cast<std::size_t>(i) * full] = ints[i];

  // Level r fills odd multiples of 2^{-r} from level r-1 values.
  for (int r = 1; r <= depth; ++r) {
    const std::size_t stride = std::size_t{1} << (depth - r);
    const long long half = 1LL << (r - 1);
    const long long count = static_cast<long long>(L) << r;
    for (long long m = 1; m < count; m += 2) {
      double acc = 0.0;
      for (int g = 0; g <= L; ++g) {
        const long long num = m - g * half;  // grid r-1 numerator of 2x - g
        if (num < 0 || num > static_cast<long long>(L) * half) continue;
        acc += h(g) * phi_[static_cast<std::size_t>(num) * stride * 2];
      }
      phi_[static_cast<std::size_t>(m) * stride] = r2 * acc;
    }
  }

  psi_.assign(n, 0.0);
  const long long last = static_cast<long long>(n) - 1;
  for (long long i = 0; i <= last; ++i) {
    double acc = 0.0;
    for (int g = 0; g <= L; ++g) {
      const long long idx = 2 * i - static_cast<long long>(g) * static_cast<long long>(full);
      if (idx < 0 || idx > last) continue;
      acc += fb.g[static_cast<std::size_t>(g)] * phi_[static_cast<std::size_t>(idx)];
    }
    psi_[static_cast<std::size_t>(i)] = r2 * acc;
  }
}

double CascadeTable::lookup(const std::vector<double>& table, double x) const noexcept {
  const double t = x * scale_;
  const double last = static_cast<double>(table.size() - 1);
  if (!(t >= 0.0) || t > last) return 0.0;
  const double fl = std::floor(t);
  const auto i = static_cast<std::size_t>(fl);
  if (i + 1 >= table.size()) return table.back();
  const double w = t - fl;
  return table[i] + w * (table[i + 1] - table[i]);
}

void CascadeTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  out << "x,phi,psi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    out << static_cast<double>(i) / scale_ << ',' << phi_[i] << ',' << psi_[i] << '\n';
  }
}

WaveletBasis::WaveletBasis(FilterBank fb, int d, int cascade_depth)
    : filters_(std::move(fb)), dim_(d), dilation_(DilationMatrix::isotropic(d)) {
  if (d > 4) throw Error(ErrorCode::Unsupported, "dimension above 4 is not supported");
  if (filters_.support != 1) table_ = std::make_shared<const CascadeTable>(filters_, cascade_depth);
}

double WaveletBasis::phi(double x) const noexcept {
  if (!table_) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
  return table_->phi_at(x);
}

double WaveletBasis::psi(double x) const noexcept {
  if (!table_) {
    if (x >= 0.0 && x < 0.5) return 1.0;
    if (x >= 0.5 && x < 1.0) return -1.0;
    return 0.0;
  }
  return table_->psi_at(x);
}

double WaveletBasis::father(std::span<const double> x) const {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= phi(x[static_cast<std::size_t>(i)]);
  return v;
}

double WaveletBasis::mother(int k, std::span<const double> x) const {
  if (k < 1 || k > num_mothers()) throw Error(ErrorCode::InvalidIndex, "mother index out of range");
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= factor(factor_of(k, i, dim_), x[static_cast<std::size_t>(i)]);
  return v;
}

double WaveletBasis::eval(int k, int j, std::span<const int> gamma, std::span<const double> x) const {
  if (k < 0 || k > num_mothers()) throw Error(ErrorCode::InvalidIndex, "wavelet index out of range");
  double v = std::pow(2.0, 0.5 * j * dim_);
  for (int i = 0; i < dim_; ++i) {
    const auto a = static_cast<std::size_t>(i);
    v *= factor(factor_of(k, i, dim_), std::ldexp(x[a], j) - gamma[a]);
  }
  return v;
}

double WaveletBasis::eval_father(int j, std::span<const int> gamma, std::span<const double> x) const {
  return eval(0, j, gamma, x);
}

double WaveletBasis::eval_mother(int k, int j, std::span<const int> gamma,
                                 std::span<const double> x) const {
  if (k < 1 || k > num_mothers()) throw Error(ErrorCode::InvalidIndex, "mother index out of range");
  return eval(k, j, gamma, x);
}

WaveletBasis tensor_basis(const FilterBank& fb, int d, int cascade_depth) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return WaveletBasis(fb, d, cascade_depth);
}

WaveletBasis make_basis(const FilterBank& fb, const DilationMatrix& m, int cascade_depth) {
  if (!m.is_dyadic_isotropic()) {
    throw Error(ErrorCode::Unsupported, "evaluation is implemented for M = 2I only");
  }
  return WaveletBasis(fb, m.dim(), cascade_depth);
}

WaveletBasis basis_by_name(const std::string& name, int d, int cascade_depth) {
  if (name == "haar") return tensor_basis(haar_filters(), d, cascade_depth);
  if (name == "d4" || name == "db2") return tensor_basis(daubechies4_filters(), d, cascade_depth);
  throw Error(ErrorCode::InvalidArgument, "unknown wavelet '" + name + "' (expected haar or d4)");
}

std::pair<int, int> support_translation_range(int support, int j, double lo, double hi) {
  const int first = static_cast<int>(std::ceil(std::ldexp(lo, j) - support));
  const int last = static_cast<int>(std::ceil(std::ldexp(hi, j))) - 1;
  return {first, last};
}

std::vector<std::vector<int>> support_translations(const WaveletBasis& basis, int j, const Box& box) {
  const int d = basis.dim();
  if (static_cast<int>(box.lo.size()) != d || static_cast<int>(box.hi.size()) != d) {
    throw Error(ErrorCode::InvalidArgument, "box dimension does not match the basis");
  }
  std::vector<std::pair<int, int>> ranges;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    const auto a = static_cast<std::size_t>(i);
    ranges.push_back(support_translation_range(basis.support(), j, box.lo[a], box.hi[a]));
    const int w = ranges.back().second - ranges.back().first + 1;
    if (w <= 0) return {};
    total *= static_cast<std::size_t>(w);
  }
  std::vector<std::vector<int>> out;
  out.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<int> g(static_cast<std::size_t>(d));
    std::size_t rest = flat;
    for (int i = d - 1; i >= 0; --i) {
      const auto a = static_cast<std::size_t>(i);
      const auto w = static_cast<std::size_t>(ranges[a].second - ranges[a].first + 1);
      g[a] = ranges[a].first + static_cast<int>(rest % w);
      rest /= w;
    }
    out.push_back(std::move(g));
  }
  return out;
}

double inner_product_1d(const WaveletBasis& basis, int which_a, int ja, int ga, int which_b, int jb,
                        int gb, int resolution) {
  if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  const int L = basis.support();
  const double lo = std::max(std::ldexp(ga, -ja), std::ldexp(gb, -jb));
  const double hi = std::min(std::ldexp(ga + L, -ja), std::ldexp(gb + L, -jb));
  if (!(hi > lo)) return 0.0;
  const int jm = std::max(ja, jb);
  const double h = std::ldexp(1.0, -jm) / resolution;
  const auto n = static_cast<long long>(std::llround((hi - lo) / h));
  // The normalization is applied once after summation, so closed-form
  // factors with integer values sum exactly.
  const double scale = (ja + jb) % 2 == 0 ? std::ldexp(1.0, (ja + jb) / 2) : std::pow(2.0, 0.5 * (ja + jb));
  auto f = [&](double x) {
    return basis.factor(which_a, std::ldexp(x, ja) - ga) * basis.factor(which_b, std::ldexp(x, jb) - gb);
  };
  double acc = 0.0;
  if (basis.closed_form()) {
    for (long long i = 0; i < n; ++i) acc += f(lo + (static_cast<double>(i) + 0.5) * h);
  } else {
    acc = 0.5 * (f(lo) + f(hi));
    for (long long i = 1; i < n; ++i) acc += f(lo + static_cast<double>(i) * h);
  }
  return scale * acc * h;
}

double orthonormality_report(const WaveletBasis& basis,
                             const std::vector<std::pair<BasisIndex, BasisIndex>>& pairs,
                             int resolution) {
  const int d = basis.dim();
  double worst = 0.0;
  for (const auto& [u, v] : pairs) {
    if (static_cast<int>(u.gamma.size()) != d || static_cast<int>(v.gamma.size()) != d) {
      throw Error(ErrorCode::InvalidArgument, "translation dimension does not match the basis");
    }
    double ip = 1.0;
    for (int i = 0; i < d; ++i) {
      const auto a = static_cast<std::size_t>(i);
      ip *= inner_product_1d(basis, WaveletBasis::factor_of(u.k, i, d), u.j, u.gamma[a],
                             WaveletBasis::factor_of(v.k, i, d), v.j, v.gamma[a], resolution);
      if (ip == 0.0) break;
    }
    const bool same = u.k == v.k && u.j == v.j && u.gamma == v.gamma;
    worst = std::max(worst, std::abs(ip - (same ? 1.0 : 0.0)));
  }
  return worst;
}

}  // namespace wde
