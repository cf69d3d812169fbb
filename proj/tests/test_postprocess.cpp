#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "wde/densities.hpp"
#include "wde/error.hpp"
#include "wde/estimators.hpp"
#include "wde/gmrf.hpp"
#include "wde/postprocess.hpp"

namespace wde {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

DensityEstimate haar_estimate(int d, int j, const std::vector<std::pair<std::vector<int>, double>>& father) {
  DensityEstimate est{tensor_basis(haar_filters(), d), EstimateKind::Linear, j, j, {}, 0.0,
                      CoefficientSet{d, j, {}, {}}, std::nullopt};
  for (const auto& [g, v] : father) est.coeffs.father[make_translation(g)] = v;
  return est;
}

Sample mixture_sample(int side, std::uint64_t seed) {
  Rng rng(seed);
  return transform_to_target(sample_independent(square_lattice(side), default_copula_correlation(), rng));
}

double grid_integral(const std::vector<double>& values, const QuadratureGrid& grid) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * grid.weight();
}

const DensityFn kUniform = [](std::span<const double> x) {
  return (x[0] >= 0.0 && x[0] < 1.0 && x[1] >= 0.0 && x[1] < 1.0) ? 1.0 : 0.0;
};

TEST(Normalize, DensityIsUnchanged) {
  const DensityEstimate est = haar_estimate(2, 0, {{{0, 0}, 1.0}});
  const QuadratureGrid grid = estimate_grid(est, default_target_box(), 8);
  const Normalized n = normalize(est, grid);
  EXPECT_NEAR(n.mass, 1.0, 1e-15);
  ASSERT_TRUE(n.estimate.normalized());
  const std::vector<double> raw = evaluate_grid(est, grid);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(n.values[i], raw[i], 1e-15);
}

TEST(Normalize, NegativePartIsClipped) {
  const double r = std::sqrt(2.0);
  const DensityEstimate est = haar_estimate(1, 1, {{{0}, 1.5 / r}, {{1}, -0.5 / r}});
  const QuadratureGrid grid({0.0}, {1.0}, {16});
  const Normalized n = normalize(est, grid);
  EXPECT_NEAR(n.mass, 0.75, 1e-14);
  for (double x : {0.1, 0.3, 0.49}) EXPECT_NEAR(n.estimate.evaluate(std::vector<double>{x}), 2.0, 1e-14);
  for (double x : {0.5, 0.7, 0.99}) EXPECT_EQ(n.estimate.evaluate(std::vector<double>{x}), 0.0);
  EXPECT_NEAR(l2_norm_sq(n.estimate, grid), 2.0, 1e-14);
  EXPECT_EQ(code_of([&] { normalize(n.estimate, grid); }), ErrorCode::InvalidArgument);
}

TEST(Normalize, NonpositiveEstimateIsDegenerate) {
  const DensityEstimate est = haar_estimate(2, 0, {{{0, 0}, -1.0}});
  const QuadratureGrid grid = estimate_grid(est, default_target_box(), 8);
  EXPECT_EQ(code_of([&] { normalize(est, grid); }), ErrorCode::DegenerateEstimate);
  EXPECT_EQ(code_of([&] { normalize(haar_estimate(2, 0, {}), grid); }), ErrorCode::DegenerateEstimate);
}

TEST(Normalize, OutputIsADensityOnTheGrid) {
  for (const char* name : {"haar", "d4"}) {
    const WaveletBasis b = basis_by_name(name, 2);
    for (int rep = 0; rep < 5; ++rep) {
      const DensityEstimate est = linear_estimate(mixture_sample(20, 300 + rep), b, 3);
      const QuadratureGrid grid = estimate_grid(est, default_target_box(), default_cells_per_unit(est, 128));
      const Normalized n = normalize(est, grid);
      EXPECT_GE(*std::min_element(n.values.begin(), n.values.end()), 0.0);
      EXPECT_NEAR(grid_integral(n.values, grid), 1.0, 1e-8) << name;
      const std::vector<double> again = evaluate_grid(n.estimate, grid);
      for (std::size_t i = 0; i < again.size(); i += 97) EXPECT_NEAR(again[i], n.values[i], 1e-12);
    }
  }
}

TEST(Ise, ClosedFormCases) {
  const DensityEstimate one = haar_estimate(2, 0, {{{0, 0}, 1.0}});
  const DensityEstimate zero = haar_estimate(2, 0, {});
  const QuadratureGrid grid = estimate_grid(one, default_target_box(), 8);
  EXPECT_EQ(ise(one, kUniform, grid), 0.0);
  EXPECT_NEAR(ise(zero, kUniform, grid), 1.0, 1e-15);
  const DensityEstimate quarter = haar_estimate(2, 1, {{{0, 0}, 2.0}});
  EXPECT_EQ(ise(quarter, [&](std::span<const double> x) { return quarter.evaluate(x); }, grid), 0.0);
}

TEST(Ise, DecomposesIntoVerPlusTargetNorm) {
  struct Case {
    DensityFn f;
    double norm_sq;
  };
  const std::vector<Case> cases{
      {kUniform, 1.0},
      {[](std::span<const double> x) { return ramp_pdf(x); }, kRampL2NormSq},
      {[](std::span<const double> x) { return target_pdf(x, 0.1); }, target_l2_norm_sq(0.1)},
  };
  const DensityEstimate est = linear_estimate(mixture_sample(20, 7), tensor_basis(haar_filters(), 2), 2);
  const QuadratureGrid grid = estimate_grid(est, default_target_box(), 1024);
  for (const auto& c : cases) {
    EXPECT_NEAR(ise(est, c.f, grid), ver_exact(est, c.f, grid) + c.norm_sq, 1e-6);
  }
}

TEST(VerHat, ConstantEstimate) {
  const DensityEstimate one = haar_estimate(2, 0, {{{0, 0}, 1.0}});
  const QuadratureGrid grid = estimate_grid(one, default_target_box(), 8);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(200);
  for (double& x : c) x = u(rng);
  EXPECT_DOUBLE_EQ(ver_hat(one, Sample(2, c), grid), -1.0);
  EXPECT_EQ(code_of([&] { ver_hat(one, Sample(), grid); }), ErrorCode::EmptySample);
}

TEST(L2NormSq, ParsevalExamples) {
  const QuadratureGrid grid({0.0, 0.0}, {1.0, 1.0}, {4, 4});
  EXPECT_EQ(l2_norm_sq(haar_estimate(2, 0, {{{0, 0}, 1.0}}), grid), 1.0);
  EXPECT_EQ(l2_norm_sq(haar_estimate(2, 1, {{{0, 0}, 1.0}, {{1, 1}, 0.5}}), grid), 1.25);
}

TEST(L2NormSq, ParsevalMatchesQuadratureForHaar) {
  const WaveletBasis b = tensor_basis(haar_filters(), 2);
  for (int rep = 0; rep < 3; ++rep) {
    const Sample s = mixture_sample(20, 50 + rep);
    const CoefficientSet full = compute_coefficients(s, b, 0, 4);
    const DensityEstimate est = hard_threshold_estimate(full, b, 4, relative_thresholds(full, 0.2, 0, 4));
    const QuadratureGrid grid = estimate_grid(est, default_target_box(), 64);
    double quad = 0.0;
    for (double v : evaluate_grid(est, grid)) quad += v * v;
    EXPECT_NEAR(l2_norm_sq(est, grid), quad * grid.weight(), 1e-3);
  }
}

TEST(PrimaryLevel, SingleRegionMatchesVerHat) {
  const WaveletBasis b = tensor_basis(haar_filters(), 2);
  const Sample train = mixture_sample(30, 11);
  const Sample validation = mixture_sample(10, 12);
  const std::vector<Box> whole{Box{{-2.0, -2.0}, {3.0, 3.0}}};
  const PrimaryLevel p = select_primary_level(train, validation, b, whole, 0, 4);
  ASSERT_EQ(p.criteria.size(), 1u);
  ASSERT_EQ(p.criteria[0].size(), 5u);
  int best = 0;
  for (int j = 0; j <= 4; ++j) {
    const DensityEstimate est = linear_estimate(train, b, j);
    const double v = ver_hat(est, validation, estimate_grid(est, default_target_box(), 32));
    EXPECT_NEAR(p.criteria[0][static_cast<std::size_t>(j)], v, 1e-10);
    if (v < p.criteria[0][static_cast<std::size_t>(best)]) best = j;
  }
  EXPECT_EQ(p.j_star, best);
  EXPECT_EQ(p.region_levels, std::vector<int>{best});
}

TEST(PrimaryLevel, PrimaryLevelIsSmallestRegionalMinimizer) {
  const WaveletBasis b = tensor_basis(haar_filters(), 2);
  for (int rep = 0; rep < 4; ++rep) {
    const Sample train = mixture_sample(30, 20 + rep);
    const Sample validation = mixture_sample(12, 40 + rep);
    const PrimaryLevel p = select_primary_level(train, validation, b, default_regions(default_target_box()), 0, 4);
    ASSERT_EQ(p.region_levels.size(), 4u);
    for (std::size_t r = 0; r < 4; ++r) {
      const auto& c = p.criteria[r];
      const auto best = std::min_element(c.begin(), c.end()) - c.begin();
      EXPECT_EQ(p.region_levels[r], static_cast<int>(best));
    }
    EXPECT_EQ(p.j_star, *std::min_element(p.region_levels.begin(), p.region_levels.end()));
  }
}

TEST(PrimaryLevel, TiesGoToTheSmallestLevel) {
  std::vector<double> c;
  for (int a = 0; a < 8; ++a) {
    for (int bcell = 0; bcell < 8; ++bcell) {
      c.push_back((a + 0.5) / 8.0);
      c.push_back((bcell + 0.5) / 8.0);
    }
  }
  const Sample grid_sample(2, c);
  const WaveletBasis b = tensor_basis(haar_filters(), 2);
  const PrimaryLevel p = select_primary_level(grid_sample, grid_sample, b, {Box{{0.0, 0.0}, {1.0, 1.0}}}, 1, 3);
  EXPECT_EQ(p.j_star, 1);
  for (double v : p.criteria[0]) EXPECT_NEAR(v, -1.0, 1e-12);
}

TEST(PrimaryLevel, Errors) {
  const WaveletBasis b = tensor_basis(haar_filters(), 2);
  const Sample s = mixture_sample(5, 1);
  EXPECT_EQ(code_of([&] { select_primary_level(s, s, b, {}, 0, 2); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { select_primary_level(s, s, b, default_regions(default_target_box()), 3, 2); }),
            ErrorCode::InvalidLevels);
  EXPECT_EQ(code_of([&] { select_primary_level(s, Sample(), b, default_regions(default_target_box()), 0, 2); }),
            ErrorCode::EmptySample);
}

TEST(Regions, PartitionTheDomain) {
  const auto regions = default_regions(default_target_box(), 3);
  ASSERT_EQ(regions.size(), 9u);
  double area = 0.0;
  for (const auto& r : regions) area += (r.hi[0] - r.lo[0]) * (r.hi[1] - r.lo[1]);
  EXPECT_NEAR(area, 4.0, 1e-12);
  EXPECT_EQ(code_of([] { default_regions(default_target_box(), 0); }), ErrorCode::InvalidArgument);
}

TEST(Report, MeanStd) {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_DOUBLE_EQ(s, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(mean_std({7.0}), std::make_pair(7.0, 0.0));
  EXPECT_EQ(mean_std({}), std::make_pair(0.0, 0.0));
}

TEST(Report, MinimaPerSampleSizeAndCsv) {
  VerReport r{"haar", "raw", {}};
  r.add(400, 0, "linear", 0.0, {-0.9, -1.0});
  r.add(400, 2, "linear", 0.0, {-1.1, -1.0});
  r.add(400, 2, "hard", 0.1, {-1.0, -1.0});
  r.add(1225, 2, "linear", 0.0, {-1.2});
  r.add(1225, 3, "hard", 0.2, {-1.3});
  r.mark_minima();
  EXPECT_TRUE(r.find(400, 2, "linear", 0.0)->is_min);
  EXPECT_FALSE(r.find(400, 2, "hard", 0.1)->is_min);
  EXPECT_TRUE(r.find(1225, 3, "hard", 0.2)->is_min);
  EXPECT_EQ(r.find(1225, 3, "hard", 0.3), nullptr);
  for (const auto& c : r.cells) EXPECT_GE(c.std, 0.0);

  const auto path = std::filesystem::temp_directory_path() / "wde_report_test.csv";
  r.write_csv(path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample_size,j,estimator,threshold,mean,std,is_min");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("400,0,linear,0,-0.95,", 0), 0u);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace wde
