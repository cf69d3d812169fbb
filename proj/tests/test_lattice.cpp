#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "wde/error.hpp"
#include "wde/lattice.hpp"

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

std::set<Site> as_set(const std::vector<Site>& v) { return {v.begin(), v.end()}; }

TEST(IndexSet, SingleSite) {
  const auto sites = build_index_set(LatticeShape({1, 1}));
  ASSERT_EQ(sites.size(), 1u);
  EXPECT_EQ(sites[0].coords, (std::vector<int>{1, 1}));
}

TEST(IndexSet, RowMajorEnumeration) {
  const auto sites = build_index_set(LatticeShape({2, 2}));
  const std::vector<Site> expected{{{1, 1}}, {{1, 2}}, {{2, 1}}, {{2, 2}}};
  EXPECT_EQ(sites, expected);
}

TEST(IndexSet, StudySizes) {
  for (int side : {20, 35, 50, 65}) {
    const LatticeShape shape = square_lattice(side);
    EXPECT_EQ(build_index_set(shape).size(), static_cast<std::size_t>(side * side));
    EXPECT_EQ(shape.cardinality(), static_cast<std::size_t>(side * side));
  }
}

TEST(IndexSet, LinearIndexRoundTrip) {
  const LatticeShape shape({3, 5, 2});
  const auto sites = build_index_set(shape);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    EXPECT_EQ(shape.linear_index(sites[i]), i);
    EXPECT_EQ(shape.site_at(i), sites[i]);
  }
}

TEST(IndexSet, InvalidShapes) {
  EXPECT_EQ(code_of([] { LatticeShape({0, 3}); }), ErrorCode::InvalidShape);
  EXPECT_EQ(code_of([] { LatticeShape({4, -1}); }), ErrorCode::InvalidShape);
  EXPECT_EQ(code_of([] { LatticeShape(std::vector<int>{}); }), ErrorCode::InvalidShape);
}

TEST(IndexSet, OutOfRangeLookups) {
  const LatticeShape shape({3, 3});
  EXPECT_FALSE(shape.contains(Site{{0, 1}}));
  EXPECT_FALSE(shape.contains(Site{{1, 4}}));
  EXPECT_EQ(code_of([&] { (void)shape.linear_index(Site{{4, 1}}); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([&] { (void)shape.site_at(9); }), ErrorCode::OutOfRange);
}

TEST(IndexSet, AspectRatio) {
  EXPECT_TRUE(LatticeShape({20, 20}).satisfies_aspect_ratio(1.0));
  EXPECT_TRUE(LatticeShape({10, 20}).satisfies_aspect_ratio(0.5));
  EXPECT_FALSE(LatticeShape({5, 20}).satisfies_aspect_ratio(0.5));
}

TEST(Neighbors, CornerEdgeInterior) {
  const LatticeShape shape({3, 3});
  EXPECT_EQ(as_set(four_neighbors(Site{{1, 1}}, shape)), (std::set<Site>{{{1, 2}}, {{2, 1}}}));
  EXPECT_EQ(as_set(four_neighbors(Site{{2, 2}}, shape)),
            (std::set<Site>{{{1, 2}}, {{3, 2}}, {{2, 1}}, {{2, 3}}}));
  EXPECT_EQ(as_set(four_neighbors(Site{{1, 2}}, shape)), (std::set<Site>{{{1, 1}}, {{1, 3}}, {{2, 2}}}));
}

TEST(Neighbors, OutsideSiteRejected) {
  EXPECT_EQ(code_of([] { four_neighbors(Site{{4, 1}}, LatticeShape({3, 3})); }), ErrorCode::OutOfRange);
}

TEST(Neighbors, SymmetricAndTableConsistent) {
  const LatticeShape shape({6, 9});
  const NeighborTable table(shape);
  ASSERT_EQ(table.size(), shape.cardinality());
  for (std::size_t i = 0; i < shape.cardinality(); ++i) {
    const Site s = shape.site_at(i);
    const auto ne = four_neighbors(s, shape);
    ASSERT_EQ(table.degree(i), ne.size());
    std::set<std::size_t> from_table(table.begin(i), table.end(i));
    for (const Site& t : ne) {
      EXPECT_TRUE(from_table.count(shape.linear_index(t)));
      const auto back = four_neighbors(t, shape);
      EXPECT_NE(std::find(back.begin(), back.end(), s), back.end());
    }
  }
}

TEST(Concliques, SmallCases) {
  const auto two = concliques(LatticeShape({2, 2}));
  EXPECT_EQ(as_set(two.c1), (std::set<Site>{{{1, 1}}, {{2, 2}}}));
  EXPECT_EQ(as_set(two.c2), (std::set<Site>{{{1, 2}}, {{2, 1}}}));
  const auto three = concliques(LatticeShape({3, 3}));
  EXPECT_EQ(three.c1.size(), 5u);
  EXPECT_EQ(three.c2.size(), 4u);
  const auto twenty = concliques(square_lattice(20));
  EXPECT_EQ(twenty.c1.size(), 200u);
  EXPECT_EQ(twenty.c2.size(), 200u);
}

TEST(Concliques, CheckerboardPartition) {
  for (const auto& dims : {std::vector<int>{7, 4}, std::vector<int>{5, 5}, std::vector<int>{1, 6}}) {
    const LatticeShape shape(dims);
    const auto pair = concliques(shape);
    EXPECT_EQ(pair.c1.size() + pair.c2.size(), shape.cardinality());
    std::set<Site> all = as_set(pair.c1);
    for (const Site& s : pair.c2) EXPECT_TRUE(all.insert(s).second);
    for (const auto* part : {&pair.c1, &pair.c2}) {
      const std::set<Site> members = as_set(*part);
      for (const Site& s : *part) {
        for (const Site& t : four_neighbors(s, shape)) EXPECT_FALSE(members.count(t));
      }
    }
    const auto [i1, i2] = conclique_indices(shape);
    ASSERT_EQ(i1.size(), pair.c1.size());
    for (std::size_t k = 0; k < i1.size(); ++k) EXPECT_EQ(i1[k], shape.linear_index(pair.c1[k]));
    EXPECT_TRUE(std::is_sorted(i2.begin(), i2.end()));
  }
}

TEST(Concliques, OnlyTwoDimensional) {
  EXPECT_EQ(code_of([] { concliques(LatticeShape({2, 2, 2})); }), ErrorCode::UnsupportedLattice);
  EXPECT_EQ(code_of([] { concliques(LatticeShape({4})); }), ErrorCode::UnsupportedLattice);
}

TEST(Split, StudyFractions) {
  const auto s20 = partition_train_validate(square_lattice(20), 0.9);
  EXPECT_EQ(s20.train.size(), 324u);
  EXPECT_EQ(s20.validate.size(), 76u);
  EXPECT_EQ(partition_train_validate(square_lattice(10), 0.99).train.size(), 81u);
  EXPECT_EQ(partition_train_validate(square_lattice(65), 0.9).train.size(), 58u * 58u);
}

TEST(Split, TrainIsLowerBlockAndValidateIsComplement) {
  const LatticeShape shape({12, 9});
  const auto split = partition_train_validate(shape, 0.75);
  for (const Site& s : split.train) {
    EXPECT_LE(s.coords[0], 9);
    EXPECT_LE(s.coords[1], 6);
  }
  std::set<Site> all = as_set(split.train);
  for (const Site& s : split.validate) EXPECT_TRUE(all.insert(s).second);
  EXPECT_EQ(all.size(), shape.cardinality());
}

TEST(Split, DegenerateFractions) {
  EXPECT_EQ(code_of([] { partition_train_validate(square_lattice(5), 0.1); }), ErrorCode::DegenerateSplit);
  EXPECT_EQ(code_of([] { partition_train_validate(square_lattice(5), 1.0); }), ErrorCode::DegenerateSplit);
  EXPECT_EQ(code_of([] { partition_train_validate(square_lattice(5), 0.0); }), ErrorCode::DegenerateSplit);
  EXPECT_EQ(code_of([] { partition_train_validate(square_lattice(1), 0.9); }), ErrorCode::DegenerateSplit);
}

}  // namespace
}  // namespace wde
