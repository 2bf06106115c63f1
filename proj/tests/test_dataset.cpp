#include <gtest/gtest.h>

#include <cmath>

#include "avi/dataset.hpp"
#include "support.hpp"

using namespace avi;

TEST(Dataset, CircleSamplesLieOnCircle) {
  DatasetSpec s;
  s.radii = {{1.0, 1.0}};
  s.samples = 8;
  std::mt19937_64 rng(5);
  const Matrix p = sample_base_points(s, rng);
  ASSERT_EQ(p.rows(), 8);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p(i, 0) * p(i, 0) + p(i, 1) * p(i, 1), 1.0, 1e-12);
}

TEST(Dataset, RotatedEllipsesSatisfyTheirEquations) {
  const DatasetSpec s = d1_spec(60, 0.0, 1);
  std::mt19937_64 rng(1);
  const Matrix p = sample_base_points(s, rng);
  const double c = std::cos(s.rotation), sn = std::sin(s.rotation);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double u = c * p(i, 0) + sn * p(i, 1);
    const double v = -sn * p(i, 0) + c * p(i, 1);
    double best = 1e300;
    for (const auto& r : s.radii) best = std::min(best, std::abs(u * u / (r.a * r.a) + v * v / (r.b * r.b) - 1.0));
    EXPECT_LE(best, 1e-12);
  }
}

TEST(Dataset, UnitWeightCopiesFirstCoordinate) {
  avi::testing::Gen g(2);
  const Matrix base = g.matrix(10, 2);
  const Matrix out = append_linear_vars(base, {{1.0}, {0.0}, {0.3}});
  ASSERT_EQ(out.cols(), 5);
  EXPECT_TRUE(out.col(2) == base.col(0));
  EXPECT_TRUE(out.col(3) == base.col(1));
  for (Eigen::Index i = 0; i < 10; ++i) EXPECT_NEAR(out(i, 4), 0.3 * base(i, 0) + 0.7 * base(i, 1), 1e-15);
}

TEST(Dataset, ThreeWayMix) {
  avi::testing::Gen g(3);
  const Matrix base = g.matrix(6, 3);
  const Matrix out = append_linear_vars(base, {{0.2, 0.5}, {0.5}});
  ASSERT_EQ(out.cols(), 5);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(out(i, 3), 0.2 * base(i, 0) + 0.5 * base(i, 1) + 0.3 * base(i, 2), 1e-15);
    EXPECT_NEAR(out(i, 4), 0.5 * base(i, 0) + 0.5 * base(i, 1), 1e-15);
  }
  EXPECT_THROW(append_linear_vars(base, {{0.1, 0.1, 0.1}}), std::invalid_argument);
  EXPECT_THROW(append_linear_vars(base, {{}}), std::invalid_argument);
}

TEST(Dataset, D2SystemVanishes) {
  const DatasetSpec s = d2_spec(50, 0.0, 4);
  ASSERT_EQ(s.system.size(), 2u);
  const DensePolynomial f1(3, {{{1, 0, 1}, 1.0}, {{0, 2, 0}, -1.0}});
  const DensePolynomial f2(3, {{{3, 0, 0}, 1.0}, {{0, 1, 1}, -1.0}});
  EXPECT_EQ(s.system[0], f1);
  EXPECT_EQ(s.system[1], f2);
  std::mt19937_64 rng(4);
  const Matrix p = sample_base_points(s, rng);
  ASSERT_EQ(p.rows(), 50);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const auto x = avi::testing::row_of(p, i);
    EXPECT_LE(std::abs(poly_eval(f1, x)), 1e-10);
    EXPECT_LE(std::abs(poly_eval(f2, x)), 1e-10);
  }
}

TEST(Dataset, PresetShapes) {
  const DatasetSpec a = d1_spec(30, 0.05, 1);
  EXPECT_EQ(a.radii.size(), 3u);
  EXPECT_EQ(a.extra_linear_vars,
            (std::vector<std::vector<double>>{{0.0}, {0.2}, {0.5}, {0.8}, {1.0}}));
  EXPECT_NEAR(a.radii[0].a, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a.radii[2].b, 3.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(generate_dataset(a).dim(), 7u);
  const DatasetSpec b = d2_spec(30, 0.05, 1);
  ASSERT_EQ(b.extra_linear_vars.size(), 9u);
  EXPECT_EQ(b.extra_linear_vars[5], (std::vector<double>{0.5, 0.8}));
  EXPECT_EQ(generate_dataset(b).dim(), 12u);
}

TEST(Dataset, CentredWithoutNoise) {
  const PointSet x = generate_dataset(d1_spec(90, 0.0, 3));
  EXPECT_LE(x.points.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dataset, NoiseLevelMatchesFraction) {
  DatasetSpec s = d1_spec(4000, 0.0, 9);
  const Matrix clean = generate_dataset(s).points;
  s.noise_std_fraction = 0.05;
  const Matrix noisy = generate_dataset(s).points;
  const double sigma = 0.05 * clean.cwiseAbs().mean();
  const Matrix d = noisy - clean;
  const double sd = std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
  EXPECT_NEAR(sd / sigma, 1.0, 0.05);
}

TEST(Dataset, Deterministic) {
  const DatasetSpec s = d2_spec(40, 0.05, 11);
  EXPECT_TRUE(generate_dataset(s).points == generate_dataset(s).points);
  DatasetSpec t = s;
  t.seed = 12;
  EXPECT_FALSE(generate_dataset(s).points == generate_dataset(t).points);
}

TEST(Dataset, Validation) {
  EXPECT_THROW(parse_variety("torus"), std::invalid_argument);
  EXPECT_EQ(parse_variety(to_string(VarietyKind::PolynomialSystem)), VarietyKind::PolynomialSystem);
  DatasetSpec s;
  s.radii = {{1.0, 1.0}};
  s.samples = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.samples = 3;
  s.noise_std_fraction = -0.1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  DatasetSpec c;
  c.variety = VarietyKind::Custom;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Dataset, CustomDrawsFromRows) {
  DatasetSpec c;
  c.variety = VarietyKind::Custom;
  c.custom_points = avi::testing::four_points().points;
  c.samples = 20;
  std::mt19937_64 rng(0);
  const Matrix p = sample_base_points(c, rng);
  ASSERT_EQ(p.rows(), 20);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).norm(), 1.0, 1e-15);
}
