#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "avi/reduction.hpp"
#include "support.hpp"

using namespace avi;
using avi::testing::Gen;

namespace {

FitConfig with(NormKind kind) {
  FitConfig cfg;
  cfg.normalization.kind = kind;
  return cfg;
}

// Oracle gradient of p at every (model-coordinate) point, |X| x n.
Matrix oracle_gradients(const DensePolynomial& p, const Matrix& pts) {
  Matrix out(pts.rows(), static_cast<Eigen::Index>(p.num_vars()));
  for (std::size_t k = 0; k < p.num_vars(); ++k) {
    const auto d = poly_diff(p, k);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      out(i, static_cast<Eigen::Index>(k)) = poly_eval(d, avi::testing::row_of(pts, i));
    }
  }
  return out;
}

std::map<int, std::size_t> kept_per_degree(const ReductionReport& r) {
  std::map<int, std::size_t> out;
  for (const auto& h : r.kept) ++out[h.degree];
  return out;
}

}  // namespace

TEST(Reduce, FourPointsBothFitsKeepTwo) {
  const PointSet x = avi::testing::four_points();
  for (auto kind : {NormKind::Gradient, NormKind::Identity}) {
    const auto m = fit(x, with(kind));
    const auto r = reduce_basis(m, x);
    ASSERT_EQ(r.kept.size(), 2u) << to_string(kind);
    const auto polys = expand(m, r.kept);
    double circ = 1.0, xy = 1.0;
    for (const auto& p : polys) {
      circ = std::min(circ, avi::testing::aligned_coef_error(p, avi::testing::circle()));
      xy = std::min(xy, avi::testing::aligned_coef_error(p, avi::testing::xy()));
    }
    EXPECT_LE(circ, 1e-8) << to_string(kind);
    EXPECT_LE(xy, 1e-8) << to_string(kind);
    EXPECT_EQ(r.kept.size() + r.removed.size() + (r.rank_deflated.empty() ? 0 : r.rank_deflated[0].removed.size()),
              m.count(Tag::G));
  }
}

TEST(Reduce, VcaUsesRankDeflation) {
  const PointSet x = avi::testing::four_points();
  const auto r = reduce_basis(fit(x, with(NormKind::Identity)), x);
  ASSERT_EQ(r.rank_deflated.size(), 1u);
  EXPECT_EQ(r.rank_deflated[0].degree, 2);
  EXPECT_EQ(r.rank_deflated[0].before, 3u);
  EXPECT_EQ(r.rank_deflated[0].rank, 2u);
  EXPECT_TRUE(reduce_basis(fit(x, with(NormKind::Gradient)), x).rank_deflated.empty());
}

TEST(Reduce, SingleGeneratorKept) {
  Matrix p(3, 2);
  p << 0, 0, 1, 1, 2, 2;
  const PointSet x(p);
  FitConfig cfg;
  cfg.max_degree = 1;
  const auto m = fit(x, cfg);
  ASSERT_EQ(m.count(Tag::G), 1u);
  const auto r = reduce_basis(m, x);
  EXPECT_EQ(r.kept, m.handles(Tag::G));
  EXPECT_TRUE(r.removed.empty());
}

TEST(Reduce, AppendedMultipleOfCircleIsRemoved) {
  const PointSet x = avi::testing::four_points();
  const auto m = fit(x, {});
  const DensePolynomial g = poly_mul(avi::testing::circle(), DensePolynomial::variable(2, 0));
  std::vector<ExternalVerdict> v;
  const auto r = reduce_basis(m, x, {{3, oracle_gradients(g, x.points)}}, v);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(v[0].removed);
  EXPECT_LE(v[0].max_residual, 1e-9);
  EXPECT_EQ(r.kept.size(), 2u);
}

TEST(Reduce, NegativeThresholdRejected) {
  const PointSet x = avi::testing::four_points();
  EXPECT_THROW(reduce_basis(fit(x, {}), x, -1.0), std::invalid_argument);
}

TEST(RankDeflate, FullRankKeepsAll) {
  EXPECT_EQ(rank_deflate_degree(Matrix::Identity(3, 3), {0.1, 0.2, 0.3}), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(RankDeflate, DropsSmallestExtent) {
  Matrix g = Matrix::Ones(2, 2);
  EXPECT_EQ(rank_deflate_degree(g, {0.0, 0.001}), std::vector<std::size_t>{1});
  EXPECT_EQ(rank_deflate_degree(g, {0.001, 0.0}), std::vector<std::size_t>{0});
}

TEST(RankDeflate, SkipsDropThatLowersRank) {
  // columns 0 and 1 are parallel, 2 is independent and has the smallest extent
  Matrix v(3, 3);
  v << 1, 2, 0, 0, 0, 1, 0, 0, 0;
  const Matrix g = v.transpose() * v;
  EXPECT_EQ(rank_deflate_degree(g, {0.5, 0.2, 0.0}), (std::vector<std::size_t>{0, 2}));
}

TEST(RankDeflate, SizeMismatch) { EXPECT_THROW(rank_deflate_degree(Matrix::Identity(2, 2), {1.0}), DimensionError); }

TEST(GradientResiduals, Examples) {
  Matrix t(2, 2), a(2, 2);
  t << 2, 0, 0, 3;
  a << 1, 0, 1, 0;
  const auto r = gradient_residuals(t, {&a});
  EXPECT_NEAR(r[0], 0.0, 1e-15);
  EXPECT_NEAR(r[1], 3.0, 1e-15);
}

TEST(ReduceProperty, ProductsWithKeptGeneratorsAreRemoved) {
  Gen g(41);
  int constructed = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 3));
    const PointSet x = g.points(static_cast<std::size_t>(g.integer(4, 12)), n);
    const auto m = fit(x, {});
    const auto r = reduce_basis(m, x);
    if (r.kept.empty()) continue;
    const Matrix pts = to_model_coordinates(m, x);
    std::vector<ExternalPolynomial> extra;
    for (int k = 0; k < 4; ++k) {
      const auto& h = r.kept[g.index(r.kept.size())];
      DensePolynomial q = g.poly(n, g.integer(1, 2));
      if (q.degree() < 1) q = poly_add(q, DensePolynomial::variable(n, 0));
      const DensePolynomial prod = poly_mul(expand(m, h), q);
      extra.push_back({prod.degree(), oracle_gradients(prod, pts)});
    }
    std::vector<ExternalVerdict> v;
    reduce_basis(m, x, extra, v);
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_TRUE(v[k].removed) << "trial " << trial << " residual " << v[k].max_residual;
      ++constructed;
    }
  }
  EXPECT_GE(constructed, 60);
}

TEST(ReduceProperty, ConservativeAndIdempotent) {
  Gen g(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 4));
    const PointSet x = g.points(static_cast<std::size_t>(g.integer(2, 12)), n);
    const auto kind = trial % 2 == 0 ? NormKind::Gradient : NormKind::Identity;
    const auto m = fit(x, with(kind));
    const auto r = reduce_basis(m, x);
    for (const auto& rm : r.removed) {
      EXPECT_LE(rm.max_residual, r.threshold);
      EXPECT_EQ(rm.residuals.size(), x.size());
    }
    std::size_t deflated = 0;
    for (const auto& s : r.rank_deflated) deflated += s.removed.size();
    EXPECT_EQ(r.kept.size() + r.removed.size() + deflated, m.count(Tag::G));
    EXPECT_EQ(reduce_basis(m, x), r);
  }
}

TEST(ReduceProperty, OrderInsensitiveWithinDegree) {
  Gen g(43);
  int swapped = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 3));
    const PointSet x = g.points(static_cast<std::size_t>(g.integer(4, 12)), n);
    const auto m = fit(x, {});
    for (int t = 1; t <= m.max_degree(); ++t) {
      const auto cols = m.record(t).columns(Tag::G);
      if (cols.size() < 2) continue;
      BasisModel p = m;
      auto& rec = p.degrees[static_cast<std::size_t>(t - 1)];
      rec.eigvecs.col(static_cast<Eigen::Index>(cols.front())).swap(rec.eigvecs.col(static_cast<Eigen::Index>(cols.back())));
      std::swap(rec.eigvals(static_cast<Eigen::Index>(cols.front())), rec.eigvals(static_cast<Eigen::Index>(cols.back())));
      const auto ra = reduce_basis(m, x);
      const auto rb = reduce_basis(p, x);
      EXPECT_EQ(kept_per_degree(ra), kept_per_degree(rb));
      const auto ga = gradient(m, ra.kept, x);
      const auto gb = gradient(p, rb.kept, x);
      for (std::size_t i = 0; i < x.size(); ++i) {
        Matrix a(n, ga.size()), b(n, gb.size());
        for (std::size_t k = 0; k < ga.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = ga[k].row(static_cast<Eigen::Index>(i)).transpose();
        for (std::size_t k = 0; k < gb.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = gb[k].row(static_cast<Eigen::Index>(i)).transpose();
        EXPECT_LE(subspace_gap(a, b), 1e-6);
      }
      ++swapped;
      break;
    }
  }
  EXPECT_GE(swapped, 5);
}
