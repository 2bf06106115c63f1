#pragma once

// Shared fixtures and hand-rolled generators for the test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "avi/model.hpp"
#include "avi/polynomial.hpp"
#include "avi/sbc.hpp"

namespace avi::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    }
    return m;
  }

  PointSet points(std::size_t count, std::size_t dim, double lo = -1.0, double hi = 1.0) {
    return PointSet(matrix(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim), lo, hi));
  }

  /// Random polynomial of total degree <= deg with integer coefficients in
  /// [-3, 3]; about half the monomials are present.
  DensePolynomial poly(std::size_t n, int deg) {
    DensePolynomial p(n);
    for (const auto& e : graded_monomials(n, static_cast<std::size_t>(deg))) {
      if (integer(0, 1) == 1) p.add_term(e, static_cast<double>(integer(-3, 3)));
    }
    return p;
  }

  RationalPolynomial rational_poly(std::size_t n, int deg) {
    RationalPolynomial p(n);
    for (const auto& e : graded_monomials(n, static_cast<std::size_t>(deg))) {
      if (integer(0, 1) == 1) p.add_term(e, Rational(integer(-5, 5), integer(1, 4)));
    }
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

inline PointSet four_points() {
  Matrix m(4, 2);
  m << 1, 0, 0, 1, -1, 0, 0, -1;
  return PointSet(m);
}

inline DensePolynomial circle() { return DensePolynomial(2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -1.0}}); }
inline DensePolynomial xy() { return DensePolynomial(2, {{{1, 1}, 1.0}}); }

/// Largest coefficient difference between p and c*q after scaling both to
/// unit coefficient norm and aligning signs.
inline double aligned_coef_error(const DensePolynomial& p, const DensePolynomial& q) {
  const double np = std::sqrt(coefficient_dot(p, p));
  const double nq = std::sqrt(coefficient_dot(q, q));
  if (np == 0.0 || nq == 0.0) return np == nq ? 0.0 : 1.0;
  const double sign = coefficient_dot(p, q) >= 0.0 ? 1.0 : -1.0;
  const DensePolynomial d = poly_sub(poly_scale(p, 1.0 / np), poly_scale(q, sign / nq));
  double worst = 0.0;
  for (const auto& [e, c] : d.terms()) worst = std::max(worst, std::abs(c));
  return worst;
}

inline std::vector<double> row_of(const Matrix& m, Eigen::Index i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) r[static_cast<std::size_t>(k)] = m(i, k);
  return r;
}

/// Vertically stacked evaluation matrix of all F-handles.
inline Matrix f_eval(const BasisModel& m, const PointSet& x) {
  const auto hs = m.handles(Tag::F);
  return evaluate(m, hs, x);
}

}  // namespace avi::testing
