#pragma once

// Dense multivariate polynomials over an exponent map. This is the symbolic
// side of the library: coefficient expansion of fitted bases and the
// independent oracle the tests compare the numerical recursions against.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace avi {

using Exponent = std::vector<int>;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.convert_to<double>(); }

template <class T>
class BasicPolynomial {
 public:
  using Terms = std::map<Exponent, T>;

  BasicPolynomial() = default;
  explicit BasicPolynomial(std::size_t num_vars) : num_vars_(num_vars) {}
  BasicPolynomial(std::size_t num_vars, std::initializer_list<std::pair<Exponent, T>> terms)
      : num_vars_(num_vars) {
    for (const auto& [e, c] : terms) add_term(e, c);
  }

  static BasicPolynomial constant(std::size_t num_vars, T value) {
    BasicPolynomial p(num_vars);
    p.add_term(Exponent(num_vars, 0), value);
    return p;
  }

  static BasicPolynomial variable(std::size_t num_vars, std::size_t k) {
    if (k >= num_vars) throw std::out_of_range("variable index out of range");
    Exponent e(num_vars, 0);
    e[k] = 1;
    BasicPolynomial p(num_vars);
    p.add_term(e, T(1));
    return p;
  }

  std::size_t num_vars() const { return num_vars_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  /// Total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int v : e) s += v;
      d = std::max(d, s);
    }
    return d;
  }

  T coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? T(0) : it->second;
  }

  /// Accumulates `c` onto the monomial `e`, dropping the entry if it cancels.
  void add_term(const Exponent& e, const T& c) {
    if (e.size() != num_vars_) throw std::invalid_argument("exponent length does not match num_vars");
    for (int v : e) {
      if (v < 0) throw std::invalid_argument("negative exponent");
    }
    if (c == T(0)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == T(0)) terms_.erase(it);
    }
  }

  friend bool operator==(const BasicPolynomial& a, const BasicPolynomial& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

 private:
  std::size_t num_vars_ = 0;
  Terms terms_;
};

using DensePolynomial = BasicPolynomial<double>;
using RationalPolynomial = BasicPolynomial<Rational>;

namespace detail {
template <class T>
void require_same_vars(const BasicPolynomial<T>& a, const BasicPolynomial<T>& b) {
  if (a.num_vars() != b.num_vars()) throw std::invalid_argument("polynomials differ in num_vars");
}
}  // namespace detail

template <class T>
BasicPolynomial<T> poly_add(const BasicPolynomial<T>& a, const BasicPolynomial<T>& b) {
  detail::require_same_vars(a, b);
  BasicPolynomial<T> out = a;
  for (const auto& [e, c] : b.terms()) out.add_term(e, c);
  return out;
}

template <class T>
BasicPolynomial<T> poly_scale(const BasicPolynomial<T>& a, const T& s) {
  BasicPolynomial<T> out(a.num_vars());
  if (s == T(0)) return out;
  for (const auto& [e, c] : a.terms()) out.add_term(e, c * s);
  return out;
}

template <class T>
BasicPolynomial<T> poly_sub(const BasicPolynomial<T>& a, const BasicPolynomial<T>& b) {
  return poly_add(a, poly_scale(b, T(-1)));
}

template <class T>
BasicPolynomial<T> poly_mul(const BasicPolynomial<T>& a, const BasicPolynomial<T>& b) {
  detail::require_same_vars(a, b);
  BasicPolynomial<T> out(a.num_vars());
  Exponent e(a.num_vars());
  for (const auto& [ea, ca] : a.terms()) {
    for (const auto& [eb, cb] : b.terms()) {
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

/// Partial derivative with respect to variable `k` (zero-based).
template <class T>
BasicPolynomial<T> poly_diff(const BasicPolynomial<T>& p, std::size_t k) {
  if (k >= p.num_vars()) throw std::out_of_range("poly_diff: variable index out of range");
  BasicPolynomial<T> out(p.num_vars());
  for (const auto& [e, c] : p.terms()) {
    if (e[k] == 0) continue;
    Exponent d = e;
    d[k] -= 1;
    out.add_term(d, c * T(e[k]));
  }
  return out;
}

template <class T>
double poly_eval(const BasicPolynomial<T>& p, std::span<const double> x) {
  if (x.size() != p.num_vars()) throw std::invalid_argument("poly_eval: point dimension mismatch");
  double sum = 0.0;
  for (const auto& [e, c] : p.terms()) {
    double term = to_double(c);
    for (std::size_t k = 0; k < e.size(); ++k) {
      for (int i = 0; i < e[k]; ++i) term *= x[k];
    }
    sum += term;
  }
  return sum;
}

/// Exact evaluation for rational polynomials at rational points.
inline Rational poly_eval_exact(const RationalPolynomial& p, std::span<const Rational> x) {
  if (x.size() != p.num_vars()) throw std::invalid_argument("poly_eval_exact: point dimension mismatch");
  Rational sum = 0;
  for (const auto& [e, c] : p.terms()) {
    Rational term = c;
    for (std::size_t k = 0; k < e.size(); ++k) {
      for (int i = 0; i < e[k]; ++i) term *= x[k];
    }
    sum += term;
  }
  return sum;
}

template <class T>
std::vector<double> poly_gradient(const BasicPolynomial<T>& p, std::span<const double> x) {
  std::vector<double> g(p.num_vars());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = poly_eval(poly_diff(p, k), x);
  return g;
}

inline DensePolynomial to_dense(const RationalPolynomial& p) {
  DensePolynomial out(p.num_vars());
  for (const auto& [e, c] : p.terms()) out.add_term(e, to_double(c));
  return out;
}

/// Number of monomials of total degree <= t in n variables, saturating at
/// SIZE_MAX.
std::size_t monomial_count(std::size_t n, std::size_t t);

/// All exponents of total degree <= t, graded: degree 0 first, then degree 1,
/// and so on; within one degree, lexicographically descending.
std::vector<Exponent> graded_monomials(std::size_t n, std::size_t t);

/// Coefficients listed in graded_monomials order. Throws std::domain_error if
/// deg(p) > degree_bound.
std::vector<double> coefficient_vector(const DensePolynomial& p, std::size_t degree_bound);

/// Inner product of coefficient vectors without materialising them.
double coefficient_dot(const DensePolynomial& a, const DensePolynomial& b);

using ScalarField = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h.
std::vector<double> finite_diff_gradient(const ScalarField& f, std::span<const double> x, double h);

}  // namespace avi
