#include "avi/polynomial.hpp"

#include <limits>

namespace avi {

std::size_t monomial_count(std::size_t n, std::size_t t) {
  // C(n + t, t) computed incrementally; each partial product is itself a
  // binomial coefficient so the division is exact.
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t result = 1;
  for (std::size_t i = 1; i <= t; ++i) {
    const std::size_t num = n + i;
    if (result > kMax / num) return kMax;
    result = result * num / i;
  }
  return result;
}

namespace {

void append_degree(std::size_t n, int remaining, std::size_t k, Exponent& cur, std::vector<Exponent>& out) {
  if (k + 1 == n) {
    cur[k] = remaining;
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[k] = e;
    append_degree(n, remaining - e, k + 1, cur, out);
  }
}

}  // namespace

std::vector<Exponent> graded_monomials(std::size_t n, std::size_t t) {
  if (n == 0) throw std::invalid_argument("graded_monomials: n must be positive");
  std::vector<Exponent> out;
  Exponent cur(n, 0);
  for (std::size_t d = 0; d <= t; ++d) append_degree(n, static_cast<int>(d), 0, cur, out);
  return out;
}

std::vector<double> coefficient_vector(const DensePolynomial& p, std::size_t degree_bound) {
  if (p.degree() > static_cast<int>(degree_bound)) {
    throw std::domain_error("coefficient_vector: polynomial degree exceeds the bound");
  }
  const auto monomials = graded_monomials(p.num_vars(), degree_bound);
  std::vector<double> out(monomials.size(), 0.0);
  for (std::size_t i = 0; i < monomials.size(); ++i) out[i] = p.coefficient(monomials[i]);
  return out;
}

double coefficient_dot(const DensePolynomial& a, const DensePolynomial& b) {
  if (a.num_vars() != b.num_vars()) throw std::invalid_argument("coefficient_dot: num_vars mismatch");
  // both maps are ordered by exponent, so a merge walk suffices
  double sum = 0.0;
  auto ia = a.terms().begin();
  auto ib = b.terms().begin();
  while (ia != a.terms().end() && ib != b.terms().end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

std::vector<double> finite_diff_gradient(const ScalarField& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double fp = f(probe);
    probe[k] = x[k] - h;
    const double fm = f(probe);
    probe[k] = x[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace avi
