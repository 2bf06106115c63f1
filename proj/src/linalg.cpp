#include "avi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace avi {

namespace {

constexpr double kAsymmetryTol = 1e-10;

void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  if (a.size() == 0) return;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol * scale) {
    throw DimensionError(std::string(what) + ": matrix is not symmetric");
  }
}

// Eigen returns ascending order; we want descending.
EigResult descending(const Eigen::SelfAdjointEigenSolver<Matrix>& es) {
  const Eigen::Index n = es.eigenvalues().size();
  EigResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(es.eigenvectors().rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = es.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  out.retained_rank = static_cast<std::size_t>(n);
  return out;
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

void normalize_column_signs(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      // strict comparison keeps the first index among exact ties
      if (std::abs(v(i, j)) > mag) {
        mag = std::abs(v(i, j));
        best = i;
      }
    }
    if (v.rows() > 0 && v(best, j) < 0.0) v.col(j) = -v.col(j);
  }
}

EigResult sym_eig(const Matrix& a) {
  require_symmetric(a, "sym_eig");
  if (!all_finite(a)) throw std::invalid_argument("sym_eig: non-finite entry");
  if (a.size() == 0) return {};
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  EigResult out = descending(es);
  normalize_column_signs(out.eigenvectors);
  return out;
}

EigResult gen_sym_eig(const Matrix& a, const Matrix& b, double rank_tol) {
  require_symmetric(a, "gen_sym_eig(A)");
  require_symmetric(b, "gen_sym_eig(B)");
  if (a.rows() != b.rows()) throw DimensionError("gen_sym_eig: A and B differ in size");
  if (!all_finite(a) || !all_finite(b)) throw std::invalid_argument("gen_sym_eig: non-finite entry");

  const Eigen::Index dim = a.rows();
  EigResult out;
  out.eigenvectors.resize(dim, 0);
  out.eigenvalues.resize(0);
  if (dim == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> bes(0.5 * (b + b.transpose()));
  const Vector& sigma = bes.eigenvalues();  // ascending
  const double sigma_max = sigma(dim - 1);
  if (!(sigma_max > 0.0)) return out;

  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = dim - 1; j >= 0; --j) {
    if (sigma(j) > rank_tol * sigma_max) keep.push_back(j);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  Matrix whiten(dim, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    whiten.col(c) = bes.eigenvectors().col(keep[c]) / std::sqrt(sigma(keep[c]));
  }

  Matrix reduced = whiten.transpose() * a * whiten;
  reduced = 0.5 * (reduced + reduced.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> res(reduced);
  EigResult inner = descending(res);

  out.eigenvalues = inner.eigenvalues;
  out.eigenvectors = whiten * inner.eigenvectors;
  out.retained_rank = static_cast<std::size_t>(r);
  normalize_column_signs(out.eigenvectors);
  return out;
}

LstsqResult lstsq(const Matrix& m, const Matrix& y, double rank_tol) {
  if (m.rows() != y.rows()) throw DimensionError("lstsq: row counts differ");
  LstsqResult out;
  out.solution = Matrix::Zero(m.cols(), y.cols());
  if (m.size() == 0) {
    out.residual = y.norm();
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax > 0.0) {
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rank_tol * smax) inv(i) = 1.0 / s(i);
    }
    out.solution = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * y);
  }
  out.residual = (m * out.solution - y).norm();
  return out;
}

std::size_t numerical_rank(const Matrix& m, double rank_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0)) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rank_tol * s(0)) ++r;
  }
  return r;
}

Matrix orthonormal_basis(const Matrix& m, double rank_tol) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s(0) > 0.0) {
    while (r < s.size() && s(r) > rank_tol * s(0)) ++r;
  }
  return svd.matrixU().leftCols(r);
}

std::vector<double> principal_angles(const Matrix& a, const Matrix& b, double rank_tol) {
  if (a.rows() != b.rows()) throw DimensionError("principal_angles: row counts differ");
  const Matrix qa = orthonormal_basis(a, rank_tol);
  const Matrix qb = orthonormal_basis(b, rank_tol);
  const Eigen::Index k = std::min(qa.cols(), qb.cols());
  if (k == 0) return {};
  // Use the smaller basis as the probe so every angle is defined.
  const Matrix& big = qa.cols() >= qb.cols() ? qa : qb;
  const Matrix& small = qa.cols() >= qb.cols() ? qb : qa;
  const Matrix cross = big.transpose() * small;
  const Matrix resid = small - big * cross;
  Eigen::JacobiSVD<Matrix> cs(cross);
  Eigen::JacobiSVD<Matrix> ss(resid);
  // cosines descending pair with sines ascending
  std::vector<double> angles(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = std::min(1.0, cs.singularValues()(i));
    const Eigen::Index si = k - 1 - i;
    const double s = si < ss.singularValues().size() ? std::min(1.0, ss.singularValues()(si)) : 0.0;
    angles[static_cast<std::size_t>(i)] = std::atan2(s, c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double subspace_gap(const Matrix& a, const Matrix& b, double rank_tol) {
  if (a.rows() != b.rows()) throw DimensionError("subspace_gap: row counts differ");
  const Matrix qa = orthonormal_basis(a, rank_tol);
  const Matrix qb = orthonormal_basis(b, rank_tol);
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  const Matrix resid = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Matrix> svd(resid);
  return std::min(1.0, svd.singularValues()(0));
}

void canonicalize_eigenspace(Matrix& v, const std::vector<std::size_t>& cols, const Matrix& b) {
  const auto k = static_cast<Eigen::Index>(cols.size());
  if (k < 2) return;
  const Eigen::Index m = v.rows();
  Matrix rows(k, m);
  for (Eigen::Index i = 0; i < k; ++i) rows.row(i) = v.col(static_cast<Eigen::Index>(cols[i])).transpose();

  constexpr double kTieTol = 1e-8;
  std::vector<Eigen::Index> pivots;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index best_col = -1;
    double best_norm = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double nrm = rows.col(j).tail(k - r).norm();
      if (best_col < 0 || nrm > best_norm * (1.0 + kTieTol)) {
        best_col = j;
        best_norm = nrm;
      }
    }
    if (best_col < 0 || !(best_norm > 0.0)) return;  // rank-deficient input, leave untouched
    Eigen::Index prow = r;
    (rows.col(best_col).tail(k - r).cwiseAbs()).maxCoeff(&prow);
    prow += r;
    rows.row(r).swap(rows.row(prow));
    rows.row(r) /= rows(r, best_col);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i != r) rows.row(i) -= rows(i, best_col) * rows.row(r);
    }
    used[static_cast<std::size_t>(best_col)] = true;
    pivots.push_back(best_col);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return pivots[static_cast<std::size_t>(x)] < pivots[static_cast<std::size_t>(y)];
  });

  Matrix basis(m, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector w = rows.row(order[static_cast<std::size_t>(i)]).transpose();
    for (Eigen::Index j = 0; j < i; ++j) {
      w -= (basis.col(j).dot(b * w)) * basis.col(j);
    }
    const double nrm2 = w.dot(b * w);
    if (!(nrm2 > 0.0)) return;
    basis.col(i) = w / std::sqrt(nrm2);
  }
  normalize_column_signs(basis);
  for (Eigen::Index i = 0; i < k; ++i) v.col(static_cast<Eigen::Index>(cols[i])) = basis.col(i);
}

}  // namespace avi
