#include "avi/reduction.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <stdexcept>

namespace avi {

bool operator==(const RemovedPolynomial& a, const RemovedPolynomial& b) {
  return a.handle == b.handle && a.max_residual == b.max_residual && a.residuals == b.residuals;
}

bool operator==(const DeflationStep& a, const DeflationStep& b) {
  return a.degree == b.degree && a.before == b.before && a.rank == b.rank && a.removed == b.removed;
}

bool operator==(const ReductionReport& a, const ReductionReport& b) {
  return a.kept == b.kept && a.removed == b.removed && a.rank_deflated == b.rank_deflated && a.threshold == b.threshold;
}

namespace {

std::size_t gram_rank(const Matrix& gram, const std::vector<std::size_t>& idx, double rank_tol) {
  if (idx.empty()) return 0;
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      sub(i, j) = gram(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                       static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    }
  }
  const Vector ev = sym_eig(sub).eigenvalues;
  if (!(ev(0) > 0.0)) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > rank_tol * ev(0)) ++r;
  }
  return r;
}

}  // namespace

std::vector<std::size_t> rank_deflate_degree(const Matrix& gram, const std::vector<double>& extents, double rank_tol) {
  if (gram.rows() != gram.cols() || static_cast<std::size_t>(gram.rows()) != extents.size()) {
    throw DimensionError("rank_deflate_degree: Gram matrix and extents disagree in size");
  }
  std::vector<std::size_t> kept(extents.size());
  std::iota(kept.begin(), kept.end(), 0);
  const std::size_t r = gram_rank(gram, kept, rank_tol);
  std::size_t excess = kept.size() - r;
  if (excess == 0) return kept;

  std::vector<std::size_t> order = kept;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return extents[a] < extents[b]; });
  for (auto victim : order) {
    if (excess == 0) break;
    std::vector<std::size_t> trial;
    for (auto i : kept) {
      if (i != victim) trial.push_back(i);
    }
    if (gram_rank(gram, trial, rank_tol) == r) {
      kept = std::move(trial);
      --excess;
    }
  }
  return kept;
}

std::vector<double> gradient_residuals(const Matrix& target, const std::vector<const Matrix*>& generators,
                                       double rank_tol) {
  const Eigen::Index rows = target.rows();
  const Eigen::Index n = target.cols();
  std::vector<double> res(static_cast<std::size_t>(rows));
  Matrix m(n, static_cast<Eigen::Index>(generators.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < generators.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = generators[j]->row(i).transpose();
    res[static_cast<std::size_t>(i)] = lstsq(m, target.row(i).transpose(), rank_tol).residual;
  }
  return res;
}

ReductionReport reduce_basis(const BasisModel& model, const PointSet& x, const std::vector<ExternalPolynomial>& extra,
                             std::vector<ExternalVerdict>& verdicts, double threshold, double rank_tol) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("reduction threshold must be >= 0");
  ReductionReport report;
  report.threshold = threshold;

  const auto g_handles = model.handles(Tag::G);
  const auto grads = gradient(model, g_handles, x);

  std::vector<bool> alive(g_handles.size(), true);
  if (!model.normalization.is_gradient_family()) {
    for (const auto& rec : model.degrees) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < g_handles.size(); ++i) {
        if (g_handles[i].degree == rec.degree) idx.push_back(i);
      }
      if (idx.size() < 2) continue;
      const auto k = static_cast<Eigen::Index>(idx.size());
      Matrix gram(k, k);
      std::vector<double> extents;
      for (Eigen::Index a = 0; a < k; ++a) {
        const Matrix& ga = grads[idx[static_cast<std::size_t>(a)]];
        for (Eigen::Index b = 0; b <= a; ++b) {
          gram(a, b) = gram(b, a) = ga.cwiseProduct(grads[idx[static_cast<std::size_t>(b)]]).sum();
        }
        const auto col = static_cast<Eigen::Index>(g_handles[idx[static_cast<std::size_t>(a)]].column);
        extents.push_back(std::sqrt(std::max(rec.eigvals(col), 0.0)));
      }
      const auto survivors = rank_deflate_degree(gram, extents, rank_tol);
      if (survivors.size() == idx.size()) continue;
      DeflationStep step;
      step.degree = rec.degree;
      step.before = idx.size();
      step.rank = survivors.size();
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (std::find(survivors.begin(), survivors.end(), j) == survivors.end()) {
          alive[idx[j]] = false;
          step.removed.push_back(g_handles[idx[j]]);
        }
      }
      report.rank_deflated.push_back(std::move(step));
    }
  }

  std::vector<std::size_t> kept_idx;
  auto generators_below = [&](int degree) {
    std::vector<const Matrix*> gens;
    for (auto i : kept_idx) {
      if (g_handles[i].degree < degree) gens.push_back(&grads[i]);
    }
    return gens;
  };

  for (std::size_t i = 0; i < g_handles.size(); ++i) {
    if (!alive[i]) continue;
    const auto gens = generators_below(g_handles[i].degree);
    if (gens.empty()) {
      kept_idx.push_back(i);
      continue;
    }
    auto res = gradient_residuals(grads[i], gens, rank_tol);
    const double worst = *std::max_element(res.begin(), res.end());
    if (worst <= threshold) {
      report.removed.push_back({g_handles[i], worst, std::move(res)});
    } else {
      kept_idx.push_back(i);
    }
  }
  for (auto i : kept_idx) report.kept.push_back(g_handles[i]);

  verdicts.clear();
  for (const auto& e : extra) {
    if (e.gradients.rows() != static_cast<Eigen::Index>(x.size()) ||
        e.gradients.cols() != static_cast<Eigen::Index>(model.num_vars)) {
      throw DimensionError("external polynomial gradients have the wrong shape");
    }
    const auto gens = generators_below(e.degree);
    ExternalVerdict v;
    if (!gens.empty()) {
      const auto res = gradient_residuals(e.gradients, gens, rank_tol);
      v.max_residual = *std::max_element(res.begin(), res.end());
      v.removed = v.max_residual <= threshold;
    } else {
      v.max_residual = e.gradients.rowwise().norm().maxCoeff();
    }
    verdicts.push_back(v);
  }
  return report;
}

ReductionReport reduce_basis(const BasisModel& model, const PointSet& x, double threshold, double rank_tol) {
  std::vector<ExternalVerdict> unused;
  return reduce_basis(model, x, {}, unused, threshold, rank_tol);
}

}  // namespace avi
