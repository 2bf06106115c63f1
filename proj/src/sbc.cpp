#include "avi/sbc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace avi {

Matrix normalization_matrix(const CandidateSet& cands, const NormalizationKind& kind) {
  const Eigen::Index c = cands.jet.cols();
  switch (kind.kind) {
    case NormKind::Identity:
      return Matrix::Identity(c, c);
    case NormKind::Coefficient: {
      if (static_cast<Eigen::Index>(cands.expansions.size()) != c) {
        throw std::invalid_argument("coefficient normalization needs candidate expansions");
      }
      Matrix b(c, c);
      for (Eigen::Index i = 0; i < c; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          b(i, j) = b(j, i) = coefficient_dot(cands.expansions[static_cast<std::size_t>(i)],
                                              cands.expansions[static_cast<std::size_t>(j)]);
        }
      }
      return b;
    }
    case NormKind::Gradient: {
      if (!cands.jet.has_gradients()) throw std::invalid_argument("gradient normalization needs candidate gradients");
      Matrix b = Matrix::Zero(c, c);
      for (const auto& g : cands.jet.grads) b.noalias() += g.transpose() * g;
      return 0.5 * (b + b.transpose());
    }
    case NormKind::SubsampledGradient: {
      if (!cands.jet.has_gradients()) throw std::invalid_argument("gradient normalization needs candidate gradients");
      Matrix b = Matrix::Zero(c, c);
      const auto rows = static_cast<Eigen::Index>(kind.point_subset.size());
      for (auto k : kind.var_subset) {
        if (k >= cands.jet.grads.size()) throw std::invalid_argument("variable subset index out of range");
        const Matrix& g = cands.jet.grads[k];
        Matrix sub(rows, c);
        for (Eigen::Index r = 0; r < rows; ++r) {
          const auto i = static_cast<Eigen::Index>(kind.point_subset[static_cast<std::size_t>(r)]);
          if (i >= g.rows()) throw std::invalid_argument("point subset index out of range");
          sub.row(r) = g.row(i);
        }
        b.noalias() += sub.transpose() * sub;
      }
      return 0.5 * (b + b.transpose());
    }
  }
  throw std::logic_error("unhandled normalization");
}

Orthogonalized orthogonalize(const Matrix& pre_eval, const Matrix& f_eval, double rank_tol) {
  if (pre_eval.rows() != f_eval.rows()) throw DimensionError("orthogonalize: row counts differ");
  Orthogonalized out;
  out.weights = lstsq(f_eval, pre_eval, rank_tol).solution;
  out.candidates = pre_eval - f_eval * out.weights;
  return out;
}

double zero_extent_threshold(const Vector& eigvals) {
  double top = 0.0;
  for (Eigen::Index i = 0; i < eigvals.size(); ++i) top = std::max(top, eigvals(i));
  return kZeroExtentTol * std::max(std::sqrt(top), 1.0);
}

std::vector<Tag> classify(const Vector& eigvals, double epsilon) {
  const double zero = zero_extent_threshold(eigvals);
  std::vector<Tag> tags(static_cast<std::size_t>(eigvals.size()));
  for (Eigen::Index i = 0; i < eigvals.size(); ++i) {
    const double s = std::sqrt(std::max(eigvals(i), 0.0));
    tags[static_cast<std::size_t>(i)] = (s <= epsilon || s <= zero) ? Tag::G : Tag::F;
  }
  return tags;
}

bool partition_consistent(const BasisModel& model) {
  for (const auto& rec : model.degrees) {
    if (classify(rec.eigvals, model.epsilon) != rec.partition) return false;
  }
  return true;
}

double constant_for(const NormalizationKind& kind, const Matrix& points) {
  switch (kind.kind) {
    case NormKind::Identity:
      return 1.0 / std::sqrt(static_cast<double>(points.rows()));
    case NormKind::Coefficient:
      return 1.0;
    case NormKind::Gradient:
    case NormKind::SubsampledGradient: {
      const double m = points.cwiseAbs().mean();
      // all-zero data would give m = 0, which is not a valid constant
      return m > 0.0 ? m : 1.0;
    }
  }
  return 1.0;
}

namespace {

// Eigenvalues as squared evaluation norms ||C v||^2, sorted descending. Taking
// them from C directly keeps tiny extents accurate; the solver's eigenvalues
// of C^T C only resolve sqrt(lambda) to about 1e-8.
void refresh_extents(EigResult& eig, const Matrix& c) {
  const Eigen::Index k = eig.eigenvalues.size();
  Vector lam(k);
  for (Eigen::Index i = 0; i < k; ++i) lam(i) = (c * eig.eigenvectors.col(i)).squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return lam(x) > lam(y); });
  Matrix v(eig.eigenvectors.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    v.col(i) = eig.eigenvectors.col(order[static_cast<std::size_t>(i)]);
    eig.eigenvalues(i) = lam(order[static_cast<std::size_t>(i)]);
  }
  eig.eigenvectors = std::move(v);
}

// Groups consecutive extents that agree up to the numerical-zero tolerance and
// fixes a canonical basis inside each group.
void canonicalize_clusters(EigResult& eig, const Matrix& c, const Matrix& b) {
  refresh_extents(eig, c);
  const Eigen::Index k = eig.eigenvalues.size();
  if (k < 2) return;
  const double tol = zero_extent_threshold(eig.eigenvalues);
  Eigen::Index start = 0;
  auto root = [&](Eigen::Index i) { return std::sqrt(eig.eigenvalues(i)); };
  for (Eigen::Index i = 1; i <= k; ++i) {
    if (i < k && root(i - 1) - root(i) <= tol) continue;
    if (i - start > 1) {
      std::vector<std::size_t> cols(static_cast<std::size_t>(i - start));
      std::iota(cols.begin(), cols.end(), static_cast<std::size_t>(start));
      canonicalize_eigenspace(eig.eigenvectors, cols, b);
    }
    start = i;
  }
  refresh_extents(eig, c);
}

}  // namespace

BasisModel fit(const PointSet& x, const FitConfig& cfg) {
  if (x.size() < 1 || x.dim() < 1) throw std::invalid_argument("empty point set");
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon)) throw std::invalid_argument("epsilon must be >= 0");
  if (cfg.max_degree < 0) throw std::invalid_argument("max_degree must be >= 1");
  if (!(cfg.rank_tol >= 0.0)) throw std::invalid_argument("rank_tol must be >= 0");

  PointSet pts = x;
  if ((cfg.center || cfg.unit_mean_norm) && !x.preprocessing.active()) pts = x.preprocessed(cfg.center, cfg.unit_mean_norm);

  const std::size_t n = pts.dim();
  const Matrix& p = pts.points;
  cfg.normalization.validate(n, pts.size());

  BasisModel model;
  model.num_vars = n;
  model.epsilon = cfg.epsilon;
  model.normalization = cfg.normalization;
  model.preprocessing = pts.preprocessing;
  model.constant_value = constant_for(cfg.normalization, p);

  const bool grads = cfg.normalization.is_gradient_family();
  const bool polys = cfg.normalization.kind == NormKind::Coefficient;
  const int cap = cfg.max_degree > 0 ? cfg.max_degree : static_cast<int>(pts.size());

  Jet f_accum = engine::constant_jet(model.constant_value, p, grads);
  Jet f1;
  Jet f_prev = f_accum;
  engine::PolyList pf_accum, pf1, pf_prev;
  if (polys) {
    pf_accum = {DensePolynomial::constant(n, model.constant_value)};
    pf_prev = pf_accum;
  }

  for (int t = 1; t <= cap; ++t) {
    DegreeRecord rec;
    rec.degree = t;
    if (t == 1) {
      for (std::size_t k = 0; k < n; ++k) rec.parents.push_back({k, 0});
    } else {
      const auto n1 = static_cast<std::size_t>(f1.cols());
      const auto np = static_cast<std::size_t>(f_prev.cols());
      for (std::size_t a = 0; a < n1; ++a) {
        for (std::size_t b = 0; b < np; ++b) rec.parents.push_back({a, b});
      }
    }

    const Jet pre = engine::pre_candidates(t, rec.parents, p, f1, f_prev, grads);
    rec.ortho_weights = orthogonalize(pre.values, f_accum.values, cfg.rank_tol).weights;
    CandidateSet cands;
    cands.jet = engine::orthogonalized(pre, f_accum, rec.ortho_weights);
    if (polys) {
      if (monomial_count(n, static_cast<std::size_t>(t)) > cfg.term_cap) {
        throw ExpansionLimitError("coefficient normalization at degree " + std::to_string(t) +
                                  " exceeds the expansion term cap");
      }
      cands.expansions = engine::orthogonalized_polys(engine::pre_candidate_polys(t, n, rec.parents, pf1, pf_prev),
                                                      pf_accum, rec.ortho_weights);
    }

    const Matrix a = cands.jet.values.transpose() * cands.jet.values;
    const Matrix b = normalization_matrix(cands, cfg.normalization);
    EigResult eig = gen_sym_eig(0.5 * (a + a.transpose()), b, cfg.rank_tol);
    canonicalize_clusters(eig, cands.jet.values, b);

    rec.eigvecs = eig.eigenvectors;
    rec.eigvals = eig.eigenvalues;
    rec.partition = classify(rec.eigvals, cfg.epsilon);
    rec.dropped_directions = rec.parents.size() - eig.retained_rank;

    const Jet out = engine::combine(cands.jet, rec.eigvecs);
    const auto fcols = rec.columns(Tag::F);
    Jet f_new = engine::select_columns(out, fcols);
    if (polys) {
      const auto pout = engine::combine_polys(cands.expansions, rec.eigvecs, n);
      engine::PolyList pf_new;
      for (auto c : fcols) pf_new.push_back(pout[c]);
      if (t == 1) pf1 = pf_new;
      pf_accum.insert(pf_accum.end(), pf_new.begin(), pf_new.end());
      pf_prev = std::move(pf_new);
    }
    if (t == 1) f1 = f_new;
    engine::append_columns(f_accum, f_new);
    f_prev = std::move(f_new);
    model.degrees.push_back(std::move(rec));

    if (fcols.empty()) return model;
  }
  model.truncated = true;
  return model;
}

}  // namespace avi
