#include "avi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace avi {

namespace {

constexpr double kSubspaceTol = 1e-10;

std::vector<DegreeCounts> degree_counts(const BasisModel& m) {
  std::vector<DegreeCounts> out;
  for (const auto& rec : m.degrees) out.push_back({rec.count(Tag::G), rec.count(Tag::F)});
  return out;
}

std::vector<PolyHandle> degree_handles(const BasisModel& m, int degree, Tag kind) {
  std::vector<PolyHandle> out;
  if (degree > m.max_degree()) return out;
  for (auto c : m.record(degree).columns(kind)) out.push_back({degree, c, kind});
  return out;
}

struct Comparison {
  double gap = 0.0;
  double discrepancy = 0.0;
};

Comparison compare_spans(const Matrix& base, const Matrix& other) {
  if (base.cols() != other.cols()) return {1.0, 1.0};
  if (base.cols() == 0) return {};
  Comparison c;
  c.gap = subspace_gap(base, other, kSubspaceTol);
  const double scale = other.norm();
  c.discrepancy = scale > 0.0 ? lstsq(base, other, kSubspaceTol).residual / scale : 0.0;
  return c;
}

}  // namespace

double InvarianceReport::max_ratio_error() const {
  double worst = 0.0;
  const double a2 = alpha * alpha;
  for (const auto& per : eigenvalue_ratios) {
    for (double r : per) worst = std::max(worst, std::abs(r / a2 - 1.0));
  }
  return worst;
}

double InvarianceReport::max_gap() const {
  double worst = 0.0;
  for (const auto* v : {&translation_gap_g, &translation_gap_f, &scaling_gap_g, &scaling_gap_f}) {
    for (double g : *v) worst = std::max(worst, g);
  }
  return worst;
}

InvarianceReport invariance_report(const PointSet& x, const Vector& b, double alpha, double epsilon,
                                   const InvarianceOptions& opts) {
  if (alpha == 0.0 || !std::isfinite(alpha)) throw std::invalid_argument("scale factor must be nonzero");
  if (static_cast<std::size_t>(b.size()) != x.dim()) throw DimensionError("translation has wrong dimension");

  FitConfig cfg;
  cfg.epsilon = epsilon;
  cfg.normalization = opts.normalization;
  cfg.rank_tol = opts.rank_tol;
  const BasisModel base = fit(x, cfg);
  Matrix shifted = x.points;
  shifted.rowwise() -= b.transpose();
  const BasisModel translated = fit(PointSet(shifted), cfg);
  cfg.epsilon = std::abs(alpha) * epsilon;
  const BasisModel scaled = fit(PointSet(alpha * x.points), cfg);

  InvarianceReport rep;
  rep.alpha = alpha;
  rep.base = degree_counts(base);
  rep.translated = degree_counts(translated);
  rep.scaled = degree_counts(scaled);

  for (int t = 1; t <= std::min(base.max_degree(), scaled.max_degree()); ++t) {
    const Vector& lb = base.record(t).eigvals;
    const Vector& ls = scaled.record(t).eigvals;
    const double zero = zero_extent_threshold(lb);
    std::vector<double> ratios;
    for (Eigen::Index i = 0; i < std::min(lb.size(), ls.size()); ++i) {
      if (std::sqrt(lb(i)) > zero) ratios.push_back(ls(i) / lb(i));
    }
    rep.eigenvalue_ratios.push_back(std::move(ratios));
  }

  const std::size_t n = x.dim();
  const int top = std::max({base.max_degree(), translated.max_degree(), scaled.max_degree()});
  std::size_t probes = opts.probes;
  if (probes == 0) probes = std::min<std::size_t>(4 * monomial_count(n, static_cast<std::size_t>(top)) + 20, 4000);
  const Vector lo = x.points.colwise().minCoeff().transpose();
  const Vector hi = x.points.colwise().maxCoeff().transpose();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix p(static_cast<Eigen::Index>(probes), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      const double pad = 0.1 * (hi(k) - lo(k)) + 0.1;
      p(i, k) = lo(k) - pad + (hi(k) - lo(k) + 2.0 * pad) * unit(rng);
    }
  }
  const PointSet probe_base(p);
  Matrix p_shift = p;
  p_shift.rowwise() -= b.transpose();
  const PointSet probe_shift(p_shift);
  const PointSet probe_scaled(alpha * p);

  for (int t = 1; t <= top; ++t) {
    for (Tag kind : {Tag::G, Tag::F}) {
      const auto hb = degree_handles(base, t, kind);
      const auto ht = degree_handles(translated, t, kind);
      const auto hs = degree_handles(scaled, t, kind);
      const Matrix eb = evaluate(base, hb, probe_base);
      const Comparison ct = compare_spans(eb, evaluate(translated, ht, probe_shift));
      const Comparison cs = compare_spans(eb, evaluate(scaled, hs, probe_scaled));
      (kind == Tag::G ? rep.translation_gap_g : rep.translation_gap_f).push_back(ct.gap);
      (kind == Tag::G ? rep.scaling_gap_g : rep.scaling_gap_f).push_back(cs.gap);
      rep.max_eval_discrepancy = std::max({rep.max_eval_discrepancy, ct.discrepancy, cs.discrepancy});
    }
  }
  return rep;
}

std::vector<double> g_norms(const BasisModel& model, const PointSet& x, const NormalizationKind& kind,
                            std::size_t term_cap) {
  const auto hs = model.handles(Tag::G);
  std::vector<double> out;
  out.reserve(hs.size());
  switch (kind.kind) {
    case NormKind::Identity:
      for (const auto& h : hs) out.push_back(model.record(h.degree).eigvecs.col(static_cast<Eigen::Index>(h.column)).norm());
      break;
    case NormKind::Coefficient:
      for (const auto& p : expand(model, hs, term_cap)) out.push_back(std::sqrt(coefficient_dot(p, p)));
      break;
    case NormKind::Gradient:
      for (const auto& g : gradient(model, hs, x)) out.push_back(g.norm());
      break;
    case NormKind::SubsampledGradient:
      kind.validate(model.num_vars, x.size());
      for (const auto& g : gradient(model, hs, x)) {
        double s = 0.0;
        for (auto i : kind.point_subset) {
          for (auto k : kind.var_subset) {
            const double v = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
            s += v * v;
          }
        }
        out.push_back(std::sqrt(s));
      }
      break;
  }
  return out;
}

double n_ratio(const BasisModel& model, const PointSet& x, const NormalizationKind& kind, std::size_t term_cap) {
  const auto norms = g_norms(model, x, kind, term_cap);
  if (norms.empty()) throw std::invalid_argument("model has no vanishing polynomials");
  const auto [mn, mx] = std::minmax_element(norms.begin(), norms.end());
  if (*mn == *mx) return 1.0;
  if (!(*mn > 0.0)) return kInfiniteRatio;
  return *mx / *mn;
}

bool satisfies(const BasisModel& model, const EpsilonTarget& target) {
  if (model.count(1, Tag::G) != target.num_linear) return false;
  for (int t = 2; t < target.d_min; ++t) {
    if (model.count(t, Tag::G) != 0) return false;
  }
  return target.d_min < 2 || model.count(target.d_min, Tag::G) >= target.num_at_dmin;
}

EpsilonSearchResult epsilon_search(const PointSet& x, const EpsilonTarget& target, const FitConfig& base,
                                   const EpsilonGrid& grid) {
  if (target.d_min < 1) throw std::invalid_argument("d_min must be >= 1");
  double lo = grid.lo;
  double hi = grid.hi;
  if (lo == 0.0 && hi == 0.0) {
    PointSet pts = x;
    if ((base.center || base.unit_mean_norm) && !x.preprocessing.active()) pts = x.preprocessed(base.center, base.unit_mean_norm);
    const double scale = pts.points.rowwise().norm().mean();
    lo = 1e-4 * scale;
    hi = scale;
  }
  if (!(lo > 0.0) || !(hi >= lo) || grid.count < 1) throw std::invalid_argument("epsilon grid bounds must be positive");

  EpsilonSearchResult res;
  const std::size_t count = grid.count;
  std::vector<double> eps(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    eps[i] = lo * std::pow(hi / lo, f);
  }

  FitConfig cfg = base;
  const int need = std::max(target.d_min, 1);
  cfg.max_degree = base.max_degree > 0 ? std::min(base.max_degree, need) : need;
  for (double e : eps) {
    cfg.epsilon = e;
    const BasisModel m = fit(x, cfg);
    EpsilonProbe probe;
    probe.epsilon = e;
    probe.satisfied = satisfies(m, target);
    for (int t = 1; t <= need; ++t) probe.g_counts.push_back(m.count(t, Tag::G));
    res.trace.push_back(std::move(probe));
  }

  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < count;) {
    if (!res.trace[i].satisfied) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < count && res.trace[j].satisfied) ++j;
    if (j - i > best_len) {
      best_start = i;
      best_len = j - i;
    }
    i = j;
  }
  if (best_len == 0) return res;

  res.found = true;
  res.lo = eps[best_start];
  res.hi = eps[best_start + best_len - 1];
  res.epsilon = 0.5 * (res.lo + res.hi);
  cfg.epsilon = res.epsilon;
  if (!satisfies(fit(x, cfg), target)) res.epsilon = eps[best_start + (best_len - 1) / 2];
  return res;
}

std::vector<double> extract_features(std::span<const BasisModel> models, std::span<const double> point,
                                     std::span<const std::vector<PolyHandle>> kept) {
  if (models.empty()) return {};
  Matrix row(1, static_cast<Eigen::Index>(point.size()));
  for (std::size_t k = 0; k < point.size(); ++k) row(0, static_cast<Eigen::Index>(k)) = point[k];
  const Matrix f = extract_features(models, PointSet(row), kept);
  return {f.data(), f.data() + f.size()};
}

Matrix extract_features(std::span<const BasisModel> models, const PointSet& points,
                        std::span<const std::vector<PolyHandle>> kept) {
  std::vector<Matrix> blocks;
  Eigen::Index width = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    if (points.dim() != m.num_vars) throw DimensionError("feature point dimension does not match class model");
    const auto hs = i < kept.size() ? kept[i] : m.handles(Tag::G);
    blocks.push_back(evaluate(m, hs, points).cwiseAbs());
    width += blocks.back().cols();
  }
  Matrix out(static_cast<Eigen::Index>(points.size()), width);
  Eigen::Index at = 0;
  for (const auto& blk : blocks) {
    out.middleCols(at, blk.cols()) = blk;
    at += blk.cols();
  }
  return out;
}

}  // namespace avi
