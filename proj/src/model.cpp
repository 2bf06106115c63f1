#include "avi/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avi {

// ---------------------------------------------------------------------------
// Points

Matrix Preprocessing::apply(const Matrix& points) const {
  Matrix out = points;
  if (center.size() > 0) {
    if (center.size() != points.cols()) throw DimensionError("preprocessing: centre has wrong dimension");
    out.rowwise() -= center.transpose();
  }
  if (scale != 1.0) out *= scale;
  return out;
}

bool operator==(const Preprocessing& a, const Preprocessing& b) {
  return a.scale == b.scale && a.center.size() == b.center.size() && a.center == b.center;
}

PointSet::PointSet(Matrix pts, Preprocessing prep) : points(std::move(pts)), preprocessing(std::move(prep)) {
  if (points.rows() < 1) throw std::invalid_argument("empty point set");
  if (points.cols() < 1) throw std::invalid_argument("points must have at least one coordinate");
  if (!points.allFinite()) throw std::invalid_argument("point set contains non-finite coordinates");
}

std::vector<double> PointSet::row(std::size_t i) const {
  std::vector<double> buf(dim());
  for (std::size_t k = 0; k < dim(); ++k) buf[k] = points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  return buf;
}

PointSet PointSet::preprocessed(bool center, bool unit_mean_norm) const {
  if (preprocessing.active()) throw std::logic_error("point set is already preprocessed");
  Preprocessing prep;
  if (center) prep.center = points.colwise().mean().transpose();
  if (unit_mean_norm) {
    const Matrix shifted = Preprocessing{prep.center, 1.0}.apply(points);
    const double mean_norm = shifted.rowwise().norm().mean();
    if (!(mean_norm > 0.0)) throw std::invalid_argument("cannot normalise a point set with zero mean norm");
    prep.scale = 1.0 / mean_norm;
  }
  return PointSet(prep.apply(points), prep);
}

// ---------------------------------------------------------------------------
// Normalization

void NormalizationKind::validate(std::size_t num_vars, std::size_t num_points) const {
  if (kind != NormKind::SubsampledGradient) return;
  if (var_subset.empty() || point_subset.empty()) {
    throw std::invalid_argument("subsampled gradient normalization needs non-empty subsets");
  }
  for (auto k : var_subset) {
    if (k >= num_vars) throw std::invalid_argument("variable subset index out of range");
  }
  for (auto i : point_subset) {
    if (i >= num_points) throw std::invalid_argument("point subset index out of range");
  }
}

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::Identity: return "vca";
    case NormKind::Coefficient: return "coef";
    case NormKind::Gradient: return "grad";
    case NormKind::SubsampledGradient: return "subgrad";
  }
  return "?";
}

NormKind parse_norm_kind(const std::string& s) {
  if (s == "vca" || s == "identity") return NormKind::Identity;
  if (s == "coef" || s == "coefficient") return NormKind::Coefficient;
  if (s == "grad" || s == "gradient") return NormKind::Gradient;
  if (s == "subgrad" || s == "subsampled") return NormKind::SubsampledGradient;
  throw std::invalid_argument("unknown normalization '" + s + "'");
}

// ---------------------------------------------------------------------------
// Structure

std::size_t DegreeRecord::count(Tag tag) const {
  return static_cast<std::size_t>(std::count(partition.begin(), partition.end(), tag));
}

std::vector<std::size_t> DegreeRecord::columns(Tag tag) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (partition[i] == tag) out.push_back(i);
  }
  return out;
}

std::string handle_label(const PolyHandle& h, std::size_t index_within_kind) {
  return "d" + std::to_string(h.degree) + (h.kind == Tag::G ? "_g" : "_f") + std::to_string(index_within_kind);
}

const DegreeRecord& BasisModel::record(int degree) const {
  if (degree < 1 || degree > max_degree()) throw std::out_of_range("no record for degree " + std::to_string(degree));
  return degrees[static_cast<std::size_t>(degree - 1)];
}

std::vector<PolyHandle> BasisModel::handles(Tag kind) const {
  std::vector<PolyHandle> out;
  if (kind == Tag::F) out.push_back({0, 0, Tag::F});
  for (const auto& rec : degrees) {
    for (auto c : rec.columns(kind)) out.push_back({rec.degree, c, kind});
  }
  return out;
}

std::vector<PolyHandle> BasisModel::all_handles() const {
  std::vector<PolyHandle> out{{0, 0, Tag::F}};
  for (const auto& rec : degrees) {
    for (std::size_t c = 0; c < rec.num_columns(); ++c) out.push_back({rec.degree, c, rec.partition[c]});
  }
  return out;
}

std::size_t BasisModel::count(int degree, Tag kind) const {
  if (degree == 0) return kind == Tag::F ? 1 : 0;
  if (degree > max_degree()) return 0;
  return record(degree).count(kind);
}

std::string BasisModel::label(const PolyHandle& h) const {
  check_handle(h);
  if (h.degree == 0) return handle_label(h, 0);
  const auto cols = record(h.degree).columns(h.kind);
  const auto it = std::find(cols.begin(), cols.end(), h.column);
  return handle_label(h, static_cast<std::size_t>(it - cols.begin()));
}

void BasisModel::check_handle(const PolyHandle& h) const {
  if (h.degree == 0) {
    if (h.column != 0 || h.kind != Tag::F) throw std::invalid_argument("invalid degree-0 handle");
    return;
  }
  if (h.degree < 0 || h.degree > max_degree()) throw std::invalid_argument("handle degree out of range");
  const auto& rec = record(h.degree);
  if (h.column >= rec.num_columns()) throw std::invalid_argument("handle column out of range");
  if (rec.partition[h.column] != h.kind) throw std::invalid_argument("handle kind does not match partition");
}

void BasisModel::validate() const {
  if (num_vars < 1) throw std::invalid_argument("model: num_vars must be positive");
  if (!(constant_value != 0.0) || !std::isfinite(constant_value)) {
    throw std::invalid_argument("model: constant must be finite and nonzero");
  }
  if (epsilon < 0.0) throw std::invalid_argument("model: negative epsilon");
  if (preprocessing.center.size() != 0 && static_cast<std::size_t>(preprocessing.center.size()) != num_vars) {
    throw std::invalid_argument("model: preprocessing centre has wrong dimension");
  }
  std::size_t f_total = 1;
  std::size_t f1 = 0;
  std::size_t f_prev = 1;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    const auto& rec = degrees[i];
    const int t = static_cast<int>(i) + 1;
    if (rec.degree != t) throw std::invalid_argument("model: degree records out of order");
    const std::size_t expected = t == 1 ? num_vars : f1 * f_prev;
    if (rec.parents.size() != expected) throw std::invalid_argument("model: wrong candidate count at degree " + std::to_string(t));
    for (std::size_t c = 0; c < rec.parents.size(); ++c) {
      const auto& p = rec.parents[c];
      if (t == 1 ? (p.first != c || p.second != 0) : (p.first >= f1 || p.second >= f_prev)) {
        throw std::invalid_argument("model: bad parent reference at degree " + std::to_string(t));
      }
    }
    if (static_cast<std::size_t>(rec.ortho_weights.rows()) != f_total ||
        static_cast<std::size_t>(rec.ortho_weights.cols()) != expected) {
      throw std::invalid_argument("model: orthogonalization weights have wrong shape");
    }
    if (static_cast<std::size_t>(rec.eigvecs.rows()) != expected || rec.eigvecs.cols() > rec.eigvecs.rows()) {
      throw std::invalid_argument("model: eigenvector block has wrong shape");
    }
    if (rec.eigvals.size() != rec.eigvecs.cols() || rec.partition.size() != rec.num_columns()) {
      throw std::invalid_argument("model: eigenvalue/partition length mismatch");
    }
    if (!rec.ortho_weights.allFinite() || !rec.eigvecs.allFinite() || !rec.eigvals.allFinite()) {
      throw std::invalid_argument("model: non-finite entries");
    }
    const std::size_t nf = rec.count(Tag::F);
    if (t == 1) f1 = nf;
    f_prev = nf;
    f_total += nf;
  }
}

// ---------------------------------------------------------------------------
// Engine

namespace engine {

Jet constant_jet(double m, const Matrix& points, bool with_gradients) {
  Jet j;
  j.values = Matrix::Constant(points.rows(), 1, m);
  if (with_gradients) j.grads.assign(static_cast<std::size_t>(points.cols()), Matrix::Zero(points.rows(), 1));
  return j;
}

Jet pre_candidates(int degree, const std::vector<Parent>& parents, const Matrix& points, const Jet& f1,
                   const Jet& f_prev, bool with_gradients) {
  const Eigen::Index rows = points.rows();
  const Eigen::Index n = points.cols();
  const auto count = static_cast<Eigen::Index>(parents.size());
  Jet out;
  out.values.resize(rows, count);
  if (with_gradients) out.grads.assign(static_cast<std::size_t>(n), Matrix(rows, count));
  if (degree == 1) {
    for (Eigen::Index c = 0; c < count; ++c) {
      const auto k = static_cast<Eigen::Index>(parents[static_cast<std::size_t>(c)].first);
      out.values.col(c) = points.col(k);
      if (with_gradients) {
        for (Eigen::Index d = 0; d < n; ++d) {
          out.grads[static_cast<std::size_t>(d)].col(c).setConstant(d == k ? 1.0 : 0.0);
        }
      }
    }
    return out;
  }
  for (Eigen::Index c = 0; c < count; ++c) {
    const auto& par = parents[static_cast<std::size_t>(c)];
    const auto p = static_cast<Eigen::Index>(par.first);
    const auto q = static_cast<Eigen::Index>(par.second);
    out.values.col(c) = f1.values.col(p).cwiseProduct(f_prev.values.col(q));
    if (with_gradients) {
      for (std::size_t d = 0; d < out.grads.size(); ++d) {
        out.grads[d].col(c) = f1.grads[d].col(p).cwiseProduct(f_prev.values.col(q)) +
                              f1.values.col(p).cwiseProduct(f_prev.grads[d].col(q));
      }
    }
  }
  return out;
}

Jet orthogonalized(const Jet& pre, const Jet& f_accum, const Matrix& weights) {
  Jet out;
  out.values = pre.values - f_accum.values * weights;
  out.grads.reserve(pre.grads.size());
  for (std::size_t d = 0; d < pre.grads.size(); ++d) out.grads.push_back(pre.grads[d] - f_accum.grads[d] * weights);
  return out;
}

Jet combine(const Jet& candidates, const Matrix& coeffs) {
  Jet out;
  out.values = candidates.values * coeffs;
  out.grads.reserve(candidates.grads.size());
  for (const auto& g : candidates.grads) out.grads.push_back(g * coeffs);
  return out;
}

Jet select_columns(const Jet& src, const std::vector<std::size_t>& cols) {
  Jet out;
  const auto k = static_cast<Eigen::Index>(cols.size());
  out.values.resize(src.values.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) out.values.col(i) = src.values.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(i)]));
  for (const auto& g : src.grads) {
    Matrix sel(g.rows(), k);
    for (Eigen::Index i = 0; i < k; ++i) sel.col(i) = g.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(i)]));
    out.grads.push_back(std::move(sel));
  }
  return out;
}

void append_columns(Jet& dst, const Jet& src) {
  if (dst.values.size() == 0 && dst.values.cols() == 0) {
    dst = src;
    return;
  }
  Matrix v(dst.values.rows(), dst.values.cols() + src.values.cols());
  v << dst.values, src.values;
  dst.values = std::move(v);
  for (std::size_t d = 0; d < dst.grads.size(); ++d) {
    Matrix g(dst.grads[d].rows(), dst.grads[d].cols() + src.grads[d].cols());
    g << dst.grads[d], src.grads[d];
    dst.grads[d] = std::move(g);
  }
}

}  // namespace engine

Propagator::Propagator(const BasisModel& model, const Matrix& model_points, bool with_gradients)
    : model_(model), points_(model_points), with_gradients_(with_gradients) {
  if (static_cast<std::size_t>(points_.cols()) != model_.num_vars) {
    throw DimensionError("points have " + std::to_string(points_.cols()) + " coordinates, model expects " +
                         std::to_string(model_.num_vars));
  }
  f_accum_ = engine::constant_jet(model_.constant_value, points_, with_gradients_);
  f_prev_ = f_accum_;
  outputs_.push_back(f_accum_);
}

void Propagator::advance_to(int degree) {
  if (degree > model_.max_degree()) throw std::out_of_range("model has no degree " + std::to_string(degree));
  while (done_ < degree) {
    const int t = done_ + 1;
    const auto& rec = model_.record(t);
    const Jet pre = engine::pre_candidates(t, rec.parents, points_, f1_, f_prev_, with_gradients_);
    const Jet cand = engine::orthogonalized(pre, f_accum_, rec.ortho_weights);
    Jet out = engine::combine(cand, rec.eigvecs);
    Jet f_new = engine::select_columns(out, rec.columns(Tag::F));
    if (t == 1) f1_ = f_new;
    engine::append_columns(f_accum_, f_new);
    f_prev_ = std::move(f_new);
    outputs_.push_back(std::move(out));
    done_ = t;
  }
}

Jet Propagator::handles(std::span<const PolyHandle> hs) {
  int top = 0;
  for (const auto& h : hs) {
    model_.check_handle(h);
    top = std::max(top, h.degree);
  }
  advance_to(top);
  Jet out;
  const auto k = static_cast<Eigen::Index>(hs.size());
  out.values.resize(points_.rows(), k);
  if (with_gradients_) out.grads.assign(static_cast<std::size_t>(points_.cols()), Matrix(points_.rows(), k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& h = hs[static_cast<std::size_t>(i)];
    const Jet& src = outputs_[static_cast<std::size_t>(h.degree)];
    const auto col = static_cast<Eigen::Index>(h.column);
    out.values.col(i) = src.values.col(col);
    for (std::size_t d = 0; d < out.grads.size(); ++d) out.grads[d].col(i) = src.grads[d].col(col);
  }
  return out;
}

Matrix to_model_coordinates(const BasisModel& model, const PointSet& points) {
  if (points.dim() != model.num_vars) {
    throw DimensionError("points have " + std::to_string(points.dim()) + " coordinates, model expects " +
                         std::to_string(model.num_vars));
  }
  if (points.preprocessing.active()) {
    if (!(points.preprocessing == model.preprocessing)) {
      throw std::invalid_argument("point set was preprocessed differently from the model");
    }
    return points.points;
  }
  return model.preprocessing.active() ? model.preprocessing.apply(points.points) : points.points;
}

Matrix evaluate(const BasisModel& model, std::span<const PolyHandle> handles, const PointSet& points) {
  Propagator prop(model, to_model_coordinates(model, points), false);
  return prop.handles(handles).values;
}

std::vector<Matrix> gradient(const BasisModel& model, std::span<const PolyHandle> handles, const PointSet& points) {
  Propagator prop(model, to_model_coordinates(model, points), true);
  const Jet j = prop.handles(handles);
  std::vector<Matrix> out;
  out.reserve(handles.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(handles.size()); ++i) {
    Matrix g(j.values.rows(), static_cast<Eigen::Index>(model.num_vars));
    for (std::size_t d = 0; d < j.grads.size(); ++d) g.col(static_cast<Eigen::Index>(d)) = j.grads[d].col(i);
    out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expansion

namespace engine {

PolyList pre_candidate_polys(int degree, std::size_t num_vars, const std::vector<Parent>& parents, const PolyList& f1,
                             const PolyList& f_prev) {
  PolyList out;
  out.reserve(parents.size());
  for (const auto& par : parents) {
    out.push_back(degree == 1 ? DensePolynomial::variable(num_vars, par.first) : poly_mul(f1[par.first], f_prev[par.second]));
  }
  return out;
}

PolyList orthogonalized_polys(const PolyList& pre, const PolyList& f_accum, const Matrix& weights) {
  PolyList out = pre;
  for (std::size_t c = 0; c < out.size(); ++c) {
    for (std::size_t f = 0; f < f_accum.size(); ++f) {
      const double w = weights(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c));
      if (w == 0.0) continue;
      for (const auto& [e, v] : f_accum[f].terms()) out[c].add_term(e, -v * w);
    }
  }
  return out;
}

PolyList combine_polys(const PolyList& src, const Matrix& coeffs, std::size_t num_vars) {
  PolyList out;
  out.reserve(static_cast<std::size_t>(coeffs.cols()));
  for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
    DensePolynomial acc(num_vars);
    for (Eigen::Index c = 0; c < coeffs.rows(); ++c) {
      const double w = coeffs(c, j);
      if (w == 0.0) continue;
      for (const auto& [e, v] : src[static_cast<std::size_t>(c)].terms()) acc.add_term(e, v * w);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace engine

using engine::PolyList;

std::vector<DensePolynomial> expand(const BasisModel& model, std::span<const PolyHandle> handles, std::size_t term_cap) {
  int top = 0;
  for (const auto& h : handles) {
    model.check_handle(h);
    top = std::max(top, h.degree);
  }
  if (monomial_count(model.num_vars, static_cast<std::size_t>(top)) > term_cap) {
    throw ExpansionLimitError("expansion of degree " + std::to_string(top) + " in " + std::to_string(model.num_vars) +
                              " variables exceeds the term cap");
  }
  const std::size_t n = model.num_vars;
  std::vector<PolyList> outputs{{DensePolynomial::constant(n, model.constant_value)}};
  PolyList f_accum = outputs[0];
  PolyList f1;
  PolyList f_prev = outputs[0];
  for (int t = 1; t <= top; ++t) {
    const auto& rec = model.record(t);
    const PolyList pre = engine::pre_candidate_polys(t, n, rec.parents, f1, f_prev);
    const PolyList cand = engine::orthogonalized_polys(pre, f_accum, rec.ortho_weights);
    PolyList out = engine::combine_polys(cand, rec.eigvecs, n);
    PolyList f_new;
    for (auto col : rec.columns(Tag::F)) f_new.push_back(out[col]);
    if (t == 1) f1 = f_new;
    f_accum.insert(f_accum.end(), f_new.begin(), f_new.end());
    f_prev = std::move(f_new);
    outputs.push_back(std::move(out));
  }
  std::vector<DensePolynomial> result;
  result.reserve(handles.size());
  for (const auto& h : handles) result.push_back(outputs[static_cast<std::size_t>(h.degree)][h.column]);
  return result;
}

DensePolynomial expand(const BasisModel& model, const PolyHandle& handle, std::size_t term_cap) {
  return expand(model, std::span<const PolyHandle>(&handle, 1), term_cap).front();
}

// ---------------------------------------------------------------------------
// Counted gradient

std::vector<double> gradient_at_point(const BasisModel& model, const PolyHandle& handle,
                                      std::span<const double> model_point, OpCounter* counter) {
  model.check_handle(handle);
  const std::size_t n = model.num_vars;
  if (model_point.size() != n) throw DimensionError("gradient_at_point: point dimension mismatch");
  std::vector<double> grad(n, 0.0);
  if (handle.degree == 0) return grad;

  const auto& rec = model.record(handle.degree);
  const Vector u = rec.eigvecs.col(static_cast<Eigen::Index>(handle.column));
  if (handle.degree == 1) {
    // linear polynomial: the gradient is the combination vector itself
    for (std::size_t k = 0; k < n; ++k) grad[k] = u(static_cast<Eigen::Index>(k));
    return grad;
  }

  Matrix pt(1, static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) pt(0, static_cast<Eigen::Index>(k)) = model_point[k];
  Propagator prop(model, pt, true);
  prop.advance_to(handle.degree - 1);
  const Jet& f1 = prop.f1();
  const Jet& fp = prop.f_prev();
  const Jet& fa = prop.f_accum();
  // h = sum_c u_c p_c q_c + sum_f v_f f with v = -W u; the coefficients are
  // part of h's representation, not of the per-point propagation.
  const Vector v = -(rec.ortho_weights * u);

  std::uint64_t muls = 0;
  std::uint64_t adds = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = k;
    double acc = 0.0;
    for (std::size_t c = 0; c < rec.parents.size(); ++c) {
      const auto p = static_cast<Eigen::Index>(rec.parents[c].first);
      const auto q = static_cast<Eigen::Index>(rec.parents[c].second);
      const double term = fp.values(0, q) * f1.grads[kk](0, p) + f1.values(0, p) * fp.grads[kk](0, q);
      acc += u(static_cast<Eigen::Index>(c)) * term;
      muls += 3;
      adds += 2;
    }
    for (Eigen::Index f = 0; f < v.size(); ++f) {
      acc += v(f) * fa.grads[kk](0, f);
      muls += 1;
      adds += 1;
    }
    grad[k] = acc;
  }
  if (counter != nullptr) {
    counter->multiplies += muls;
    counter->adds += adds;
  }
  return grad;
}

}  // namespace avi
