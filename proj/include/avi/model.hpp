#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avi/linalg.hpp"
#include "avi/polynomial.hpp"

namespace avi {

// ---------------------------------------------------------------------------
// Points and preprocessing

/// Affine map x -> (x - center) * scale applied before fitting.
struct Preprocessing {
  Vector center;  // empty when no centering was applied
  double scale = 1.0;

  bool active() const { return center.size() > 0 || scale != 1.0; }
  Matrix apply(const Matrix& points) const;
  friend bool operator==(const Preprocessing&, const Preprocessing&);
};

struct PointSet {
  Matrix points;                // one point per row
  Preprocessing preprocessing;  // what has already been applied to `points`

  PointSet() = default;
  explicit PointSet(Matrix pts, Preprocessing prep = {});

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  std::vector<double> row(std::size_t i) const;

  /// Centres and/or rescales so that the mean point norm is one. The returned
  /// set records the transform.
  PointSet preprocessed(bool center, bool unit_mean_norm) const;
};

// ---------------------------------------------------------------------------
// Normalization

enum class NormKind { Identity, Coefficient, Gradient, SubsampledGradient };

struct NormalizationKind {
  NormKind kind = NormKind::Gradient;
  std::vector<std::size_t> var_subset;    // SubsampledGradient only
  std::vector<std::size_t> point_subset;  // SubsampledGradient only

  static NormalizationKind identity() { return {NormKind::Identity, {}, {}}; }
  static NormalizationKind coefficient() { return {NormKind::Coefficient, {}, {}}; }
  static NormalizationKind gradient() { return {NormKind::Gradient, {}, {}}; }
  static NormalizationKind subsampled_gradient(std::vector<std::size_t> vars, std::vector<std::size_t> pts) {
    return {NormKind::SubsampledGradient, std::move(vars), std::move(pts)};
  }

  bool is_gradient_family() const {
    return kind == NormKind::Gradient || kind == NormKind::SubsampledGradient;
  }
  /// Throws std::invalid_argument for empty or out-of-range subsets.
  void validate(std::size_t num_vars, std::size_t num_points) const;
  friend bool operator==(const NormalizationKind&, const NormalizationKind&) = default;
};

std::string to_string(NormKind k);
NormKind parse_norm_kind(const std::string& s);

// ---------------------------------------------------------------------------
// Structural basis

enum class Tag : char { F = 'F', G = 'G' };

/// Parentage of one pre-candidate. At degree 1 `first` is the variable index.
/// At degree t >= 2 the candidate is F1[first] * F_{t-1}[second], indices
/// counting F-columns of those degrees in stored order.
struct Parent {
  std::size_t first = 0;
  std::size_t second = 0;
  friend bool operator==(const Parent&, const Parent&) = default;
};

struct DegreeRecord {
  int degree = 1;
  std::vector<Parent> parents;
  Matrix ortho_weights;  // |F^{t-1}| x |parents|
  Matrix eigvecs;        // |parents| x retained
  Vector eigvals;        // descending, one per eigvec column
  std::vector<Tag> partition;
  std::size_t dropped_directions = 0;  // null directions of the normalization matrix

  std::size_t num_candidates() const { return parents.size(); }
  std::size_t num_columns() const { return static_cast<std::size_t>(eigvecs.cols()); }
  std::size_t count(Tag tag) const;
  std::vector<std::size_t> columns(Tag tag) const;
};

struct PolyHandle {
  int degree = 0;
  std::size_t column = 0;
  Tag kind = Tag::F;
  friend auto operator<=>(const PolyHandle&, const PolyHandle&) = default;
};

std::string handle_label(const PolyHandle& h, std::size_t index_within_kind);

struct BasisModel {
  std::size_t num_vars = 0;
  double constant_value = 1.0;
  std::vector<DegreeRecord> degrees;  // degrees[i] holds degree i + 1
  double epsilon = 0.0;
  NormalizationKind normalization;
  Preprocessing preprocessing;
  bool truncated = false;

  int max_degree() const { return static_cast<int>(degrees.size()); }
  const DegreeRecord& record(int degree) const;

  /// Handles of the given kind in degree-ascending, column-ascending order.
  /// The constant is the only degree-0 handle and is of kind F.
  std::vector<PolyHandle> handles(Tag kind) const;
  std::vector<PolyHandle> all_handles() const;
  std::size_t count(Tag kind) const { return handles(kind).size(); }
  std::size_t count(int degree, Tag kind) const;

  /// Label like d2_g0 where the index counts handles of that kind at that degree.
  std::string label(const PolyHandle& h) const;

  /// Throws std::invalid_argument if `h` does not name an existing column.
  void check_handle(const PolyHandle& h) const;
  /// Structural invariants (parent counts, shapes, partition vs epsilon).
  void validate() const;
};

// ---------------------------------------------------------------------------
// Evaluation engine shared by fitting and replay

/// Values and (optionally) gradients of a set of polynomials at a set of
/// points. grads[k] holds d/dx_k with the same layout as `values`.
struct Jet {
  Matrix values;
  std::vector<Matrix> grads;

  bool has_gradients() const { return !grads.empty(); }
  Eigen::Index cols() const { return values.cols(); }
};

namespace engine {

Jet constant_jet(double m, const Matrix& points, bool with_gradients);
/// Pre-candidate values by entry-wise products of parents (product rule for
/// gradients). `f1` and `f_prev` are unused at degree 1.
Jet pre_candidates(int degree, const std::vector<Parent>& parents, const Matrix& points, const Jet& f1,
                   const Jet& f_prev, bool with_gradients);
/// pre - f_accum * weights, applied to values and gradients alike.
Jet orthogonalized(const Jet& pre, const Jet& f_accum, const Matrix& weights);
Jet combine(const Jet& candidates, const Matrix& coeffs);
Jet select_columns(const Jet& src, const std::vector<std::size_t>& cols);
void append_columns(Jet& dst, const Jet& src);

using PolyList = std::vector<DensePolynomial>;

/// Symbolic counterparts of the jet operations above.
PolyList pre_candidate_polys(int degree, std::size_t num_vars, const std::vector<Parent>& parents, const PolyList& f1,
                             const PolyList& f_prev);
PolyList orthogonalized_polys(const PolyList& pre, const PolyList& f_accum, const Matrix& weights);
PolyList combine_polys(const PolyList& src, const Matrix& coeffs, std::size_t num_vars);

}  // namespace engine

/// Replays a model degree by degree on a point set. Keeps the accumulated F
/// jets so that any handle can be read off.
class Propagator {
 public:
  Propagator(const BasisModel& model, const Matrix& model_points, bool with_gradients);

  /// Values/gradients for the requested handles, one Jet column per handle.
  Jet handles(std::span<const PolyHandle> hs);

  /// Processes degrees up to and including `degree`.
  void advance_to(int degree);
  int done() const { return done_; }
  const Jet& f_accum() const { return f_accum_; }
  const Jet& f1() const { return f1_; }
  const Jet& f_prev() const { return f_prev_; }
  const Matrix& points() const { return points_; }

 private:
  const BasisModel& model_;
  Matrix points_;
  bool with_gradients_;
  int done_ = 0;
  Jet f_accum_;
  Jet f1_;
  Jet f_prev_;
  std::vector<Jet> outputs_;  // outputs_[t] = all columns of degree t (t=0 constant)
};

/// Points expressed in the model's coordinates (preprocessing applied when the
/// set is still raw).
Matrix to_model_coordinates(const BasisModel& model, const PointSet& points);

/// |points| x |handles| evaluation matrix.
Matrix evaluate(const BasisModel& model, std::span<const PolyHandle> handles, const PointSet& points);

/// One |points| x n matrix per handle; derivatives are with respect to the
/// model coordinates.
std::vector<Matrix> gradient(const BasisModel& model, std::span<const PolyHandle> handles,
                             const PointSet& points);

inline constexpr std::size_t kDefaultTermCap = 1'000'000;

class ExpansionLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact coefficient expansion by replaying the recursion over DensePolynomial
/// arithmetic. Refuses (ExpansionLimitError) when the number of monomials of
/// the handle's degree would exceed `term_cap`.
DensePolynomial expand(const BasisModel& model, const PolyHandle& handle, std::size_t term_cap = kDefaultTermCap);
std::vector<DensePolynomial> expand(const BasisModel& model, std::span<const PolyHandle> handles,
                                    std::size_t term_cap = kDefaultTermCap);

struct OpCounter {
  std::uint64_t multiplies = 0;
  std::uint64_t adds = 0;
  std::uint64_t total() const { return multiplies + adds; }
};

/// Gradient of one handle at one point by the product-rule recursion, with the
/// top-degree step written out term by term so its arithmetic can be counted.
/// Lower-degree values and gradients are computed first and are not counted.
std::vector<double> gradient_at_point(const BasisModel& model, const PolyHandle& handle,
                                      std::span<const double> model_point, OpCounter* counter);

}  // namespace avi
