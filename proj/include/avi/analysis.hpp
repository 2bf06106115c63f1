#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "avi/model.hpp"
#include "avi/sbc.hpp"

namespace avi {

// ---------------------------------------------------------------------------
// Translation / scaling consistency

struct DegreeCounts {
  std::size_t g = 0;
  std::size_t f = 0;
  friend bool operator==(const DegreeCounts&, const DegreeCounts&) = default;
};

struct InvarianceReport {
  std::vector<DegreeCounts> base;
  std::vector<DegreeCounts> translated;
  std::vector<DegreeCounts> scaled;
  double alpha = 1.0;
  /// Per degree, sorted lambda_scaled / lambda_base over eigenvalues that are
  /// not numerically zero in the base run.
  std::vector<std::vector<double>> eigenvalue_ratios;
  /// Per degree, sine of the largest principal angle between probe
  /// evaluations of the base and transformed G_t (resp. F_t).
  std::vector<double> translation_gap_g, translation_gap_f;
  std::vector<double> scaling_gap_g, scaling_gap_f;
  /// Largest relative residual when the transformed evaluations are written
  /// in terms of the base evaluations, over all degrees, kinds and transforms.
  double max_eval_discrepancy = 0.0;

  bool translation_counts_equal() const { return base == translated; }
  bool scaling_counts_equal() const { return base == scaled; }
  /// max |ratio / alpha^2 - 1|; zero when there is nothing to compare.
  double max_ratio_error() const;
  double max_gap() const;
};

struct InvarianceOptions {
  NormalizationKind normalization = NormalizationKind::gradient();
  double rank_tol = kDefaultRankTol;
  std::size_t probes = 0;  // 0 picks a count from the largest fitted degree
  std::uint64_t seed = 1;
};

InvarianceReport invariance_report(const PointSet& x, const Vector& b, double alpha, double epsilon,
                                   const InvarianceOptions& opts = {});

// ---------------------------------------------------------------------------
// Norm ratio

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

/// max / min norm of the G-polynomials under `kind`. Gradient norms are taken
/// at `x`. Returns +infinity when the smallest norm is zero.
double n_ratio(const BasisModel& model, const PointSet& x, const NormalizationKind& kind,
               std::size_t term_cap = kDefaultTermCap);

/// Norm of every G-polynomial under `kind`, in handle order.
std::vector<double> g_norms(const BasisModel& model, const PointSet& x, const NormalizationKind& kind,
                            std::size_t term_cap = kDefaultTermCap);

// ---------------------------------------------------------------------------
// Epsilon selection

struct EpsilonTarget {
  std::size_t num_linear = 0;
  int d_min = 2;
  std::size_t num_at_dmin = 1;
};

struct EpsilonGrid {
  double lo = 0.0;  // 0 with hi = 0 selects [1e-4, 1] * mean point norm
  double hi = 0.0;
  std::size_t count = 60;
};

struct EpsilonProbe {
  double epsilon = 0.0;
  bool satisfied = false;
  std::vector<std::size_t> g_counts;  // per degree up to d_min
};

struct EpsilonSearchResult {
  bool found = false;
  double epsilon = 0.0;
  double lo = 0.0;  // epsilon_1
  double hi = 0.0;  // epsilon_2
  std::vector<EpsilonProbe> trace;
};

bool satisfies(const BasisModel& model, const EpsilonTarget& target);

/// `base` supplies normalization, rank tolerance and preprocessing; its
/// epsilon is ignored.
EpsilonSearchResult epsilon_search(const PointSet& x, const EpsilonTarget& target, const FitConfig& base = {},
                                   const EpsilonGrid& grid = {});

// ---------------------------------------------------------------------------
// Features

/// |g(x)| for every G-handle of every model, class by class. When a model has
/// an entry in `kept` that list replaces its full G set.
std::vector<double> extract_features(std::span<const BasisModel> models, std::span<const double> point,
                                     std::span<const std::vector<PolyHandle>> kept = {});
/// One feature row per point.
Matrix extract_features(std::span<const BasisModel> models, const PointSet& points,
                        std::span<const std::vector<PolyHandle>> kept = {});

}  // namespace avi
