#pragma once

#include <cstddef>
#include <vector>

#include "avi/model.hpp"

namespace avi {

inline constexpr double kDefaultReductionThreshold = 1e-9;

struct RemovedPolynomial {
  PolyHandle handle;
  double max_residual = 0.0;
  std::vector<double> residuals;  // one per point
};

struct DeflationStep {
  int degree = 0;
  std::size_t before = 0;  // |G_t| entering the step
  std::size_t rank = 0;    // numerical rank of the gradient Gram matrix
  std::vector<PolyHandle> removed;
};

struct ReductionReport {
  std::vector<PolyHandle> kept;
  std::vector<RemovedPolynomial> removed;
  std::vector<DeflationStep> rank_deflated;
  double threshold = kDefaultReductionThreshold;

  friend bool operator==(const ReductionReport&, const ReductionReport&);
};

bool operator==(const RemovedPolynomial&, const RemovedPolynomial&);
bool operator==(const DeflationStep&, const DeflationStep&);

/// Indices (into the columns of `gram`) that survive rank deflation. Columns
/// are dropped in ascending order of extent; a drop that would lower the rank
/// is skipped.
std::vector<std::size_t> rank_deflate_degree(const Matrix& gram, const std::vector<double>& extents,
                                             double rank_tol = kDefaultRankTol);

/// A polynomial supplied from outside the model, described by its degree and
/// its gradient at every point (|X| x n).
struct ExternalPolynomial {
  int degree = 1;
  Matrix gradients;
};

struct ExternalVerdict {
  bool removed = false;
  double max_residual = 0.0;
};

ReductionReport reduce_basis(const BasisModel& model, const PointSet& x,
                             double threshold = kDefaultReductionThreshold, double rank_tol = kDefaultRankTol);

/// As above, and additionally tests each external polynomial against the
/// kept model polynomials of lower degree. External polynomials never act as
/// generators.
ReductionReport reduce_basis(const BasisModel& model, const PointSet& x, const std::vector<ExternalPolynomial>& extra,
                             std::vector<ExternalVerdict>& verdicts, double threshold = kDefaultReductionThreshold,
                             double rank_tol = kDefaultRankTol);

/// Per-point residuals of fitting ∇g(x) by the rows of `generators` at x.
/// `target` is |X| x n; each generator likewise.
std::vector<double> gradient_residuals(const Matrix& target, const std::vector<const Matrix*>& generators,
                                       double rank_tol = kDefaultRankTol);

}  // namespace avi
