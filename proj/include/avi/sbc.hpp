#pragma once

#include <cstddef>
#include <vector>

#include "avi/model.hpp"

namespace avi {

struct FitConfig {
  double epsilon = 0.0;
  NormalizationKind normalization = NormalizationKind::gradient();
  int max_degree = 0;  // 0 selects |X|
  double rank_tol = kDefaultRankTol;
  bool center = false;
  bool unit_mean_norm = false;
  std::size_t term_cap = kDefaultTermCap;  // Coefficient normalization only
};

/// Candidates of one degree: evaluations (with gradients when the
/// normalization needs them) and, for Coefficient, explicit expansions.
struct CandidateSet {
  Jet jet;
  std::vector<DensePolynomial> expansions;
};

/// Relative floor on sqrt(lambda) below which a direction counts as vanishing
/// even at epsilon = 0.
inline constexpr double kZeroExtentTol = 1e-10;

Matrix normalization_matrix(const CandidateSet& cands, const NormalizationKind& kind);

struct Orthogonalized {
  Matrix candidates;  // C_pre - F W
  Matrix weights;     // W
};
Orthogonalized orthogonalize(const Matrix& pre_eval, const Matrix& f_eval, double rank_tol = kDefaultRankTol);

/// sqrt(lambda) threshold implied by the numerical-zero policy for one degree.
double zero_extent_threshold(const Vector& eigvals);

/// F iff sqrt(lambda) > epsilon and above the numerical-zero threshold.
std::vector<Tag> classify(const Vector& eigvals, double epsilon);

/// Stored partitions agree with stored eigenvalues and epsilon.
bool partition_consistent(const BasisModel& model);

/// Degree-0 constant for a normalization on the given (model-coordinate) points.
double constant_for(const NormalizationKind& kind, const Matrix& points);

BasisModel fit(const PointSet& x, const FitConfig& cfg = {});

}  // namespace avi
