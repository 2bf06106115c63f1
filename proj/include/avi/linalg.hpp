#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace avi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance below which singular values / eigenvalues count as zero.
inline constexpr double kDefaultRankTol = 1e-12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigen-decomposition result. Eigenvalues are sorted in descending order and
/// column i of `eigenvectors` pairs with `eigenvalues[i]`.
struct EigResult {
  Vector eigenvalues;
  Matrix eigenvectors;
  std::size_t retained_rank = 0;
};

struct LstsqResult {
  Matrix solution;
  double residual = 0.0;
};

bool all_finite(const Matrix& m);

/// Standard symmetric eigenproblem. Throws DimensionError for non-square or
/// asymmetric (beyond 1e-10 relative) input.
EigResult sym_eig(const Matrix& a);

/// Solves A V = B V Lambda on the numerical range of B.
///
/// B is eigendecomposed, directions whose eigenvalue is at most
/// `rank_tol * max eigenvalue` are discarded, the remaining directions are
/// whitened, and the whitened A is diagonalised. The returned vectors satisfy
/// V^T B V = I and V^T A V = Lambda. If B is identically zero the result is
/// empty.
EigResult gen_sym_eig(const Matrix& a, const Matrix& b, double rank_tol = kDefaultRankTol);

/// Minimum-norm least squares through the truncated pseudo-inverse of `m`.
/// Residual is the Frobenius norm of m * W - y.
LstsqResult lstsq(const Matrix& m, const Matrix& y, double rank_tol = kDefaultRankTol);

/// Number of singular values above `rank_tol * largest`.
std::size_t numerical_rank(const Matrix& m, double rank_tol = kDefaultRankTol);

/// Orthonormal basis for the column space of `m` (numerical rank by `rank_tol`).
Matrix orthonormal_basis(const Matrix& m, double rank_tol = kDefaultRankTol);

/// Principal angles (radians, ascending) between the column spaces of a and b.
/// Both matrices must share the row count. The result has
/// min(rank a, rank b) entries.
std::vector<double> principal_angles(const Matrix& a, const Matrix& b,
                                     double rank_tol = kDefaultRankTol);

/// Sine of the largest principal angle; 1 when the numerical ranks differ.
double subspace_gap(const Matrix& a, const Matrix& b, double rank_tol = kDefaultRankTol);

/// Flip column signs so that the entry of largest magnitude is positive.
void normalize_column_signs(Matrix& v);

/// Replace the columns listed in `cols` (which span a common eigenspace) with
/// a canonical B-orthonormal basis of the same span.
///
/// The span is put in reduced row-echelon form with greedy column pivoting
/// (largest residual, ties to the lowest index), then B-orthonormalised in
/// pivot order. The result depends only on the subspace, not on the rotation
/// the eigensolver happened to return.
void canonicalize_eigenspace(Matrix& v, const std::vector<std::size_t>& cols, const Matrix& b);

}  // namespace avi
