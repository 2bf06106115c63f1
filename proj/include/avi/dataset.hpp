#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avi/model.hpp"

namespace avi {

enum class VarietyKind { ConcentricEllipses, PolynomialSystem, Custom };

std::string to_string(VarietyKind v);
VarietyKind parse_variety(const std::string& s);

struct EllipseRadii {
  double a = 1.0;  // semi-axis along the first coordinate before rotation
  double b = 1.0;
};

struct DatasetSpec {
  VarietyKind variety = VarietyKind::ConcentricEllipses;
  std::vector<EllipseRadii> radii;  // ellipses
  double rotation = 0.0;            // ellipses, radians
  std::vector<DensePolynomial> system;  // polynomial systems
  double box = 1.0;                     // start points drawn from [-box, box]^n
  Matrix custom_points;                 // custom: rows to sample from
  std::size_t samples = 100;
  // One weight vector w per added variable: y = w1 x1 + ... + wm xm + (1 - sum w) x(m+1).
  // A single weight k gives y = k x1 + (1 - k) x2.
  std::vector<std::vector<double>> extra_linear_vars;
  double noise_std_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Points on the variety before any extra variables, centering or noise.
Matrix sample_base_points(const DatasetSpec& spec, std::mt19937_64& rng);
Matrix append_linear_vars(const Matrix& base, const std::vector<std::vector<double>>& weights);
PointSet generate_dataset(const DatasetSpec& spec);

/// Triple concentric ellipses rotated by 3*pi/4 with five mixed variables
/// (k in {0, .2, .5, .8, 1}).
DatasetSpec d1_spec(std::size_t samples, double noise, std::uint64_t seed);
/// {x1 x3 - x2^2, x1^3 - x2 x3} with nine mixed variables ((k, l) in {.2, .5, .8}^2).
DatasetSpec d2_spec(std::size_t samples, double noise, std::uint64_t seed);

}  // namespace avi
