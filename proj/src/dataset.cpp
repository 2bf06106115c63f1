#include "avi/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace avi {

std::string to_string(VarietyKind v) {
  switch (v) {
    case VarietyKind::ConcentricEllipses: return "concentric_ellipses";
    case VarietyKind::PolynomialSystem: return "polynomial_system";
    case VarietyKind::Custom: return "custom";
  }
  return "?";
}

VarietyKind parse_variety(const std::string& s) {
  if (s == "concentric_ellipses") return VarietyKind::ConcentricEllipses;
  if (s == "polynomial_system") return VarietyKind::PolynomialSystem;
  if (s == "custom") return VarietyKind::Custom;
  throw std::invalid_argument("unknown variety '" + s + "'");
}

void DatasetSpec::validate() const {
  if (samples < 1) throw std::invalid_argument("dataset needs at least one sample");
  if (!(noise_std_fraction >= 0.0)) throw std::invalid_argument("noise fraction must be >= 0");
  switch (variety) {
    case VarietyKind::ConcentricEllipses:
      if (radii.empty()) throw std::invalid_argument("ellipse variety needs radii");
      break;
    case VarietyKind::PolynomialSystem:
      if (system.empty()) throw std::invalid_argument("polynomial system is empty");
      for (const auto& p : system) {
        if (p.num_vars() != system.front().num_vars() || p.num_vars() == 0) {
          throw std::invalid_argument("polynomial system mixes variable counts");
        }
      }
      if (!(box > 0.0)) throw std::invalid_argument("sampling box must be positive");
      break;
    case VarietyKind::Custom:
      if (custom_points.rows() < 1 || custom_points.cols() < 1) throw std::invalid_argument("custom variety needs points");
      break;
  }
  if (!extra_linear_vars.empty()) {
    const auto dim = variety == VarietyKind::ConcentricEllipses ? 2
                     : variety == VarietyKind::PolynomialSystem ? system.front().num_vars()
                                                                : static_cast<std::size_t>(custom_points.cols());
    for (const auto& w : extra_linear_vars) {
      if (w.empty() || w.size() >= dim) throw std::invalid_argument("mixing weights need 1 to n-1 entries");
    }
  }
}

namespace {

Matrix sample_ellipses(const DatasetSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, spec.radii.size() - 1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double c = std::cos(spec.rotation);
  const double s = std::sin(spec.rotation);
  Matrix out(static_cast<Eigen::Index>(spec.samples), 2);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const auto& r = spec.radii[pick(rng)];
    const double th = angle(rng);
    const double u = r.a * std::cos(th);
    const double v = r.b * std::sin(th);
    out(i, 0) = c * u - s * v;
    out(i, 1) = s * u + c * v;
  }
  return out;
}

// Gauss-Newton projection of a random box point onto the common zero set.
Matrix sample_system(const DatasetSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.system.front().num_vars();
  const std::size_t m = spec.system.size();
  std::vector<std::vector<DensePolynomial>> jac(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < n; ++k) jac[j].push_back(poly_diff(spec.system[j], k));
  }
  std::uniform_real_distribution<double> coord(-spec.box, spec.box);
  Matrix out(static_cast<Eigen::Index>(spec.samples), static_cast<Eigen::Index>(n));
  std::vector<double> x(n);
  Matrix jm(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  Matrix fv(static_cast<Eigen::Index>(m), 1);
  Eigen::Index filled = 0;
  std::size_t attempts = 0;
  while (filled < out.rows()) {
    if (++attempts > 1000 * spec.samples) throw std::runtime_error("could not sample the polynomial system");
    for (auto& v : x) v = coord(rng);
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      double res = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        fv(static_cast<Eigen::Index>(j), 0) = poly_eval(spec.system[j], x);
        res = std::max(res, std::abs(fv(static_cast<Eigen::Index>(j), 0)));
      }
      if (res <= 1e-13) {
        ok = true;
        break;
      }
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          jm(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = poly_eval(jac[j][k], x);
        }
      }
      const Matrix step = lstsq(jm, fv).solution;
      for (std::size_t k = 0; k < n; ++k) x[k] -= step(static_cast<Eigen::Index>(k), 0);
    }
    if (!ok) continue;
    bool inside = true;
    for (double v : x) inside = inside && std::isfinite(v) && std::abs(v) <= 10.0 * spec.box;
    if (!inside) continue;
    for (std::size_t k = 0; k < n; ++k) out(filled, static_cast<Eigen::Index>(k)) = x[k];
    ++filled;
  }
  return out;
}

}  // namespace

Matrix sample_base_points(const DatasetSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  switch (spec.variety) {
    case VarietyKind::ConcentricEllipses:
      return sample_ellipses(spec, rng);
    case VarietyKind::PolynomialSystem:
      return sample_system(spec, rng);
    case VarietyKind::Custom: {
      std::uniform_int_distribution<Eigen::Index> pick(0, spec.custom_points.rows() - 1);
      Matrix out(static_cast<Eigen::Index>(spec.samples), spec.custom_points.cols());
      for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = spec.custom_points.row(pick(rng));
      return out;
    }
  }
  throw std::invalid_argument("unknown variety");
}

Matrix append_linear_vars(const Matrix& base, const std::vector<std::vector<double>>& weights) {
  if (weights.empty()) return base;
  Matrix out(base.rows(), base.cols() + static_cast<Eigen::Index>(weights.size()));
  out.leftCols(base.cols()) = base;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& w = weights[i];
    const auto m = static_cast<Eigen::Index>(w.size());
    if (m < 1 || m >= base.cols()) throw std::invalid_argument("mixing weights need 1 to n-1 entries");
    double rest = 1.0;
    auto col = out.col(base.cols() + static_cast<Eigen::Index>(i));
    col.setZero();
    for (Eigen::Index k = 0; k < m; ++k) {
      col += w[static_cast<std::size_t>(k)] * base.col(k);
      rest -= w[static_cast<std::size_t>(k)];
    }
    col += rest * base.col(m);
  }
  return out;
}

PointSet generate_dataset(const DatasetSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  Matrix pts = append_linear_vars(sample_base_points(spec, rng), spec.extra_linear_vars);
  const Vector mean = pts.colwise().mean().transpose();
  pts.rowwise() -= mean.transpose();
  if (spec.noise_std_fraction > 0.0) {
    const double sigma = spec.noise_std_fraction * pts.cwiseAbs().mean();
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      for (Eigen::Index i = 0; i < pts.rows(); ++i) pts(i, j) += noise(rng);
    }
  }
  return PointSet(std::move(pts));
}

DatasetSpec d1_spec(std::size_t samples, double noise, std::uint64_t seed) {
  DatasetSpec s;
  s.variety = VarietyKind::ConcentricEllipses;
  const double r = std::sqrt(2.0);
  s.radii = {{r, 1.0 / r}, {2.0 * r, 2.0 / r}, {3.0 * r, 3.0 / r}};
  s.rotation = 3.0 * std::numbers::pi / 4.0;
  s.samples = samples;
  s.extra_linear_vars = {{0.0}, {0.2}, {0.5}, {0.8}, {1.0}};
  s.noise_std_fraction = noise;
  s.seed = seed;
  return s;
}

DatasetSpec d2_spec(std::size_t samples, double noise, std::uint64_t seed) {
  DatasetSpec s;
  s.variety = VarietyKind::PolynomialSystem;
  // x1 x3 - x2^2 and x1^3 - x2 x3
  s.system = {DensePolynomial(3, {{{1, 0, 1}, 1.0}, {{0, 2, 0}, -1.0}}),
              DensePolynomial(3, {{{3, 0, 0}, 1.0}, {{0, 1, 1}, -1.0}})};
  s.box = 1.0;
  s.samples = samples;
  s.extra_linear_vars.clear();
  for (double k : {0.2, 0.5, 0.8}) {
    for (double l : {0.2, 0.5, 0.8}) s.extra_linear_vars.push_back({k, l});
  }
  s.noise_std_fraction = noise;
  s.seed = seed;
  return s;
}

}  // namespace avi
