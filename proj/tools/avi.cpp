// avi: fit, reduce and inspect approximate vanishing ideal bases from CSV data.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "avi/analysis.hpp"
#include "avi/dataset.hpp"
#include "avi/io.hpp"
#include "avi/reduction.hpp"
#include "avi/sbc.hpp"

using namespace avi;

namespace {

double default_rank_tol() {
  if (const char* env = std::getenv("AVI_RANK_TOL")) return parse_double(env);
  return kDefaultRankTol;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_double(cell));
  return out;
}

struct NormFlags {
  std::string kind = "grad";
  std::vector<std::size_t> vars;
  std::vector<std::size_t> points;

  void add(CLI::App* app) {
    app->add_option("--normalization", kind, "vca | coef | grad | subgrad")
        ->check(CLI::IsMember({"vca", "identity", "coef", "coefficient", "grad", "gradient", "subgrad", "subsampled"}));
    app->add_option("--var-subset", vars, "variable indices for subgrad (0-based)")->delimiter(',');
    app->add_option("--point-subset", points, "point indices for subgrad (0-based)")->delimiter(',');
  }

  NormalizationKind get() const {
    NormalizationKind k;
    k.kind = parse_norm_kind(kind);
    if (k.kind == NormKind::SubsampledGradient) {
      k.var_subset = vars;
      k.point_subset = points;
    } else if (!vars.empty() || !points.empty()) {
      throw CLI::ValidationError("--var-subset/--point-subset only apply to --normalization subgrad");
    }
    return k;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
}

std::string csv_text(const std::vector<std::string>& header, const Matrix& rows) {
  std::ostringstream ss;
  write_csv(ss, header, rows);
  return ss.str();
}

void print_summary(const BasisModel& m) {
  std::printf("%-6s %6s %6s %14s %14s\n", "degree", "|G_t|", "|F_t|", "min sqrt(l)", "max sqrt(l)");
  for (const auto& rec : m.degrees) {
    double lo = 0.0, hi = 0.0;
    if (rec.eigvals.size() > 0) {
      lo = std::sqrt(rec.eigvals.minCoeff());
      hi = std::sqrt(rec.eigvals.maxCoeff());
    }
    std::printf("%-6d %6zu %6zu %14.6e %14.6e\n", rec.degree, rec.count(Tag::G), rec.count(Tag::F), lo, hi);
  }
  std::printf("total G: %zu  total F: %zu%s\n", m.count(Tag::G), m.count(Tag::F),
              m.truncated ? "  (truncated at max degree)" : "");
}

std::vector<PolyHandle> select_handles(const ModelFile& f, const std::string& which) {
  if (which == "F") return f.model.handles(Tag::F);
  if (which == "all") return f.model.all_handles();
  return f.report ? f.report->kept : f.model.handles(Tag::G);
}

std::vector<std::string> labels(const BasisModel& m, const std::vector<PolyHandle>& hs, const std::string& prefix = "") {
  std::vector<std::string> out;
  for (const auto& h : hs) out.push_back(prefix + m.label(h));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate vanishing ideal bases"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a basis to a point set");
  std::string fit_in, fit_out;
  double fit_eps = 0.0;
  int fit_maxdeg = 0;
  double fit_rank_tol = -1.0;
  bool fit_center = false, fit_unit = false;
  NormFlags fit_norm;
  fit_cmd->add_option("input", fit_in, "points CSV")->required();
  fit_cmd->add_option("-o,--output", fit_out, "model JSON")->required();
  fit_cmd->add_option("--epsilon", fit_eps)->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--max-degree", fit_maxdeg, "default |X|")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--rank-tol", fit_rank_tol)->check(CLI::NonNegativeNumber);
  fit_cmd->add_flag("--center", fit_center);
  fit_cmd->add_flag("--unit-mean-norm", fit_unit);
  fit_norm.add(fit_cmd);

  // reduce
  auto* red_cmd = app.add_subcommand("reduce", "remove redundant vanishing polynomials");
  std::string red_model, red_points, red_out;
  double red_thr = kDefaultReductionThreshold;
  double red_rank_tol = -1.0;
  red_cmd->add_option("model", red_model)->required();
  red_cmd->add_option("points", red_points)->required();
  auto* red_thr_opt = red_cmd->add_option("--threshold,--reduction-threshold", red_thr)->check(CLI::NonNegativeNumber);
  red_cmd->add_option("-o,--output", red_out, "default: overwrite the input model");
  red_cmd->add_option("--rank-tol", red_rank_tol)->check(CLI::NonNegativeNumber);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate basis polynomials");
  std::string eval_model, eval_points, eval_out, eval_which = "G", eval_range;
  std::size_t eval_grid = 0;
  eval_cmd->add_option("model", eval_model)->required();
  eval_cmd->add_option("points", eval_points)->required();
  eval_cmd->add_option("--handles", eval_which)->check(CLI::IsMember({"G", "F", "all"}));
  eval_cmd->add_option("-o,--output", eval_out);
  eval_cmd->add_option("--grid", eval_grid, "N x N grid export for two-variable models");
  eval_cmd->add_option("--grid-range", eval_range, "xmin,xmax,ymin,ymax");

  // features
  auto* feat_cmd = app.add_subcommand("features", "absolute G-values per class model");
  std::vector<std::string> feat_models;
  std::string feat_points, feat_out;
  feat_cmd->add_option("--model", feat_models, "class model (repeat, class order)")
      ->required()
      ->allow_extra_args(false);
  feat_cmd->add_option("points", feat_points)->required();
  feat_cmd->add_option("-o,--output", feat_out);

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "translation and scaling consistency");
  std::string diag_points, diag_out, diag_translate;
  double diag_scale = 1.0, diag_eps = 0.0, diag_rank_tol = -1.0;
  std::uint64_t diag_seed = 1;
  NormFlags diag_norm;
  diag_cmd->add_option("points", diag_points)->required();
  diag_cmd->add_option("--translate", diag_translate, "comma-separated shift b");
  diag_cmd->add_option("--scale", diag_scale, "alpha");
  diag_cmd->add_option("--epsilon", diag_eps)->check(CLI::NonNegativeNumber);
  diag_cmd->add_option("--rank-tol", diag_rank_tol)->check(CLI::NonNegativeNumber);
  diag_cmd->add_option("--seed", diag_seed, "probe seed");
  diag_cmd->add_option("-o,--output", diag_out);
  diag_norm.add(diag_cmd);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "sample a dataset from a spec");
  std::string gen_spec, gen_out;
  gen_cmd->add_option("spec", gen_spec, "dataset spec JSON")->required();
  gen_cmd->add_option("-o,--output", gen_out);

  // epsilon-search
  auto* eps_cmd = app.add_subcommand("epsilon-search", "scan epsilon for a target basis shape");
  std::string eps_points, eps_out, eps_model;
  EpsilonTarget eps_target;
  EpsilonGrid eps_grid;
  double eps_rank_tol = -1.0;
  bool eps_center = false, eps_unit = false;
  NormFlags eps_norm;
  eps_cmd->add_option("points", eps_points)->required();
  eps_cmd->add_option("--num-linear", eps_target.num_linear)->required();
  eps_cmd->add_option("--d-min", eps_target.d_min)->required()->check(CLI::PositiveNumber);
  eps_cmd->add_option("--num-at-dmin", eps_target.num_at_dmin)->required();
  eps_cmd->add_option("--grid-lo", eps_grid.lo)->check(CLI::PositiveNumber);
  eps_cmd->add_option("--grid-hi", eps_grid.hi)->check(CLI::PositiveNumber);
  eps_cmd->add_option("--grid-count", eps_grid.count)->check(CLI::PositiveNumber);
  eps_cmd->add_option("--rank-tol", eps_rank_tol)->check(CLI::NonNegativeNumber);
  eps_cmd->add_flag("--center", eps_center);
  eps_cmd->add_flag("--unit-mean-norm", eps_unit);
  eps_cmd->add_option("--fit-output", eps_model, "write the model fitted at the selected epsilon");
  eps_cmd->add_option("-o,--output", eps_out);
  eps_norm.add(eps_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    auto tol = [](double flag) { return flag >= 0.0 ? flag : default_rank_tol(); };

    if (*fit_cmd) {
      FitConfig cfg;
      cfg.epsilon = fit_eps;
      cfg.normalization = fit_norm.get();
      cfg.max_degree = fit_maxdeg;
      cfg.rank_tol = tol(fit_rank_tol);
      cfg.center = fit_center;
      cfg.unit_mean_norm = fit_unit;
      const ModelFile f{fit(read_points(fit_in), cfg), std::nullopt};
      save_model(fit_out, f);
      print_summary(f.model);
    } else if (*red_cmd) {
      ModelFile f = load_model(red_model);
      if (f.model.epsilon > 0.0 && red_thr_opt->count() == 0) {
        throw CLI::ValidationError("--threshold is required for models fitted with epsilon > 0");
      }
      f.report = reduce_basis(f.model, read_points(red_points), red_thr, tol(red_rank_tol));
      save_model(red_out.empty() ? red_model : red_out, f);
      std::size_t deflated = 0;
      for (const auto& s : f.report->rank_deflated) deflated += s.removed.size();
      std::printf("kept %zu  removed %zu  rank-deflated %zu  (threshold %.3g)\n", f.report->kept.size(),
                  f.report->removed.size(), deflated, f.report->threshold);
    } else if (*eval_cmd) {
      const ModelFile f = load_model(eval_model);
      const PointSet pts = read_points(eval_points);
      const auto hs = select_handles(f, eval_which);
      if (eval_grid == 0) {
        emit(eval_out, csv_text(labels(f.model, hs), evaluate(f.model, hs, pts)));
      } else {
        if (f.model.num_vars != 2) throw CLI::ValidationError("--grid needs a two-variable model");
        double x0, x1, y0, y1;
        if (!eval_range.empty()) {
          const auto r = parse_list(eval_range);
          if (r.size() != 4) throw CLI::ValidationError("--grid-range needs xmin,xmax,ymin,ymax");
          x0 = r[0], x1 = r[1], y0 = r[2], y1 = r[3];
        } else {
          const Vector lo = pts.points.colwise().minCoeff().transpose();
          const Vector hi = pts.points.colwise().maxCoeff().transpose();
          const double px = 0.1 * (hi(0) - lo(0)) + 0.1, py = 0.1 * (hi(1) - lo(1)) + 0.1;
          x0 = lo(0) - px, x1 = hi(0) + px, y0 = lo(1) - py, y1 = hi(1) + py;
        }
        const auto g = static_cast<Eigen::Index>(eval_grid);
        Matrix grid(g * g, 2);
        for (Eigen::Index i = 0; i < g; ++i) {
          for (Eigen::Index j = 0; j < g; ++j) {
            const double fx = g > 1 ? static_cast<double>(i) / static_cast<double>(g - 1) : 0.5;
            const double fy = g > 1 ? static_cast<double>(j) / static_cast<double>(g - 1) : 0.5;
            grid(i * g + j, 0) = x0 + (x1 - x0) * fx;
            grid(i * g + j, 1) = y0 + (y1 - y0) * fy;
          }
        }
        const Matrix vals = evaluate(f.model, hs, PointSet(grid));
        Matrix out(grid.rows(), 2 + vals.cols());
        out << grid, vals;
        auto header = labels(f.model, hs);
        header.insert(header.begin(), {"x", "y"});
        emit(eval_out, csv_text(header, out));
      }
    } else if (*feat_cmd) {
      std::vector<BasisModel> models;
      std::vector<std::vector<PolyHandle>> kept;
      std::vector<std::string> header;
      for (std::size_t i = 0; i < feat_models.size(); ++i) {
        const ModelFile f = load_model(feat_models[i]);
        kept.push_back(f.report ? f.report->kept : f.model.handles(Tag::G));
        for (const auto& l : labels(f.model, kept.back(), "c" + std::to_string(i) + "_")) header.push_back(l);
        models.push_back(f.model);
      }
      emit(feat_out, csv_text(header, extract_features(models, read_points(feat_points), kept)));
    } else if (*diag_cmd) {
      const PointSet pts = read_points(diag_points);
      Vector b = Vector::Zero(static_cast<Eigen::Index>(pts.dim()));
      if (!diag_translate.empty()) {
        const auto v = parse_list(diag_translate);
        if (v.size() != pts.dim()) throw CLI::ValidationError("--translate needs one value per coordinate");
        for (std::size_t k = 0; k < v.size(); ++k) b(static_cast<Eigen::Index>(k)) = v[k];
      }
      InvarianceOptions opts;
      opts.normalization = diag_norm.get();
      opts.rank_tol = tol(diag_rank_tol);
      opts.seed = diag_seed;
      emit(diag_out, to_json(invariance_report(pts, b, diag_scale, diag_eps, opts)).dump(2) + "\n");
    } else if (*gen_cmd) {
      std::ifstream in(gen_spec);
      if (!in) throw FormatError("cannot open '" + gen_spec + "'");
      Json j;
      try {
        j = Json::parse(in);
      } catch (const Json::exception& e) {
        throw FormatError(std::string("dataset spec is not valid JSON: ") + e.what());
      }
      const PointSet ps = generate_dataset(dataset_spec_from_json(j));
      std::vector<std::string> header;
      for (std::size_t k = 0; k < ps.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
      emit(gen_out, csv_text(header, ps.points));
    } else if (*eps_cmd) {
      const PointSet pts = read_points(eps_points);
      FitConfig cfg;
      cfg.normalization = eps_norm.get();
      cfg.rank_tol = tol(eps_rank_tol);
      cfg.center = eps_center;
      cfg.unit_mean_norm = eps_unit;
      const EpsilonSearchResult res = epsilon_search(pts, eps_target, cfg, eps_grid);
      if (res.found && !eps_model.empty()) {
        cfg.epsilon = res.epsilon;
        save_model(eps_model, {fit(pts, cfg), std::nullopt});
      }
      emit(eps_out, to_json(res).dump(2) + "\n");
      if (!res.found) std::fprintf(stderr, "no epsilon in the grid satisfies the target\n");
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
