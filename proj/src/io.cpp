#include "avi/io.hpp"

#include "avi/sbc.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace avi {

// ---------------------------------------------------------------------------
// Numbers

std::string format_double(double v) {
  if (!std::isfinite(v)) throw FormatError("cannot serialise a non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool try_parse(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && errno != ERANGE && std::isfinite(out);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

double parse_double(const std::string& s) {
  double v = 0.0;
  if (!try_parse(trim(s), v)) throw FormatError("not a number: '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// CSV

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> vals(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && try_parse(cells[i], vals[i]);
    if (first) {
      first = false;
      width = cells.size();
      if (!numeric) {
        table.header = cells;
        continue;
      }
    }
    if (!numeric) throw FormatError("line " + std::to_string(lineno) + ": non-numeric or non-finite field");
    if (cells.size() != width) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields, got " +
                        std::to_string(cells.size()));
    }
    rows.push_back(std::move(vals));
  }
  table.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < width; ++k) table.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_csv(in);
}

PointSet read_points(const std::string& path) {
  CsvTable t = read_csv_file(path);
  if (t.rows.rows() == 0) throw FormatError("empty point set");
  return PointSet(std::move(t.rows));
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index k = 0; k < rows.cols(); ++k) out << (k ? "," : "") << format_double(rows(i, k));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace {

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(format_double(v(i)));
  return a;
}

Json mat_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(format_double(m(i, k)));
    a.push_back(std::move(row));
  }
  return a;
}

double num_from(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw FormatError("expected a number");
}

Vector vec_from(const Json& j) {
  if (!j.is_array()) throw FormatError("expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = num_from(j[i]);
  return v;
}

Matrix mat_from(const Json& j, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw FormatError("expected a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = num_from(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

Json handle_json(const PolyHandle& h) {
  return Json{{"degree", h.degree}, {"column", h.column}, {"kind", std::string(1, static_cast<char>(h.kind))}};
}

Tag tag_from(char c) {
  if (c == 'F') return Tag::F;
  if (c == 'G') return Tag::G;
  throw FormatError(std::string("bad partition tag '") + c + "'");
}

PolyHandle handle_from(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind.size() != 1) throw FormatError("bad handle kind");
  return {j.at("degree").get<int>(), j.at("column").get<std::size_t>(), tag_from(kind[0])};
}

std::vector<double> dvec_from(const Json& j) {
  const Vector v = vec_from(j);
  return {v.data(), v.data() + v.size()};
}

Json dvec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(format_double(x));
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

Json to_json(const BasisModel& model) {
  Json j;
  j["num_vars"] = model.num_vars;
  j["constant"] = format_double(model.constant_value);
  j["epsilon"] = format_double(model.epsilon);
  j["truncated"] = model.truncated;
  j["normalization"] = {{"kind", to_string(model.normalization.kind)},
                        {"var_subset", model.normalization.var_subset},
                        {"point_subset", model.normalization.point_subset}};
  j["preprocessing"] = {{"center", vec_json(model.preprocessing.center)},
                        {"scale", format_double(model.preprocessing.scale)}};
  Json degrees = Json::array();
  for (const auto& rec : model.degrees) {
    Json d;
    d["degree"] = rec.degree;
    Json parents = Json::array();
    for (const auto& p : rec.parents) parents.push_back({p.first, p.second});
    d["parents"] = std::move(parents);
    d["ortho_weights"] = mat_json(rec.ortho_weights);
    d["eigvecs"] = mat_json(rec.eigvecs);
    d["eigvals"] = vec_json(rec.eigvals);
    std::string part;
    for (Tag t : rec.partition) part.push_back(static_cast<char>(t));
    d["partition"] = part;
    d["dropped_directions"] = rec.dropped_directions;
    degrees.push_back(std::move(d));
  }
  j["degrees"] = std::move(degrees);
  return j;
}

BasisModel model_from_json(const Json& j) {
  try {
    BasisModel m;
    m.num_vars = j.at("num_vars").get<std::size_t>();
    m.constant_value = num_from(j.at("constant"));
    m.epsilon = num_from(j.at("epsilon"));
    m.truncated = j.value("truncated", false);
    const Json& nj = j.at("normalization");
    m.normalization.kind = parse_norm_kind(nj.at("kind").get<std::string>());
    m.normalization.var_subset = nj.value("var_subset", std::vector<std::size_t>{});
    m.normalization.point_subset = nj.value("point_subset", std::vector<std::size_t>{});
    if (j.contains("preprocessing")) {
      m.preprocessing.center = vec_from(j["preprocessing"].at("center"));
      m.preprocessing.scale = num_from(j["preprocessing"].at("scale"));
    }
    for (const Json& d : j.at("degrees")) {
      DegreeRecord rec;
      rec.degree = d.at("degree").get<int>();
      for (const Json& p : d.at("parents")) rec.parents.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
      rec.ortho_weights = mat_from(d.at("ortho_weights"), static_cast<Eigen::Index>(rec.parents.size()));
      rec.eigvecs = mat_from(d.at("eigvecs"));
      rec.eigvals = vec_from(d.at("eigvals"));
      for (char c : d.at("partition").get<std::string>()) rec.partition.push_back(tag_from(c));
      rec.dropped_directions = d.value("dropped_directions", std::size_t{0});
      m.degrees.push_back(std::move(rec));
    }
    m.validate();
    if (!partition_consistent(m)) throw FormatError("model partition disagrees with its eigenvalues and epsilon");
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
}

Json to_json(const ReductionReport& r) {
  Json j;
  j["threshold"] = format_double(r.threshold);
  Json kept = Json::array();
  for (const auto& h : r.kept) kept.push_back(handle_json(h));
  j["kept"] = std::move(kept);
  Json removed = Json::array();
  for (const auto& e : r.removed) {
    removed.push_back(
        {{"handle", handle_json(e.handle)}, {"max_residual", format_double(e.max_residual)}, {"residuals", dvec_json(e.residuals)}});
  }
  j["removed"] = std::move(removed);
  Json defl = Json::array();
  for (const auto& s : r.rank_deflated) {
    Json hs = Json::array();
    for (const auto& h : s.removed) hs.push_back(handle_json(h));
    defl.push_back({{"degree", s.degree}, {"before", s.before}, {"rank", s.rank}, {"removed", std::move(hs)}});
  }
  j["rank_deflated"] = std::move(defl);
  return j;
}

ReductionReport report_from_json(const Json& j) {
  try {
    ReductionReport r;
    r.threshold = num_from(j.at("threshold"));
    for (const Json& h : j.at("kept")) r.kept.push_back(handle_from(h));
    for (const Json& e : j.at("removed")) {
      r.removed.push_back({handle_from(e.at("handle")), num_from(e.at("max_residual")), dvec_from(e.at("residuals"))});
    }
    for (const Json& s : j.at("rank_deflated")) {
      DeflationStep step;
      step.degree = s.at("degree").get<int>();
      step.before = s.at("before").get<std::size_t>();
      step.rank = s.at("rank").get<std::size_t>();
      for (const Json& h : s.at("removed")) step.removed.push_back(handle_from(h));
      r.rank_deflated.push_back(std::move(step));
    }
    return r;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed reduction report: ") + e.what());
  }
}

Json to_json(const ModelFile& file) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["model"] = to_json(file.model);
  if (file.report) j["reduction"] = to_json(*file.report);
  return j;
}

ModelFile model_file_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format_version")) throw FormatError("not a model file");
  if (j["format_version"] != kModelFormatVersion) throw FormatError("unsupported model format version");
  ModelFile f;
  f.model = model_from_json(j.at("model"));
  if (j.contains("reduction")) {
    f.report = report_from_json(j["reduction"]);
    for (const auto& h : f.report->kept) f.model.check_handle(h);
  }
  return f;
}

std::string serialize(const ModelFile& file) { return to_json(file).dump(1) + "\n"; }

ModelFile deserialize(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_file_from_json(j);
}

void save_model(const std::string& path, const ModelFile& file) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << serialize(file);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

// ---------------------------------------------------------------------------
// Reports

Json to_json(const InvarianceReport& rep) {
  auto counts = [](const std::vector<DegreeCounts>& v) {
    Json a = Json::array();
    for (const auto& c : v) a.push_back({{"g", c.g}, {"f", c.f}});
    return a;
  };
  Json ratios = Json::array();
  for (const auto& per : rep.eigenvalue_ratios) ratios.push_back(per);
  return Json{{"alpha", rep.alpha},
              {"counts", {{"base", counts(rep.base)}, {"translated", counts(rep.translated)}, {"scaled", counts(rep.scaled)}}},
              {"translation_counts_equal", rep.translation_counts_equal()},
              {"scaling_counts_equal", rep.scaling_counts_equal()},
              {"eigenvalue_ratios", std::move(ratios)},
              {"max_ratio_error", rep.max_ratio_error()},
              {"translation_gap_g", rep.translation_gap_g},
              {"translation_gap_f", rep.translation_gap_f},
              {"scaling_gap_g", rep.scaling_gap_g},
              {"scaling_gap_f", rep.scaling_gap_f},
              {"max_eval_discrepancy", rep.max_eval_discrepancy}};
}

Json to_json(const EpsilonSearchResult& res) {
  Json trace = Json::array();
  for (const auto& p : res.trace) trace.push_back({{"epsilon", p.epsilon}, {"satisfied", p.satisfied}, {"g_counts", p.g_counts}});
  Json j{{"found", res.found}, {"trace", std::move(trace)}};
  if (res.found) {
    j["epsilon"] = res.epsilon;
    j["range"] = {res.lo, res.hi};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Dataset specs

DatasetSpec dataset_spec_from_json(const Json& j) {
  try {
    DatasetSpec s;
    if (j.contains("preset")) {
      const std::string preset = j["preset"].get<std::string>();
      if (preset == "d1") {
        s = d1_spec(75, 0.05, 0);
      } else if (preset == "d2") {
        s = d2_spec(100, 0.05, 0);
      } else {
        throw FormatError("unknown preset '" + preset + "'");
      }
    } else {
      s.variety = parse_variety(j.at("variety").get<std::string>());
    }
    if (j.contains("radii")) {
      s.radii.clear();
      for (const Json& r : j["radii"]) s.radii.push_back({num_from(r.at(0)), num_from(r.at(1))});
    }
    if (j.contains("rotation")) s.rotation = num_from(j["rotation"]);
    if (j.contains("system")) {
      s.system.clear();
      const std::size_t n = j.at("num_vars").get<std::size_t>();
      for (const Json& p : j["system"]) {
        DensePolynomial poly(n);
        for (const Json& term : p) poly.add_term(term.at("exponent").get<Exponent>(), num_from(term.at("coefficient")));
        s.system.push_back(std::move(poly));
      }
    }
    if (j.contains("box")) s.box = num_from(j["box"]);
    if (j.contains("points")) s.custom_points = mat_from(j["points"]);
    if (j.contains("samples")) s.samples = j["samples"].get<std::size_t>();
    if (j.contains("extra_linear_vars")) {
      s.extra_linear_vars.clear();
      for (const Json& w : j["extra_linear_vars"]) {
        s.extra_linear_vars.push_back(w.is_array() ? dvec_from(w) : std::vector<double>{num_from(w)});
      }
    }
    if (j.contains("noise_std_fraction")) s.noise_std_fraction = num_from(j["noise_std_fraction"]);
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed dataset spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid dataset spec: ") + e.what());
  }
}

}  // namespace avi
