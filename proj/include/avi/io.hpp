#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "avi/analysis.hpp"
#include "avi/dataset.hpp"
#include "avi/model.hpp"
#include "avi/reduction.hpp"

namespace avi {

using Json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  Matrix rows;
};

/// One point per row. A first row that does not parse as numbers is taken as
/// a header. Errors name the offending line.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
PointSet read_points(const std::string& path);

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows);

/// Shortest-safe text form of a double: 17 significant digits.
std::string format_double(double v);
double parse_double(const std::string& s);

// ---------------------------------------------------------------------------
// Models

struct ModelFile {
  BasisModel model;
  std::optional<ReductionReport> report;
};

Json to_json(const BasisModel& model);
Json to_json(const ReductionReport& report);
Json to_json(const ModelFile& file);
Json to_json(const InvarianceReport& rep);
Json to_json(const EpsilonSearchResult& res);

BasisModel model_from_json(const Json& j);
ReductionReport report_from_json(const Json& j);
ModelFile model_file_from_json(const Json& j);

std::string serialize(const ModelFile& file);
ModelFile deserialize(const std::string& text);

void save_model(const std::string& path, const ModelFile& file);
ModelFile load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Dataset specs

/// Either {"preset": "d1"|"d2", ...overrides} or an explicit variety.
DatasetSpec dataset_spec_from_json(const Json& j);

}  // namespace avi
