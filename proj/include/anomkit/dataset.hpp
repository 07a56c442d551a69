#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anomkit/matrix.hpp"

namespace anomkit {

enum class ColumnKind { Continuous, Categorical, Identifier };

const char* to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::string unit;  // optional, e.g. "cm", "kg"

  bool operator==(const ColumnSchema&) const = default;
};

// One table cell: a finite real, a category string, or missing.
class Cell {
 public:
  Cell() = default;

  static Cell missing() { return Cell(); }
  static Cell number(double v) {
    Cell c;
    c.state_ = State::Number;
    c.num_ = v;
    return c;
  }
  static Cell text(std::string s) {
    Cell c;
    c.state_ = State::Text;
    c.text_ = std::move(s);
    return c;
  }

  bool is_missing() const { return state_ == State::Missing; }
  bool is_number() const { return state_ == State::Number; }
  bool is_text() const { return state_ == State::Text; }

  double number_value() const { return num_; }
  const std::string& text_value() const { return text_; }

  bool operator==(const Cell&) const = default;

 private:
  enum class State { Missing, Number, Text };
  State state_ = State::Missing;
  double num_ = 0.0;
  std::string text_;
};

// Column-typed table with stable row identifiers; the single object every
// preprocessing step and detector front-end consumes. Immutable by
// convention: operations return transformed copies.
struct Dataset {
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> row_ids;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.size(); }

  // throws MissingColumnError
  std::size_t column_index(const std::string& name) const;
  // exactly one identifier column per schema
  std::size_t identifier_index() const;

  bool operator==(const Dataset&) const = default;
};

// Per-column standardization parameters, population convention (divide by n).
struct ScalerParams {
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::string> zero_variance;  // passed through unscaled
};

enum class AnomalyGrade {
  ExtremeMarginal,
  ModerateMarginal,
  BrokenCorrelation,
  SubtleCombination,
};

const char* to_string(AnomalyGrade grade);
AnomalyGrade grade_from_string(const std::string& s);

struct InjectionRecord {
  AnomalyGrade grade = AnomalyGrade::ExtremeMarginal;
  std::vector<Cell> payload;  // one full row, schema order
  std::string assigned_id;
};

struct EncodeReport {
  // original categorical column -> categories in first-appearance order
  std::vector<std::pair<std::string, std::vector<std::string>>> encoding_map;
  std::vector<std::string> single_category_warnings;
};

enum class HeightUnit { Auto, Meters, Centimeters };

// --- schema / CSV ---------------------------------------------------------

std::vector<ColumnSchema> load_schema(const std::string& path);
std::vector<ColumnSchema> parse_schema_json(const std::string& text);

Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema);
Dataset parse_csv(const std::string& text, const std::vector<ColumnSchema>& schema);
void save_csv(const Dataset& ds, const std::string& path);
std::string to_csv(const Dataset& ds);

// --- preprocessing --------------------------------------------------------

std::pair<Dataset, std::size_t> drop_missing(const Dataset& ds);

Dataset derive_bmi(const Dataset& ds, const std::string& weight_col,
                   const std::string& height_col,
                   HeightUnit unit = HeightUnit::Auto);

std::pair<Dataset, EncodeReport> one_hot_encode(const Dataset& ds);

std::pair<Dataset, ScalerParams> standardize(const Dataset& ds);

// --- anomaly injection ----------------------------------------------------

std::pair<Dataset, std::vector<InjectionRecord>> inject_anomalies(
    const Dataset& ds, std::uint64_t seed,
    const std::vector<InjectionRecord>* explicit_spec = nullptr);

std::vector<InjectionRecord> parse_injection_spec(const std::string& text,
                                                  const Dataset& ds);
std::vector<InjectionRecord> load_injection_spec(const std::string& path,
                                                 const Dataset& ds);

// --- numeric view ---------------------------------------------------------

// All non-identifier columns as a dense matrix. Throws SchemaMismatchError
// if a column is categorical or a cell is missing.
Matrix numeric_matrix(const Dataset& ds);
std::vector<std::string> numeric_column_names(const Dataset& ds);

}  // namespace anomkit
