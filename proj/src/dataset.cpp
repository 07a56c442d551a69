#include "anomkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "anomkit/errors.hpp"
#include "anomkit/rng.hpp"

namespace anomkit {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// RFC-4180-ish line splitting: quoted fields, doubled quotes as escapes.
std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += "\"\"";
    else q += c;
  }
  q += '"';
  return q;
}

std::optional<double> parse_number(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Cell parse_cell(const std::string& raw, ColumnKind kind) {
  std::string s = trim(raw);
  if (s.empty()) return Cell::missing();
  switch (kind) {
    case ColumnKind::Continuous: {
      auto v = parse_number(s);
      return v ? Cell::number(*v) : Cell::missing();
    }
    case ColumnKind::Categorical:
    case ColumnKind::Identifier:
      return Cell::text(s);
  }
  return Cell::missing();
}

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// population moments over non-missing numeric cells of one column
ColumnStats column_stats(const Dataset& ds, std::size_t col) {
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& row : ds.rows) {
    if (!row[col].is_number()) continue;
    double v = row[col].number_value();
    sum += v;
    sum2 += v * v;
    ++n;
  }
  ColumnStats st;
  if (n == 0) return st;
  st.mean = sum / static_cast<double>(n);
  double var = sum2 / static_cast<double>(n) - st.mean * st.mean;
  st.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
  return st;
}

std::vector<std::size_t> continuous_columns(const Dataset& ds) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < ds.schema.size(); ++c) {
    if (ds.schema[c].kind == ColumnKind::Continuous) cols.push_back(c);
  }
  return cols;
}

}  // namespace

const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Continuous: return "continuous";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Identifier: return "identifier";
  }
  return "?";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "continuous") return ColumnKind::Continuous;
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "identifier") return ColumnKind::Identifier;
  throw ConfigError("unknown column kind: " + s);
}

const char* to_string(AnomalyGrade grade) {
  switch (grade) {
    case AnomalyGrade::ExtremeMarginal: return "extreme-marginal";
    case AnomalyGrade::ModerateMarginal: return "moderate-marginal";
    case AnomalyGrade::BrokenCorrelation: return "broken-correlation";
    case AnomalyGrade::SubtleCombination: return "subtle-combination";
  }
  return "?";
}

AnomalyGrade grade_from_string(const std::string& s) {
  if (s == "extreme-marginal") return AnomalyGrade::ExtremeMarginal;
  if (s == "moderate-marginal") return AnomalyGrade::ModerateMarginal;
  if (s == "broken-correlation") return AnomalyGrade::BrokenCorrelation;
  if (s == "subtle-combination") return AnomalyGrade::SubtleCombination;
  throw ConfigError("unknown anomaly grade: " + s);
}

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].name == name) return c;
  }
  throw MissingColumnError("no such column: " + name);
}

std::size_t Dataset::identifier_index() const {
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].kind == ColumnKind::Identifier) return c;
  }
  throw SchemaMismatchError("schema has no identifier column");
}

std::vector<ColumnSchema> parse_schema_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("columns") || !j["columns"].is_array()) {
    throw ConfigError("schema file must contain a \"columns\" array");
  }
  std::vector<ColumnSchema> schema;
  std::unordered_set<std::string> seen;
  std::size_t id_count = 0;
  for (const auto& col : j["columns"]) {
    ColumnSchema cs;
    cs.name = col.at("name").get<std::string>();
    cs.kind = column_kind_from_string(col.at("kind").get<std::string>());
    if (col.contains("unit") && !col["unit"].is_null()) {
      cs.unit = col["unit"].get<std::string>();
    }
    if (!seen.insert(cs.name).second) {
      throw ConfigError("duplicate column name in schema: " + cs.name);
    }
    if (cs.kind == ColumnKind::Identifier) ++id_count;
    schema.push_back(std::move(cs));
  }
  if (id_count != 1) {
    throw ConfigError("schema must contain exactly one identifier column");
  }
  return schema;
}

std::vector<ColumnSchema> load_schema(const std::string& path) {
  return parse_schema_json(read_file(path));
}

Dataset parse_csv(const std::string& text, const std::vector<ColumnSchema>& schema) {
  Dataset ds;
  ds.schema = schema;

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV input");

  auto header = split_csv_record(line);
  for (auto& h : header) h = trim(h);

  // map schema column -> CSV column index; extra CSV columns are ignored
  std::vector<std::size_t> source(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), schema[c].name);
    if (it == header.end()) {
      throw MissingColumnError("CSV header lacks column: " + schema[c].name);
    }
    source[c] = static_cast<std::size_t>(it - header.begin());
  }

  const std::size_t id_col = ds.identifier_index();
  std::unordered_set<std::string> seen_ids;

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_record(line);
    std::vector<Cell> row(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string raw =
          source[c] < fields.size() ? fields[source[c]] : std::string();
      row[c] = parse_cell(raw, schema[c].kind);
    }
    std::string id = row[id_col].is_text() ? row[id_col].text_value() : "";
    if (!seen_ids.insert(id).second) {
      throw DuplicateIdError("duplicate identifier value: " + id);
    }
    ds.row_ids.push_back(id);
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema) {
  return parse_csv(read_file(path), schema);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t c = 0; c < ds.schema.size(); ++c) {
    if (c) out += ',';
    out += csv_quote(ds.schema[c].name);
  }
  out += '\n';
  for (const auto& row : ds.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      const Cell& cell = row[c];
      if (cell.is_number()) out += format_number(cell.number_value());
      else if (cell.is_text()) out += csv_quote(cell.text_value());
      // missing -> empty field
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << to_csv(ds);
}

std::pair<Dataset, std::size_t> drop_missing(const Dataset& ds) {
  Dataset out;
  out.schema = ds.schema;
  std::size_t dropped = 0;
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    bool complete = true;
    for (const Cell& c : ds.rows[r]) {
      if (c.is_missing()) {
        complete = false;
        break;
      }
    }
    if (complete) {
      out.rows.push_back(ds.rows[r]);
      out.row_ids.push_back(ds.row_ids[r]);
    } else {
      ++dropped;
    }
  }
  if (out.rows.empty() && !ds.rows.empty()) {
    throw EmptyResultError("all rows contained missing cells");
  }
  return {std::move(out), dropped};
}

Dataset derive_bmi(const Dataset& ds, const std::string& weight_col,
                   const std::string& height_col, HeightUnit unit) {
  const std::size_t wc = ds.column_index(weight_col);
  const std::size_t hc = ds.column_index(height_col);
  if (ds.schema[wc].kind != ColumnKind::Continuous ||
      ds.schema[hc].kind != ColumnKind::Continuous) {
    throw SchemaMismatchError("BMI inputs must be continuous columns");
  }

  Dataset out = ds;
  out.schema.push_back({"BMI", ColumnKind::Continuous, ""});
  for (auto& row : out.rows) {
    const Cell& w = row[wc];
    const Cell& h = row[hc];
    if (!w.is_number() || !h.is_number()) {
      row.push_back(Cell::missing());
      continue;
    }
    double height = h.number_value();
    if (height <= 0.0) {
      throw NonPositiveHeightError("height must be positive, got " +
                                   format_number(height));
    }
    // heights above 3 are read as centimeters unless the unit is forced
    bool cm = unit == HeightUnit::Centimeters ||
              (unit == HeightUnit::Auto && height > 3.0);
    double meters = cm ? height / 100.0 : height;
    row.push_back(Cell::number(w.number_value() / (meters * meters)));
  }
  return out;
}

std::pair<Dataset, EncodeReport> one_hot_encode(const Dataset& ds) {
  EncodeReport report;
  Dataset out;
  out.row_ids = ds.row_ids;
  out.rows.resize(ds.n_rows());

  for (std::size_t c = 0; c < ds.schema.size(); ++c) {
    if (ds.schema[c].kind != ColumnKind::Categorical) {
      out.schema.push_back(ds.schema[c]);
      for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        out.rows[r].push_back(ds.rows[r][c]);
      }
      continue;
    }

    // categories in first-appearance order
    std::vector<std::string> categories;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      const Cell& cell = ds.rows[r][c];
      if (!cell.is_text()) continue;
      if (index.emplace(cell.text_value(), categories.size()).second) {
        categories.push_back(cell.text_value());
      }
    }
    if (categories.size() == 1) {
      report.single_category_warnings.push_back(ds.schema[c].name);
    }
    report.encoding_map.emplace_back(ds.schema[c].name, categories);

    for (const auto& cat : categories) {
      out.schema.push_back(
          {ds.schema[c].name + "=" + cat, ColumnKind::Continuous, ""});
    }
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      const Cell& cell = ds.rows[r][c];
      for (std::size_t k = 0; k < categories.size(); ++k) {
        double v = cell.is_text() && index.at(cell.text_value()) == k ? 1.0 : 0.0;
        out.rows[r].push_back(Cell::number(v));
      }
    }
  }
  return {std::move(out), std::move(report)};
}

std::pair<Dataset, ScalerParams> standardize(const Dataset& ds) {
  for (const auto& col : ds.schema) {
    if (col.kind == ColumnKind::Categorical) {
      throw SchemaMismatchError("standardize requires encoded (continuous) columns; "
                                "found categorical column: " + col.name);
    }
  }
  Dataset out = ds;
  ScalerParams params;
  for (std::size_t c : continuous_columns(ds)) {
    ColumnStats st = column_stats(ds, c);
    params.columns.push_back(ds.schema[c].name);
    params.mean.push_back(st.mean);
    params.stddev.push_back(st.stddev);
    if (st.stddev == 0.0) {
      params.zero_variance.push_back(ds.schema[c].name);
      continue;
    }
    for (auto& row : out.rows) {
      if (row[c].is_number()) {
        row[c] = Cell::number((row[c].number_value() - st.mean) / st.stddev);
      }
    }
  }
  return {std::move(out), std::move(params)};
}

namespace {

std::string fresh_id(const Dataset& ds, const std::vector<std::string>& taken,
                     std::size_t k) {
  auto in_use = [&](const std::string& id) {
    return std::find(ds.row_ids.begin(), ds.row_ids.end(), id) != ds.row_ids.end() ||
           std::find(taken.begin(), taken.end(), id) != taken.end();
  };
  std::string base = "inj-" + std::to_string(k);
  std::string id = base;
  for (std::size_t suffix = 2; in_use(id); ++suffix) {
    id = base + "-" + std::to_string(suffix);
  }
  return id;
}

// Pearson correlation between two continuous columns.
double pearson(const Dataset& ds, std::size_t a, std::size_t b) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  std::size_t n = 0;
  for (const auto& row : ds.rows) {
    if (!row[a].is_number() || !row[b].is_number()) continue;
    double x = row[a].number_value();
    double y = row[b].number_value();
    sa += x; sb += y; saa += x * x; sbb += y * y; sab += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  double nn = static_cast<double>(n);
  double cov = sab / nn - (sa / nn) * (sb / nn);
  double va = saa / nn - (sa / nn) * (sa / nn);
  double vb = sbb / nn - (sb / nn) * (sb / nn);
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

std::pair<Dataset, std::vector<InjectionRecord>> inject_anomalies(
    const Dataset& ds, std::uint64_t seed,
    const std::vector<InjectionRecord>* explicit_spec) {
  Dataset out = ds;
  std::vector<InjectionRecord> records;

  if (explicit_spec) {
    if (explicit_spec->size() != 4) {
      throw SchemaMismatchError("injection spec must contain exactly 4 anomalies");
    }
    std::vector<std::string> taken;
    for (std::size_t k = 0; k < 4; ++k) {
      InjectionRecord rec = (*explicit_spec)[k];
      if (rec.payload.size() != ds.schema.size()) {
        throw SchemaMismatchError("injection spec row has wrong arity");
      }
      if (rec.assigned_id.empty()) rec.assigned_id = fresh_id(ds, taken, k + 1);
      rec.payload[ds.identifier_index()] = Cell::text(rec.assigned_id);
      taken.push_back(rec.assigned_id);
      out.rows.push_back(rec.payload);
      out.row_ids.push_back(rec.assigned_id);
      records.push_back(std::move(rec));
    }
    return {std::move(out), std::move(records)};
  }

  const std::size_t n = ds.n_rows();
  auto cont = continuous_columns(ds);
  if (n < 2 || cont.size() < 2) {
    throw SchemaMismatchError(
        "generated injection needs >= 2 rows and >= 2 continuous columns");
  }

  Rng rng(seed);
  std::vector<ColumnStats> stats(ds.schema.size());
  for (std::size_t c : cont) stats[c] = column_stats(ds, c);

  // columns with spread, if any exist, are the candidates for marginal grades
  std::vector<std::size_t> spread_cols;
  for (std::size_t c : cont) {
    if (stats[c].stddev > 0.0) spread_cols.push_back(c);
  }
  if (spread_cols.empty()) spread_cols = cont;

  const std::size_t id_col = ds.identifier_index();
  std::vector<std::string> taken;

  auto push_record = [&](AnomalyGrade grade, std::vector<Cell> payload) {
    InjectionRecord rec;
    rec.grade = grade;
    rec.assigned_id = fresh_id(ds, taken, records.size() + 1);
    payload[id_col] = Cell::text(rec.assigned_id);
    rec.payload = payload;
    taken.push_back(rec.assigned_id);
    out.rows.push_back(std::move(payload));
    out.row_ids.push_back(rec.assigned_id);
    records.push_back(std::move(rec));
  };

  // grade 1: one feature at mu + 10 sigma
  {
    std::size_t feat = spread_cols[rng.uniform_index(spread_cols.size())];
    std::vector<Cell> payload = ds.rows[rng.uniform_index(n)];
    payload[feat] =
        Cell::number(stats[feat].mean + 10.0 * stats[feat].stddev);
    push_record(AnomalyGrade::ExtremeMarginal, std::move(payload));
  }

  // grade 2: one feature at mu + 4 sigma
  {
    std::size_t feat = spread_cols[rng.uniform_index(spread_cols.size())];
    std::vector<Cell> payload = ds.rows[rng.uniform_index(n)];
    payload[feat] =
        Cell::number(stats[feat].mean + 4.0 * stats[feat].stddev);
    push_record(AnomalyGrade::ModerateMarginal, std::move(payload));
  }

  // grade 3: take the most correlated pair (a, b); copy the row with the
  // lowest a and give it the b value of the row with the highest a. Every
  // cell stays inside its marginal range, the joint relationship breaks.
  {
    std::size_t best_a = cont[0], best_b = cont[1];
    double best = -1.0;
    for (std::size_t i = 0; i < cont.size(); ++i) {
      for (std::size_t j = i + 1; j < cont.size(); ++j) {
        double r = std::fabs(pearson(ds, cont[i], cont[j]));
        if (r > best) {
          best = r;
          best_a = cont[i];
          best_b = cont[j];
        }
      }
    }
    std::size_t lo = n, hi = n;
    for (std::size_t r = 0; r < n; ++r) {
      if (!ds.rows[r][best_a].is_number()) continue;
      if (lo == n || ds.rows[r][best_a].number_value() <
                         ds.rows[lo][best_a].number_value()) lo = r;
      if (hi == n || ds.rows[r][best_a].number_value() >
                         ds.rows[hi][best_a].number_value()) hi = r;
    }
    if (lo == n) lo = hi = 0;
    std::vector<Cell> payload = ds.rows[lo];
    payload[best_b] = ds.rows[hi][best_b];
    push_record(AnomalyGrade::BrokenCorrelation, std::move(payload));
  }

  // grade 4: every feature nudged by +1.5 sigma at once
  {
    std::vector<Cell> payload = ds.rows[rng.uniform_index(n)];
    for (std::size_t c : cont) {
      if (payload[c].is_number()) {
        payload[c] = Cell::number(payload[c].number_value() +
                                  1.5 * stats[c].stddev);
      }
    }
    push_record(AnomalyGrade::SubtleCombination, std::move(payload));
  }

  return {std::move(out), std::move(records)};
}

std::vector<InjectionRecord> parse_injection_spec(const std::string& text,
                                                  const Dataset& ds) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("anomalies") || !j["anomalies"].is_array()) {
    throw ConfigError("injection spec must contain an \"anomalies\" array");
  }
  std::vector<InjectionRecord> records;
  for (const auto& a : j["anomalies"]) {
    InjectionRecord rec;
    rec.grade = grade_from_string(a.at("grade").get<std::string>());
    if (a.contains("id")) rec.assigned_id = a["id"].get<std::string>();
    rec.payload.assign(ds.schema.size(), Cell::missing());
    const auto& values = a.at("values");
    for (auto it = values.begin(); it != values.end(); ++it) {
      std::size_t c = ds.column_index(it.key());
      if (ds.schema[c].kind == ColumnKind::Continuous) {
        rec.payload[c] = Cell::number(it.value().get<double>());
      } else {
        rec.payload[c] = Cell::text(it.value().is_string()
                                        ? it.value().get<std::string>()
                                        : it.value().dump());
      }
    }
    // every non-identifier column must be supplied
    for (std::size_t c = 0; c < ds.schema.size(); ++c) {
      if (ds.schema[c].kind == ColumnKind::Identifier) continue;
      if (rec.payload[c].is_missing()) {
        throw SchemaMismatchError("injection spec row lacks column: " +
                                  ds.schema[c].name);
      }
    }
    records.push_back(std::move(rec));
  }
  if (records.size() != 4) {
    throw SchemaMismatchError("injection spec must contain exactly 4 anomalies");
  }
  return records;
}

std::vector<InjectionRecord> load_injection_spec(const std::string& path,
                                                 const Dataset& ds) {
  return parse_injection_spec(read_file(path), ds);
}

Matrix numeric_matrix(const Dataset& ds) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < ds.schema.size(); ++c) {
    if (ds.schema[c].kind == ColumnKind::Identifier) continue;
    if (ds.schema[c].kind != ColumnKind::Continuous) {
      throw SchemaMismatchError("dataset is not fully continuous; column " +
                                ds.schema[c].name + " is categorical");
    }
    cols.push_back(c);
  }
  Matrix m(ds.n_rows(), cols.size());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Cell& cell = ds.rows[r][cols[k]];
      if (!cell.is_number()) {
        throw SchemaMismatchError("missing cell in row " + ds.row_ids[r] +
                                  ", column " + ds.schema[cols[k]].name);
      }
      m(r, k) = cell.number_value();
    }
  }
  return m;
}

std::vector<std::string> numeric_column_names(const Dataset& ds) {
  std::vector<std::string> names;
  for (const auto& col : ds.schema) {
    if (col.kind != ColumnKind::Identifier) names.push_back(col.name);
  }
  return names;
}

}  // namespace anomkit
