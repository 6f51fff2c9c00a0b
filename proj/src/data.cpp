#include "gaminet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_map>

#include "gaminet/errors.hpp"
#include "gaminet/rng.hpp"

namespace gaminet {

Task task_from_string(const std::string& name) {
  if (name == "regression") return Task::kRegression;
  if (name == "binary_classification") return Task::kBinaryClassification;
  throw ValidationError("unknown task: " + name +
                        " (expected regression or binary_classification)");
}

std::string to_string(Task t) {
  return t == Task::kRegression ? "regression" : "binary_classification";
}

Schema Schema::from_toml(const TomlTable& table) {
  Schema s;
  s.response = table.get_string("response", "");
  s.numerical = table.get_string_array("numerical");
  s.categorical = table.get_string_array("categorical");
  s.ignore = table.get_string_array("ignore");
  s.validate();
  return s;
}

void Schema::validate() const {
  std::set<std::string> seen;
  auto check = [&seen](const std::string& name) {
    if (name.empty()) throw ValidationError("schema: empty column name");
    if (!seen.insert(name).second)
      throw ValidationError("schema: column declared twice: " + name);
  };
  for (const auto& c : numerical) check(c);
  for (const auto& c : categorical) check(c);
  for (const auto& c : ignore) check(c);
  if (!response.empty()) check(response);
  if (numerical.empty() && categorical.empty())
    throw ValidationError("schema declares no feature columns");
}

bool Schema::declares(const std::string& column) const {
  auto in = [&column](const std::vector<std::string>& v) {
    return std::find(v.begin(), v.end(), column) != v.end();
  };
  return column == response || in(numerical) || in(categorical) || in(ignore);
}

ColumnRole Schema::role_of(const std::string& column) const {
  auto in = [&column](const std::vector<std::string>& v) {
    return std::find(v.begin(), v.end(), column) != v.end();
  };
  if (column == response) return ColumnRole::kResponse;
  if (in(numerical)) return ColumnRole::kNumerical;
  if (in(categorical)) return ColumnRole::kCategorical;
  if (in(ignore)) return ColumnRole::kIgnore;
  throw ValidationError("column has no declared role: " + column);
}

const RawColumn* RawTable::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

bool RawTable::has_response() const {
  for (const auto& c : columns)
    if (c.role == ColumnRole::kResponse) return true;
  return false;
}

namespace {

// One CSV record, honoring quoted fields (embedded commas, quotes and
// newlines). Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string cell;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          cell.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(cell);
      cell.clear();
    } else if (ch == '\n') {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      fields.push_back(cell);
      return true;
    } else {
      cell.push_back(ch);
    }
  }
  if (!any) return false;
  if (!cell.empty() && cell.back() == '\r') cell.pop_back();
  fields.push_back(cell);
  return true;
}

double parse_decimal(const std::string& cell, std::size_t row,
                     const std::string& column) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    while (used < cell.size() &&
           std::isspace(static_cast<unsigned char>(cell[used])))
      ++used;
    if (used != cell.size()) throw std::invalid_argument(cell);
    if (!std::isfinite(v)) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(row) + ", column `" + column +
                    "`: cannot parse numeric cell \"" + cell + "\"");
  }
}

}  // namespace

RawTable load_csv(const std::string& path, const Schema& schema,
                  bool require_response) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file: " + path);

  std::vector<std::string> header;
  if (!read_record(in, header) || header.empty())
    throw DataError(path + ": empty dataset (no header row)");

  for (const auto& col : header)
    if (!schema.declares(col))
      throw ValidationError("column `" + col + "` has no declared role in the schema");
  auto require_column = [&](const std::string& name) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw ValidationError("schema references a missing column: " + name);
  };
  for (const auto& c : schema.numerical) require_column(c);
  for (const auto& c : schema.categorical) require_column(c);
  if (!schema.response.empty() && require_response) require_column(schema.response);

  RawTable table;
  std::vector<int> keep;  // header positions of retained columns
  for (std::size_t i = 0; i < header.size(); ++i) {
    ColumnRole role = schema.role_of(header[i]);
    if (role == ColumnRole::kIgnore) continue;
    if (role == ColumnRole::kResponse && !require_response) {
      // Prediction inputs may omit response values entirely.
    }
    RawColumn col;
    col.name = header[i];
    col.role = role;
    table.columns.push_back(std::move(col));
    keep.push_back(static_cast<int>(i));
  }

  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_record(in, fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(fields.size()));
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
      RawColumn& col = table.columns[k];
      const std::string& cell = fields[keep[k]];
      if (cell.empty())
        throw DataError("row " + std::to_string(row) + ", column `" + col.name +
                        "`: missing value");
      if (col.role == ColumnRole::kCategorical) {
        col.strings.push_back(cell);
      } else {
        col.numbers.push_back(parse_decimal(cell, row, col.name));
      }
    }
    table.n_rows++;
  }
  if (table.n_rows == 0) throw DataError(path + ": empty dataset");
  return table;
}

RawTable load_csv_columns(const std::string& path,
                          const std::vector<FeatureMeta>& meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file: " + path);

  std::vector<std::string> header;
  if (!read_record(in, header) || header.empty())
    throw DataError(path + ": empty dataset (no header row)");

  RawTable table;
  std::vector<int> positions;
  for (const auto& m : meta) {
    const auto it = std::find(header.begin(), header.end(), m.name);
    if (it == header.end())
      throw ValidationError("data is missing feature column: " + m.name);
    RawColumn col;
    col.name = m.name;
    col.role = m.kind == FeatureKind::kNumerical ? ColumnRole::kNumerical
                                                 : ColumnRole::kCategorical;
    table.columns.push_back(std::move(col));
    positions.push_back(static_cast<int>(it - header.begin()));
  }

  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_record(in, fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(fields.size()));
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
      RawColumn& col = table.columns[k];
      const std::string& cell = fields[positions[k]];
      if (cell.empty())
        throw DataError("row " + std::to_string(row) + ", column `" + col.name +
                        "`: missing value");
      if (col.role == ColumnRole::kCategorical)
        col.strings.push_back(cell);
      else
        col.numbers.push_back(parse_decimal(cell, row, col.name));
    }
    table.n_rows++;
  }
  if (table.n_rows == 0) throw DataError(path + ": empty dataset");
  return table;
}

Dataset fit_transform(const RawTable& table, Task task) {
  if (table.n_rows < 2)
    throw ValidationError("need at least 2 rows to fit the pipeline");

  Dataset out;
  out.task = task;

  const std::size_t n = table.n_rows;
  std::vector<const RawColumn*> kept;
  for (const auto& col : table.columns) {
    if (col.role == ColumnRole::kResponse) continue;
    FeatureMeta meta;
    meta.name = col.name;
    if (col.role == ColumnRole::kNumerical) {
      meta.kind = FeatureKind::kNumerical;
      const auto [lo, hi] = std::minmax_element(col.numbers.begin(), col.numbers.end());
      meta.scale_min = *lo;
      meta.scale_max = *hi;
      if (meta.scale_max <= meta.scale_min) {
        std::cerr << "warning: column `" << col.name
                  << "` is constant; excluded from modeling\n";
        out.dropped_constant.push_back(col.name);
        continue;
      }
    } else {
      meta.kind = FeatureKind::kCategorical;
      std::unordered_map<std::string, int> index;
      for (const auto& s : col.strings) {
        if (index.emplace(s, static_cast<int>(meta.levels.size())).second)
          meta.levels.push_back(s);
      }
      if (meta.levels.size() < 2) {
        std::cerr << "warning: column `" << col.name
                  << "` is constant; excluded from modeling\n";
        out.dropped_constant.push_back(col.name);
        continue;
      }
    }
    out.meta.push_back(std::move(meta));
    kept.push_back(&col);
  }
  if (out.meta.empty())
    throw ValidationError("no usable feature columns after excluding constants");

  out.features = transform_features(table, out.meta);

  const RawColumn* resp = nullptr;
  for (const auto& col : table.columns)
    if (col.role == ColumnRole::kResponse) resp = &col;
  if (resp) {
    out.response = Eigen::Map<const Eigen::VectorXd>(resp->numbers.data(),
                                                     static_cast<long>(n));
    if (task == Task::kBinaryClassification) {
      for (long i = 0; i < out.response.size(); ++i)
        if (out.response[i] != 0.0 && out.response[i] != 1.0)
          throw ValidationError("non-binary response for classification at row " +
                                std::to_string(i + 1) + ": " +
                                std::to_string(out.response[i]));
    }
  }
  return out;
}

Eigen::MatrixXd transform_features(const RawTable& table,
                                   const std::vector<FeatureMeta>& meta) {
  const std::size_t n = table.n_rows;
  Eigen::MatrixXd x(n, meta.size());
  for (std::size_t j = 0; j < meta.size(); ++j) {
    const FeatureMeta& m = meta[j];
    const RawColumn* col = table.find(m.name);
    if (!col) throw ValidationError("data is missing feature column: " + m.name);
    if (m.kind == FeatureKind::kNumerical) {
      if (col->numbers.size() != n)
        throw DataError("column `" + m.name + "` is not numerical");
      const double range = m.scale_max - m.scale_min;
      for (std::size_t i = 0; i < n; ++i)
        x(i, j) = (col->numbers[i] - m.scale_min) / range;
    } else {
      if (col->strings.size() != n)
        throw DataError("column `" + m.name + "` is not categorical");
      std::unordered_map<std::string, int> index;
      for (std::size_t l = 0; l < m.levels.size(); ++l)
        index[m.levels[l]] = static_cast<int>(l);
      for (std::size_t i = 0; i < n; ++i) {
        auto it = index.find(col->strings[i]);
        if (it == index.end())
          throw DataError("row " + std::to_string(i + 1) + ", column `" + m.name +
                          "`: unseen level \"" + col->strings[i] + "\"");
        x(i, j) = static_cast<double>(it->second);
      }
    }
  }
  return x;
}

double inverse_scale(const FeatureMeta& meta, double scaled) {
  return meta.scale_min + scaled * (meta.scale_max - meta.scale_min);
}

Dataset Dataset::take(const std::vector<int>& rows) const {
  Dataset out;
  out.task = task;
  out.meta = meta;
  out.dropped_constant = dropped_constant;
  out.features.resize(rows.size(), features.cols());
  const bool has_y = response.size() == features.rows();
  if (has_y) out.response.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(i) = features.row(rows[i]);
    if (has_y) out.response[i] = response[rows[i]];
  }
  return out;
}

SplitResult split(const Dataset& data, double test_fraction,
                  double val_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
      !(val_fraction > 0.0 && val_fraction < 1.0))
    throw ValidationError("split fractions must lie in (0, 1)");
  const int n = data.n();
  const int n_test = static_cast<int>(std::floor(n * test_fraction));
  const int n_rest = n - n_test;
  const int n_val = static_cast<int>(std::floor(n_rest * val_fraction));
  const int n_train = n_rest - n_val;
  if (n_test < 1 || n_val < 1 || n_train < 1)
    throw ValidationError("split leaves an empty partition (n=" +
                          std::to_string(n) + ", test=" + std::to_string(n_test) +
                          ", val=" + std::to_string(n_val) + ", train=" +
                          std::to_string(n_train) + ")");

  Rng rng = Rng::substream(seed, "split");
  std::vector<int> perm = rng.permutation(n);

  SplitResult out;
  out.test_idx.assign(perm.begin(), perm.begin() + n_test);
  out.val_idx.assign(perm.begin() + n_test, perm.begin() + n_test + n_val);
  out.train_idx.assign(perm.begin() + n_test + n_val, perm.end());
  out.test = data.take(out.test_idx);
  out.validation = data.take(out.val_idx);
  out.train = data.take(out.train_idx);
  return out;
}

SplitResult split_train_val(const Dataset& data, double val_fraction,
                            std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ValidationError("validation fraction must lie in (0, 1)");
  const int n = data.n();
  const int n_val = static_cast<int>(std::floor(n * val_fraction));
  const int n_train = n - n_val;
  if (n_val < 1 || n_train < 1)
    throw ValidationError("split leaves an empty partition (n=" +
                          std::to_string(n) + ")");
  Rng rng = Rng::substream(seed, "split");
  std::vector<int> perm = rng.permutation(n);
  SplitResult out;
  out.val_idx.assign(perm.begin(), perm.begin() + n_val);
  out.train_idx.assign(perm.begin() + n_val, perm.end());
  out.validation = data.take(out.val_idx);
  out.train = data.take(out.train_idx);
  return out;
}

}  // namespace gaminet
