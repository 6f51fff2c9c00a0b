#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gaminet/toml.hpp"

namespace gaminet {

enum class Task { kRegression, kBinaryClassification };

Task task_from_string(const std::string& name);
std::string to_string(Task t);

enum class ColumnRole { kNumerical, kCategorical, kResponse, kIgnore };

// Column role declarations. Every column in a CSV must be named in exactly
// one of the four lists.
struct Schema {
  std::string response;
  std::vector<std::string> numerical;
  std::vector<std::string> categorical;
  std::vector<std::string> ignore;

  static Schema from_toml(const TomlTable& table);
  void validate() const;
  bool declares(const std::string& column) const;
  ColumnRole role_of(const std::string& column) const;
};

// Parsed CSV restricted to declared columns: numerical and response cells
// as doubles, categorical cells as strings. Column order follows the file.
struct RawColumn {
  std::string name;
  ColumnRole role = ColumnRole::kNumerical;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::size_t n_rows = 0;

  const RawColumn* find(const std::string& name) const;
  bool has_response() const;
};

/// Reads an RFC-4180-style CSV (header required, UTF-8, quoted fields
/// allowed). Rows with missing values are rejected; numerical cells must
/// parse as decimals. `require_response` is relaxed for prediction inputs.
RawTable load_csv(const std::string& path, const Schema& schema,
                  bool require_response = true);

enum class FeatureKind { kNumerical, kCategorical };

struct FeatureMeta {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  double scale_min = 0.0;  // numerical only
  double scale_max = 1.0;
  std::vector<std::string> levels;  // categorical only, first-appearance order

  int one_hot_width() const {
    return kind == FeatureKind::kNumerical ? 1 : static_cast<int>(levels.size());
  }
};

// Preprocessed design matrix. Numerical columns are min-max scaled to [0,1]
// using training statistics; categorical columns hold level indices.
struct Dataset {
  Eigen::MatrixXd features;  // n x p
  Eigen::VectorXd response;
  Task task = Task::kRegression;
  std::vector<FeatureMeta> meta;
  std::vector<std::string> dropped_constant;  // excluded columns, by name

  int n() const { return static_cast<int>(features.rows()); }
  int p() const { return static_cast<int>(features.cols()); }
  Dataset take(const std::vector<int>& rows) const;
};

/// Reads only the columns named by `meta`, ignoring everything else. Used
/// when scoring new data against a stored model, where no schema file is
/// available.
RawTable load_csv_columns(const std::string& path,
                          const std::vector<FeatureMeta>& meta);

/// Fits scaling and encodings on `table` and returns the encoded dataset.
/// Constant columns are flagged, excluded from modeling and reported in
/// `dropped_constant` (and on stderr as a warning).
Dataset fit_transform(const RawTable& table, Task task);

/// Applies stored statistics to new data without re-fitting. Out-of-range
/// numerical values pass through the linear transform unclamped; an unseen
/// categorical level is an error naming the row and level.
Eigen::MatrixXd transform_features(const RawTable& table,
                                   const std::vector<FeatureMeta>& meta);

/// Inverse of the numerical scaling, for rendering in original units.
double inverse_scale(const FeatureMeta& meta, double scaled);

struct SplitResult {
  Dataset train, validation, test;
  std::vector<int> train_idx, val_idx, test_idx;
};

/// Deterministic permutation split: `test_fraction` of the whole is held
/// out first, then `val_fraction` of the remaining training portion.
SplitResult split(const Dataset& data, double test_fraction,
                  double val_fraction, std::uint64_t seed);

/// Train/validation split only (no held-out test set).
SplitResult split_train_val(const Dataset& data, double val_fraction,
                            std::uint64_t seed);

}  // namespace gaminet
