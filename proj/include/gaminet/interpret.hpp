#pragma once

#include <string>
#include <vector>

#include "gaminet/model.hpp"

namespace gaminet {

struct ImportanceRow {
  EffectId id;
  std::string label;
  bool is_interaction = false;
  double d = 0.0;
  double ir = 0.0;
};

struct ImportanceTable {
  std::vector<ImportanceRow> rows;  // sorted by IR descending
  double total = 0.0;
  bool empty_model = false;  // total variance was zero; no ratios reported

  std::string to_csv() const;
};

/// IR(e) = D(e) / T over all active effects. A zero total yields an
/// empty-model report with a warning instead of dividing.
ImportanceTable importance_ratios(const GamiNetModel& model, const Dataset& train);

// Evaluation grid of one effect in original units: a curve for numerical
// main effects, per-level bars for categorical ones, a lattice for
// interactions.
struct ShapeGrid {
  EffectId id;
  std::string label;
  double ir = 0.0;
  bool is_interaction = false;

  FeatureKind kind_x = FeatureKind::kNumerical;
  std::vector<double> x_values;        // original units (numerical axis)
  std::vector<std::string> x_labels;   // level names (categorical axis)
  FeatureKind kind_y = FeatureKind::kNumerical;  // interactions only
  std::vector<double> y_values;
  std::vector<std::string> y_labels;

  std::vector<double> values;  // size nx, or nx*ny row-major (x outer)

  int nx() const {
    return kind_x == FeatureKind::kNumerical ? static_cast<int>(x_values.size())
                                             : static_cast<int>(x_labels.size());
  }
  int ny() const {
    return kind_y == FeatureKind::kNumerical ? static_cast<int>(y_values.size())
                                             : static_cast<int>(y_labels.size());
  }
};

/// Grids for every active effect, ordered main effects first and then
/// interactions, each block by IR descending.
std::vector<ShapeGrid> global_explain(const GamiNetModel& model, const Dataset& train,
                                      int grid_1d = 101, int grid_2d = 51);

struct LocalExplanation {
  std::vector<std::string> row_display;  // original units per feature
  double intercept = 0.0;
  double eta = 0.0;
  double mean_response = 0.0;
  std::vector<EffectId> effect_ids;  // sorted by |contribution| descending
  std::vector<std::string> labels;
  std::vector<double> contributions;
};

/// Exact additive decomposition of eta for one (already scaled) row.
LocalExplanation local_explain(const GamiNetModel& model,
                               const Eigen::RowVectorXd& scaled_row);

std::string importance_to_json(const ImportanceTable& table);
std::string shape_grids_to_json(const std::vector<ShapeGrid>& grids);
std::string local_explanation_to_json(const LocalExplanation& e);
std::string shape_grid_to_csv(const ShapeGrid& grid);

}  // namespace gaminet
