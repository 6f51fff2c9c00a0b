#include "gaminet/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "gaminet/errors.hpp"

namespace gaminet {

using nlohmann::json;

std::string ImportanceTable::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "effect,kind,D,IR\n";
  for (const auto& r : rows)
    out << '"' << r.label << "\"," << (r.is_interaction ? "interaction" : "main")
        << ',' << r.d << ',' << r.ir << '\n';
  return out.str();
}

ImportanceTable importance_ratios(const GamiNetModel& model, const Dataset& train) {
  if (train.n() < 2)
    throw ValidationError("importance ratios need at least 2 training rows");
  ImportanceTable table;
  const EffectVarianceTable var = effect_variance(model, train.features);
  table.total = var.total;
  if (var.d_values.empty() || var.total <= 0.0) {
    table.empty_model = true;
    if (!var.d_values.empty())
      std::cerr << "warning: total effect variance is zero; no importance "
                   "ratios reported\n";
    return table;
  }
  for (const auto& [id, d] : var.d_values) {
    ImportanceRow row;
    row.id = id;
    row.label = model.effect_label(id);
    row.is_interaction = !id.is_main();
    row.d = d;
    row.ir = d / var.total;
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ImportanceRow& a, const ImportanceRow& b) {
                     return a.ir > b.ir;
                   });
  return table;
}

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return out;
}

// Scaled-axis positions for a feature: grid points in [0,1] for numerical
// features, level indices for categorical ones.
std::vector<double> axis_positions(const FeatureMeta& m, int grid) {
  if (m.kind == FeatureKind::kNumerical) return linspace(0.0, 1.0, grid);
  std::vector<double> out(m.levels.size());
  for (std::size_t l = 0; l < m.levels.size(); ++l) out[l] = static_cast<double>(l);
  return out;
}

void fill_axis(const FeatureMeta& m, int grid, FeatureKind& kind,
               std::vector<double>& values, std::vector<std::string>& labels) {
  kind = m.kind;
  if (m.kind == FeatureKind::kNumerical) {
    values = linspace(m.scale_min, m.scale_max, grid);
  } else {
    labels = m.levels;
  }
}

ShapeGrid make_grid(const GamiNetModel& model, const EffectId& id, double ir,
                    int grid_1d, int grid_2d) {
  ShapeGrid grid;
  grid.id = id;
  grid.label = model.effect_label(id);
  grid.ir = ir;
  grid.is_interaction = !id.is_main();

  const FeatureMeta& mx = model.meta.at(id.j);
  if (id.is_main()) {
    fill_axis(mx, grid_1d, grid.kind_x, grid.x_values, grid.x_labels);
    const std::vector<double> xs = axis_positions(mx, grid_1d);
    Eigen::MatrixXd rows(xs.size(), model.meta.size());
    rows.setZero();
    for (std::size_t i = 0; i < xs.size(); ++i) rows(i, id.j) = xs[i];
    const Eigen::VectorXd vals = eval_effect(model, id, rows);
    grid.values.assign(vals.data(), vals.data() + vals.size());
    return grid;
  }

  const FeatureMeta& my = model.meta.at(id.k);
  fill_axis(mx, grid_2d, grid.kind_x, grid.x_values, grid.x_labels);
  fill_axis(my, grid_2d, grid.kind_y, grid.y_values, grid.y_labels);
  const std::vector<double> xs = axis_positions(mx, grid_2d);
  const std::vector<double> ys = axis_positions(my, grid_2d);
  Eigen::MatrixXd rows(xs.size() * ys.size(), model.meta.size());
  rows.setZero();
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = 0; b < ys.size(); ++b) {
      rows(a * ys.size() + b, id.j) = xs[a];
      rows(a * ys.size() + b, id.k) = ys[b];
    }
  const Eigen::VectorXd vals = eval_effect(model, id, rows);
  grid.values.assign(vals.data(), vals.data() + vals.size());
  return grid;
}

}  // namespace

std::vector<ShapeGrid> global_explain(const GamiNetModel& model, const Dataset& train,
                                      int grid_1d, int grid_2d) {
  if (grid_1d < 2 || grid_2d < 2)
    throw ValidationError("grid sizes must be at least 2");
  const ImportanceTable table = importance_ratios(model, train);

  std::vector<ShapeGrid> grids;
  // Main effects first, then interactions, each sorted by IR descending.
  for (bool want_interaction : {false, true}) {
    if (table.empty_model) {
      for (const EffectId& id : model.effect_order())
        if (!id.is_main() == want_interaction)
          grids.push_back(make_grid(model, id, 0.0, grid_1d, grid_2d));
    } else {
      for (const auto& row : table.rows)
        if (row.is_interaction == want_interaction)
          grids.push_back(make_grid(model, row.id, row.ir, grid_1d, grid_2d));
    }
  }
  return grids;
}

LocalExplanation local_explain(const GamiNetModel& model,
                               const Eigen::RowVectorXd& scaled_row) {
  if (scaled_row.size() != static_cast<long>(model.meta.size()))
    throw ValidationError("row width does not match the model metadata");
  LocalExplanation out;
  out.intercept = model.intercept;

  for (std::size_t j = 0; j < model.meta.size(); ++j) {
    const FeatureMeta& m = model.meta[j];
    std::ostringstream cell;
    if (m.kind == FeatureKind::kNumerical) {
      cell.precision(12);
      cell << inverse_scale(m, scaled_row[j]);
    } else {
      const int level = static_cast<int>(scaled_row[j]);
      if (level < 0 || level >= static_cast<int>(m.levels.size()))
        throw DataError("feature `" + m.name + "`: level index out of range");
      cell << m.levels[level];
    }
    out.row_display.push_back(m.name + "=" + cell.str());
  }

  const Prediction pred = predict(model, scaled_row);
  out.eta = pred.eta[0];
  out.mean_response = invert_link(model.link, out.eta);

  std::vector<std::size_t> order(pred.effect_order.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&pred](std::size_t a, std::size_t b) {
    return std::abs(pred.contributions(0, a)) > std::abs(pred.contributions(0, b));
  });
  for (std::size_t i : order) {
    out.effect_ids.push_back(pred.effect_order[i]);
    out.labels.push_back(model.effect_label(pred.effect_order[i]));
    out.contributions.push_back(pred.contributions(0, i));
  }
  return out;
}

namespace {

json effect_id_json(const EffectId& id) {
  if (id.is_main()) return json{{"feature", id.j}};
  return json{{"pair", json::array({id.j, id.k})}};
}

}  // namespace

std::string importance_to_json(const ImportanceTable& table) {
  json doc;
  doc["total_variance"] = table.total;
  doc["empty_model"] = table.empty_model;
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row = effect_id_json(r.id);
    row["label"] = r.label;
    row["kind"] = r.is_interaction ? "interaction" : "main";
    row["d"] = r.d;
    row["ir"] = r.ir;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string shape_grids_to_json(const std::vector<ShapeGrid>& grids) {
  json doc = json::array();
  for (const auto& g : grids) {
    json entry = effect_id_json(g.id);
    entry["label"] = g.label;
    entry["ir"] = g.ir;
    entry["kind"] = g.is_interaction ? "interaction" : "main";
    if (g.kind_x == FeatureKind::kNumerical)
      entry["x"] = g.x_values;
    else
      entry["x"] = g.x_labels;
    if (g.is_interaction) {
      if (g.kind_y == FeatureKind::kNumerical)
        entry["y"] = g.y_values;
      else
        entry["y"] = g.y_labels;
    }
    entry["values"] = g.values;
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string local_explanation_to_json(const LocalExplanation& e) {
  json doc;
  doc["row"] = e.row_display;
  doc["intercept"] = e.intercept;
  doc["eta"] = e.eta;
  doc["mean_response"] = e.mean_response;
  json rows = json::array();
  for (std::size_t i = 0; i < e.effect_ids.size(); ++i) {
    json row = effect_id_json(e.effect_ids[i]);
    row["label"] = e.labels[i];
    row["contribution"] = e.contributions[i];
    rows.push_back(std::move(row));
  }
  doc["contributions"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string shape_grid_to_csv(const ShapeGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  if (!grid.is_interaction) {
    out << "x,value\n";
    for (int i = 0; i < grid.nx(); ++i) {
      if (grid.kind_x == FeatureKind::kNumerical)
        out << grid.x_values[i];
      else
        out << '"' << grid.x_labels[i] << '"';
      out << ',' << grid.values[i] << '\n';
    }
    return out.str();
  }
  out << "x,y,value\n";
  for (int a = 0; a < grid.nx(); ++a)
    for (int b = 0; b < grid.ny(); ++b) {
      if (grid.kind_x == FeatureKind::kNumerical)
        out << grid.x_values[a];
      else
        out << '"' << grid.x_labels[a] << '"';
      out << ',';
      if (grid.kind_y == FeatureKind::kNumerical)
        out << grid.y_values[b];
      else
        out << '"' << grid.y_labels[b] << '"';
      out << ',' << grid.values[a * grid.ny() + b] << '\n';
    }
  return out.str();
}

}  // namespace gaminet
