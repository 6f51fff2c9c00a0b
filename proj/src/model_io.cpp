#include "gaminet/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gaminet/errors.hpp"

namespace gaminet {

using nlohmann::json;

namespace {

json layer_to_json(const DenseLayer& layer) {
  json w = json::array();
  for (long r = 0; r < layer.weights.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
    w.push_back(std::move(row));
  }
  json b = json::array();
  for (long i = 0; i < layer.biases.size(); ++i) b.push_back(layer.biases[i]);
  return json{{"weights", std::move(w)},
              {"biases", std::move(b)},
              {"activation", to_string(layer.activation)}};
}

DenseLayer layer_from_json(const json& j) {
  DenseLayer layer;
  const auto& w = j.at("weights");
  const long rows = static_cast<long>(w.size());
  const long cols = rows > 0 ? static_cast<long>(w[0].size()) : 0;
  layer.weights.resize(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (static_cast<long>(w[r].size()) != cols)
      throw ValidationError("model document: ragged weight matrix");
    for (long c = 0; c < cols; ++c) layer.weights(r, c) = w[r][c].get<double>();
  }
  const auto& b = j.at("biases");
  layer.biases.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) layer.biases[i] = b[i].get<double>();
  layer.activation = activation_from_string(j.at("activation").get<std::string>());
  return layer;
}

json subnet_to_json(const Subnetwork& net) {
  json layers = json::array();
  for (const auto& l : net.layers) layers.push_back(layer_to_json(l));
  return json{{"layers", std::move(layers)},
              {"input_arity", net.input_arity},
              {"output_offset", net.output_offset}};
}

Subnetwork subnet_from_json(const json& j) {
  Subnetwork net;
  for (const auto& l : j.at("layers")) net.layers.push_back(layer_from_json(l));
  net.input_arity = j.at("input_arity").get<int>();
  net.output_offset = j.at("output_offset").get<double>();
  return net;
}

json meta_to_json(const FeatureMeta& m) {
  json j{{"name", m.name}};
  if (m.kind == FeatureKind::kNumerical) {
    j["kind"] = "numerical";
    j["scale_min"] = m.scale_min;
    j["scale_max"] = m.scale_max;
  } else {
    j["kind"] = "categorical";
    j["levels"] = m.levels;
  }
  return j;
}

FeatureMeta meta_from_json(const json& j) {
  FeatureMeta m;
  m.name = j.at("name").get<std::string>();
  if (j.at("kind") == "numerical") {
    m.kind = FeatureKind::kNumerical;
    m.scale_min = j.at("scale_min").get<double>();
    m.scale_max = j.at("scale_max").get<double>();
  } else {
    m.kind = FeatureKind::kCategorical;
    m.levels = j.at("levels").get<std::vector<std::string>>();
  }
  return m;
}

json effect_id_to_json(const EffectId& id) {
  if (id.is_main()) return json{{"feature", id.j}};
  return json{{"pair", json::array({id.j, id.k})}};
}

EffectId effect_id_from_json(const json& j) {
  if (j.contains("feature")) return EffectId::main(j.at("feature").get<int>());
  const auto& p = j.at("pair");
  return EffectId::pair(p[0].get<int>(), p[1].get<int>());
}

}  // namespace

std::string model_to_json(const GamiNetModel& model) {
  json doc;
  doc["format"] = "gaminet-model";
  doc["version"] = 1;
  doc["task"] = to_string(model.task);
  doc["link"] = to_string(model.link);
  doc["intercept"] = model.intercept;

  json features = json::array();
  for (const auto& m : model.meta) features.push_back(meta_to_json(m));
  doc["features"] = std::move(features);

  json mains = json::array();
  for (const auto& [j, effect] : model.main_effects) {
    json entry{{"feature", j}};
    if (const auto* cat = std::get_if<CategoricalEffect>(&effect)) {
      entry["type"] = "categorical";
      json biases = json::array();
      for (long i = 0; i < cat->level_biases.size(); ++i)
        biases.push_back(cat->level_biases[i]);
      entry["level_biases"] = std::move(biases);
      entry["offset"] = cat->offset;
    } else {
      entry["type"] = "subnet";
      entry["subnet"] = subnet_to_json(std::get<Subnetwork>(effect));
    }
    mains.push_back(std::move(entry));
  }
  doc["main_effects"] = std::move(mains);

  json pairs = json::array();
  for (const auto& [jk, net] : model.interactions) {
    pairs.push_back(json{{"pair", json::array({jk.first, jk.second})},
                         {"subnet", subnet_to_json(net)}});
  }
  doc["interactions"] = std::move(pairs);

  json variance = json::array();
  for (const auto& [id, d] : model.variance_table.d_values) {
    json entry = effect_id_to_json(id);
    entry["d"] = d;
    variance.push_back(std::move(entry));
  }
  doc["variance_table"] = json{{"effects", std::move(variance)},
                               {"total", model.variance_table.total}};
  return doc.dump(2) + "\n";
}

GamiNetModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "gaminet-model")
    throw ValidationError("not a gaminet model document");

  GamiNetModel model;
  model.task = task_from_string(doc.at("task").get<std::string>());
  model.link = link_from_string(doc.at("link").get<std::string>());
  model.intercept = doc.at("intercept").get<double>();
  for (const auto& m : doc.at("features")) model.meta.push_back(meta_from_json(m));

  for (const auto& entry : doc.at("main_effects")) {
    const int j = entry.at("feature").get<int>();
    if (entry.at("type") == "categorical") {
      CategoricalEffect cat;
      const auto& biases = entry.at("level_biases");
      cat.level_biases.resize(biases.size());
      for (std::size_t i = 0; i < biases.size(); ++i)
        cat.level_biases[i] = biases[i].get<double>();
      cat.offset = entry.at("offset").get<double>();
      model.main_effects.emplace(j, std::move(cat));
    } else {
      model.main_effects.emplace(j, subnet_from_json(entry.at("subnet")));
    }
  }
  for (const auto& entry : doc.at("interactions")) {
    const auto& p = entry.at("pair");
    model.interactions.emplace(std::make_pair(p[0].get<int>(), p[1].get<int>()),
                               subnet_from_json(entry.at("subnet")));
  }
  if (doc.contains("variance_table")) {
    for (const auto& entry : doc.at("variance_table").at("effects"))
      model.variance_table.d_values.emplace_back(effect_id_from_json(entry),
                                                 entry.at("d").get<double>());
    model.variance_table.total = doc.at("variance_table").at("total").get<double>();
  }
  return model;
}

void save_model(const GamiNetModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out << model_to_json(model);
}

GamiNetModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace gaminet
