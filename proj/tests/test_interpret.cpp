#include <doctest.h>

#include <cctype>
#include <cmath>

#include "gaminet/interpret.hpp"
#include "gaminet/svg.hpp"

using namespace gaminet;

namespace {

FeatureMeta numerical_meta(const std::string& name, double lo = 0.0, double hi = 1.0) {
  FeatureMeta m;
  m.name = name;
  m.kind = FeatureKind::kNumerical;
  m.scale_min = lo;
  m.scale_max = hi;
  return m;
}

FeatureMeta categorical_meta(const std::string& name,
                             std::vector<std::string> levels) {
  FeatureMeta m;
  m.name = name;
  m.kind = FeatureKind::kCategorical;
  m.levels = std::move(levels);
  return m;
}

Subnetwork affine_net(double w, double b) {
  Subnetwork net;
  DenseLayer layer;
  layer.weights = Eigen::MatrixXd::Constant(1, 1, w);
  layer.biases = Eigen::VectorXd::Constant(1, b);
  layer.activation = Activation::kIdentity;
  net.layers.push_back(layer);
  return net;
}

CategoricalEffect bias_table(std::vector<double> values) {
  CategoricalEffect cat;
  cat.level_biases = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  return cat;
}

Dataset dataset_for(const GamiNetModel& model, int n, std::uint64_t seed) {
  Dataset data;
  data.meta = model.meta;
  data.features.resize(n, model.meta.size());
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < model.meta.size(); ++j)
      data.features(i, j) =
          model.meta[j].kind == FeatureKind::kNumerical
              ? rng.uniform()
              : static_cast<double>(rng.uniform_int(model.meta[j].levels.size()));
  data.response = Eigen::VectorXd::Zero(n);
  return data;
}

// Strict-enough XML well-formedness check: matched tags, quoted attributes,
// known entities, no stray '<' or '&'.
bool xml_well_formed(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  auto fail = [](const char*) { return false; };

  auto check_entity = [&](std::size_t& pos) {
    static const char* entities[] = {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"};
    for (const char* e : entities) {
      const std::size_t len = std::string(e).size();
      if (s.compare(pos, len, e) == 0) {
        pos += len;
        return true;
      }
    }
    return false;
  };

  while (i < s.size()) {
    const char c = s[i];
    if (c == '<') {
      if (s.compare(i, 2, "<?") == 0) {
        const std::size_t end = s.find("?>", i);
        if (end == std::string::npos) return fail("prolog");
        i = end + 2;
        continue;
      }
      if (s.compare(i, 2, "</") == 0) {
        std::size_t j = i + 2;
        std::string name;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                                s[j] == ':' || s[j] == '-' || s[j] == '_'))
          name.push_back(s[j++]);
        if (j >= s.size() || s[j] != '>') return fail("close tag");
        if (stack.empty() || stack.back() != name) return fail("mismatch");
        stack.pop_back();
        i = j + 1;
        continue;
      }
      std::size_t j = i + 1;
      std::string name;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                              s[j] == ':' || s[j] == '-' || s[j] == '_'))
        name.push_back(s[j++]);
      if (name.empty()) return fail("tag name");
      // attributes
      while (j < s.size() && s[j] != '>' && s.compare(j, 2, "/>") != 0) {
        if (std::isspace(static_cast<unsigned char>(s[j]))) {
          ++j;
          continue;
        }
        std::string attr;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                                s[j] == ':' || s[j] == '-' || s[j] == '_'))
          attr.push_back(s[j++]);
        if (attr.empty() || j >= s.size() || s[j] != '=') return fail("attr");
        ++j;
        if (j >= s.size() || s[j] != '"') return fail("attr quote");
        ++j;
        while (j < s.size() && s[j] != '"') {
          if (s[j] == '<') return fail("attr value");
          if (s[j] == '&') {
            if (!check_entity(j)) return fail("attr entity");
            continue;
          }
          ++j;
        }
        if (j >= s.size()) return fail("attr unterminated");
        ++j;
      }
      if (j < s.size() && s.compare(j, 2, "/>") == 0) {
        i = j + 2;
        root_seen = true;
        continue;
      }
      if (j >= s.size() || s[j] != '>') return fail("open tag");
      stack.push_back(name);
      root_seen = true;
      i = j + 1;
      continue;
    }
    if (c == '&') {
      if (!check_entity(i)) return fail("entity");
      continue;
    }
    if (c == '>') return fail("stray gt");
    ++i;
  }
  return stack.empty() && root_seen;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_SUITE("interpret") {

TEST_CASE("importance ratios normalize the variance table") {
  GamiNetModel model;
  model.meta = {categorical_meta("c", {"a", "b"}), categorical_meta("d", {"a", "b"})};
  model.main_effects.emplace(0, bias_table({1.5, -1.5}));   // D = 3
  const double amp = std::sqrt(3.0) / 2.0;                  // D = 1
  model.main_effects.emplace(1, bias_table({amp, -amp}));
  Dataset data;
  data.meta = model.meta;
  data.features.resize(4, 2);
  data.features << 0, 0, 1, 1, 0, 0, 1, 1;
  const ImportanceTable table = importance_ratios(model, data);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].ir == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(table.rows[1].ir == doctest::Approx(0.25).epsilon(1e-9));
  double sum = 0.0;
  for (const auto& r : table.rows) sum += r.ir;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a single active effect has importance one") {
  GamiNetModel model;
  model.meta = {categorical_meta("c", {"a", "b"})};
  model.main_effects.emplace(0, bias_table({0.5, -0.5}));
  Dataset data;
  data.meta = model.meta;
  data.features.resize(2, 1);
  data.features << 0, 1;
  const ImportanceTable table = importance_ratios(model, data);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].ir == doctest::Approx(1.0));
}

TEST_CASE("zero total variance yields an empty-model report") {
  GamiNetModel model;
  model.meta = {categorical_meta("c", {"a", "b"})};
  model.main_effects.emplace(0, bias_table({0.0, 0.0}));
  Dataset data;
  data.meta = model.meta;
  data.features.resize(2, 1);
  data.features << 0, 1;
  const ImportanceTable table = importance_ratios(model, data);
  CHECK(table.empty_model);
  CHECK(table.rows.empty());
}

TEST_CASE("an affine shape grid evaluates to the expected line") {
  GamiNetModel model;
  model.meta = {numerical_meta("x")};
  model.main_effects.emplace(0, affine_net(2.0, -1.0));
  const Dataset data = dataset_for(model, 10, 1);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 3, 3);
  REQUIRE(grids.size() == 1);
  REQUIRE(grids[0].values.size() == 3);
  CHECK(grids[0].values[0] == doctest::Approx(-1.0));
  CHECK(grids[0].values[1] == doctest::Approx(0.0));
  CHECK(grids[0].values[2] == doctest::Approx(1.0));
  CHECK(grids[0].x_values.front() == 0.0);
  CHECK(grids[0].x_values.back() == 1.0);
}

TEST_CASE("grids report original units for rescaled features") {
  GamiNetModel model;
  model.meta = {numerical_meta("x", 10.0, 30.0)};
  model.main_effects.emplace(0, affine_net(1.0, 0.0));
  const Dataset data = dataset_for(model, 5, 2);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 5, 5);
  CHECK(grids[0].x_values.front() == doctest::Approx(10.0));
  CHECK(grids[0].x_values.back() == doctest::Approx(30.0));
  // Values are still the effect on the scaled axis.
  CHECK(grids[0].values.back() == doctest::Approx(1.0));
}

TEST_CASE("categorical grids read the bias table directly") {
  GamiNetModel model;
  model.meta = {categorical_meta("c", {"u", "v"})};
  model.main_effects.emplace(0, bias_table({0.2, -0.2}));
  const Dataset data = dataset_for(model, 6, 3);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 4, 4);
  REQUIRE(grids.size() == 1);
  CHECK(grids[0].x_labels == std::vector<std::string>{"u", "v"});
  CHECK(grids[0].values[0] == doctest::Approx(0.2));
  CHECK(grids[0].values[1] == doctest::Approx(-0.2));
}

TEST_CASE("main-effect grids precede interaction grids, each by descending IR") {
  GamiNetModel model;
  model.meta = {categorical_meta("c", {"a", "b"}), categorical_meta("d", {"a", "b"}),
                numerical_meta("x")};
  model.main_effects.emplace(0, bias_table({0.5, -0.5}));
  model.main_effects.emplace(1, bias_table({2.0, -2.0}));
  Subnetwork inter;
  DenseLayer layer;
  layer.weights = Eigen::MatrixXd::Zero(1, 3);
  layer.biases = Eigen::VectorXd::Constant(1, 0.0);
  layer.activation = Activation::kIdentity;
  inter.layers.push_back(layer);
  inter.input_arity = 2;
  model.interactions.emplace(std::make_pair(0, 2), inter);

  const Dataset data = dataset_for(model, 30, 4);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 3, 3);
  REQUIRE(grids.size() == 3);
  CHECK(grids[0].label == "d");  // bigger IR first
  CHECK(grids[1].label == "c");
  CHECK(grids[2].is_interaction);
}

TEST_CASE("grid values equal direct subnetwork evaluation") {
  Rng rng(8);
  GamiNetModel model;
  model.meta = {numerical_meta("x")};
  model.main_effects.emplace(0, make_subnetwork(1, 1, {8, 8}, Activation::kTanh, rng));
  const Dataset data = dataset_for(model, 5, 5);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 7, 7);
  Eigen::MatrixXd inputs(1, 7);
  for (int i = 0; i < 7; ++i) inputs(0, i) = static_cast<double>(i) / 6.0;
  const Eigen::VectorXd direct =
      subnet_forward(std::get<Subnetwork>(model.main_effects.at(0)), inputs);
  for (int i = 0; i < 7; ++i) CHECK(grids[0].values[i] == direct[i]);
}

TEST_CASE("local explanations reconstruct eta exactly") {
  Rng rng(9);
  GamiNetModel model;
  model.meta = {numerical_meta("x"), numerical_meta("y"),
                categorical_meta("c", {"a", "b", "c"})};
  model.intercept = 0.4;
  model.main_effects.emplace(0, make_subnetwork(1, 1, {6}, Activation::kTanh, rng));
  model.main_effects.emplace(2, bias_table({0.1, -0.3, 0.2}));
  model.interactions.emplace(std::make_pair(0, 1),
                             make_subnetwork(2, 2, {6}, Activation::kTanh, rng));
  const Dataset data = dataset_for(model, 100, 6);
  for (int i = 0; i < data.n(); ++i) {
    const LocalExplanation e = local_explain(model, data.features.row(i));
    double sum = e.intercept;
    for (double c : e.contributions) sum += c;
    CHECK(std::abs(sum - e.eta) < 1e-9);
  }
}

TEST_CASE("intercept-only local explanation has no contributions") {
  GamiNetModel model;
  model.intercept = 1.3;
  model.meta = {numerical_meta("x")};
  Eigen::RowVectorXd row(1);
  row << 0.5;
  const LocalExplanation e = local_explain(model, row);
  CHECK(e.contributions.empty());
  CHECK(e.eta == doctest::Approx(1.3));
}

TEST_CASE("local contributions sort by absolute value and match direct eval") {
  GamiNetModel model;
  model.meta = {numerical_meta("x"), numerical_meta("y")};
  model.main_effects.emplace(0, affine_net(0.5, 0.0));   // small at x=1
  model.main_effects.emplace(1, affine_net(-3.0, 0.0));  // large at y=1
  Eigen::RowVectorXd row(2);
  row << 1.0, 1.0;
  const LocalExplanation e = local_explain(model, row);
  REQUIRE(e.contributions.size() == 2);
  CHECK(e.labels[0] == "y");
  CHECK(e.contributions[0] == doctest::Approx(-3.0));
  CHECK(e.contributions[1] == doctest::Approx(0.5));
}

TEST_CASE("line plots contain exactly one polyline and parse as xml") {
  GamiNetModel model;
  model.meta = {numerical_meta("x")};
  model.main_effects.emplace(0, affine_net(2.0, -1.0));
  const Dataset data = dataset_for(model, 5, 7);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 11, 11);
  const std::string svg = svg_shape_grid(grids[0]);
  CHECK(count_occurrences(svg, "<polyline") == 1);
  CHECK(xml_well_formed(svg));
}

TEST_CASE("heatmaps contain one rect per lattice cell") {
  Rng rng(10);
  GamiNetModel model;
  model.meta = {numerical_meta("x"), numerical_meta("y")};
  model.interactions.emplace(std::make_pair(0, 1),
                             make_subnetwork(2, 2, {6}, Activation::kTanh, rng));
  const Dataset data = dataset_for(model, 5, 8);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 5, 5);
  REQUIRE(grids.size() == 1);
  const std::string svg = svg_shape_grid(grids[0]);
  // 5x5 cells plus the panel frame rectangle.
  CHECK(count_occurrences(svg, "<rect") == 26);
  CHECK(xml_well_formed(svg));
}

TEST_CASE("svg output is deterministic and escapes labels") {
  GamiNetModel model;
  model.meta = {categorical_meta("a<b&c", {"x\"1", "x>2"})};
  model.main_effects.emplace(0, bias_table({1.0, -1.0}));
  const Dataset data = dataset_for(model, 4, 9);
  const std::vector<ShapeGrid> grids = global_explain(model, data, 3, 3);
  const std::string one = svg_shape_grid(grids[0]);
  const std::string two = svg_shape_grid(grids[0]);
  CHECK(one == two);
  CHECK(xml_well_formed(one));
  CHECK(one.find("a<b") == std::string::npos);  // raw label must be escaped

  const ImportanceTable table = importance_ratios(model, data);
  CHECK(xml_well_formed(svg_importance(table)));
  const std::string panel = svg_panel(grids);
  CHECK(xml_well_formed(panel));
}

TEST_CASE("local explanation svg parses as xml") {
  GamiNetModel model;
  model.meta = {numerical_meta("x")};
  model.intercept = 0.2;
  model.main_effects.emplace(0, affine_net(1.0, -0.5));
  Eigen::RowVectorXd row(1);
  row << 0.75;
  const LocalExplanation e = local_explain(model, row);
  CHECK(xml_well_formed(svg_local_explanation(e)));
}

}  // TEST_SUITE
