#include "gaminet/model.hpp"

#include <algorithm>
#include <cmath>

#include "gaminet/errors.hpp"

namespace gaminet {

Link link_for_task(Task task) {
  return task == Task::kRegression ? Link::kIdentity : Link::kLogit;
}

std::string to_string(Link link) {
  return link == Link::kIdentity ? "identity" : "logit";
}

Link link_from_string(const std::string& name) {
  if (name == "identity") return Link::kIdentity;
  if (name == "logit") return Link::kLogit;
  throw ValidationError("unknown link: " + name);
}

std::vector<EffectId> GamiNetModel::effect_order() const {
  std::vector<EffectId> order;
  order.reserve(main_effects.size() + interactions.size());
  for (const auto& [j, effect] : main_effects) order.push_back(EffectId::main(j));
  for (const auto& [jk, net] : interactions)
    order.push_back(EffectId::pair(jk.first, jk.second));
  return order;
}

std::string GamiNetModel::effect_label(const EffectId& id) const {
  auto name = [this](int j) {
    return j >= 0 && j < static_cast<int>(meta.size()) ? meta[j].name
                                                       : "f" + std::to_string(j);
  };
  if (id.is_main()) return name(id.j);
  return name(id.j) + " x " + name(id.k);
}

namespace {

int checked_level(double value, const FeatureMeta& m, long row) {
  const int level = static_cast<int>(value);
  if (level < 0 || level >= static_cast<int>(m.levels.size()) ||
      static_cast<double>(level) != value)
    throw DataError("row " + std::to_string(row + 1) + ", feature `" + m.name +
                    "`: level index " + std::to_string(value) + " out of range");
  return level;
}

// Writes the (possibly one-hot) encoding of feature j into rows
// [row_offset, row_offset + width) of `input`.
void fill_feature_rows(const FeatureMeta& m, const Eigen::MatrixXd& features,
                       int j, int row_offset, Eigen::MatrixXd& input) {
  const long n = features.rows();
  if (m.kind == FeatureKind::kNumerical) {
    input.row(row_offset) = features.col(j).transpose();
  } else {
    for (long i = 0; i < n; ++i) {
      const int level = checked_level(features(i, j), m, i);
      input(row_offset + level, i) = 1.0;
    }
  }
}

}  // namespace

Eigen::MatrixXd build_effect_input(const std::vector<FeatureMeta>& meta,
                                   const EffectId& id,
                                   const Eigen::MatrixXd& features) {
  if (features.cols() != static_cast<long>(meta.size()))
    throw ValidationError("feature matrix does not match the model metadata");
  const FeatureMeta& mj = meta.at(id.j);
  const int wj = mj.one_hot_width();
  if (id.is_main()) {
    Eigen::MatrixXd input = Eigen::MatrixXd::Zero(wj, features.rows());
    fill_feature_rows(mj, features, id.j, 0, input);
    return input;
  }
  const FeatureMeta& mk = meta.at(id.k);
  const int wk = mk.one_hot_width();
  Eigen::MatrixXd input = Eigen::MatrixXd::Zero(wj + wk, features.rows());
  fill_feature_rows(mj, features, id.j, 0, input);
  fill_feature_rows(mk, features, id.k, wj, input);
  return input;
}

Eigen::VectorXd eval_effect(const GamiNetModel& model, const EffectId& id,
                            const Eigen::MatrixXd& features) {
  if (id.is_main()) {
    const auto it = model.main_effects.find(id.j);
    if (it == model.main_effects.end())
      throw ValidationError("no active main effect for feature " + std::to_string(id.j));
    if (const auto* cat = std::get_if<CategoricalEffect>(&it->second)) {
      const FeatureMeta& m = model.meta.at(id.j);
      Eigen::VectorXd out(features.rows());
      for (long i = 0; i < features.rows(); ++i)
        out[i] = cat->level_biases[checked_level(features(i, id.j), m, i)] - cat->offset;
      return out;
    }
    const auto& net = std::get<Subnetwork>(it->second);
    return subnet_forward(net, build_effect_input(model.meta, id, features));
  }
  const auto it = model.interactions.find({id.j, id.k});
  if (it == model.interactions.end())
    throw ValidationError("no active interaction (" + std::to_string(id.j) + "," +
                          std::to_string(id.k) + ")");
  return subnet_forward(it->second, build_effect_input(model.meta, id, features));
}

Prediction predict(const GamiNetModel& model, const Eigen::MatrixXd& features) {
  Prediction out;
  out.effect_order = model.effect_order();
  out.eta = Eigen::VectorXd::Constant(features.rows(), model.intercept);
  out.contributions.resize(features.rows(), out.effect_order.size());
  for (std::size_t e = 0; e < out.effect_order.size(); ++e) {
    out.contributions.col(e) = eval_effect(model, out.effect_order[e], features);
    out.eta += out.contributions.col(e);
  }
  return out;
}

Eigen::VectorXd predict_eta(const GamiNetModel& model,
                            const Eigen::MatrixXd& features) {
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(features.rows(), model.intercept);
  for (const EffectId& id : model.effect_order())
    eta += eval_effect(model, id, features);
  return eta;
}

double apply_link(Link link, double mean) {
  if (link == Link::kIdentity) return mean;
  return std::log(mean / (1.0 - mean));
}

double invert_link(Link link, double eta) {
  if (link == Link::kIdentity) return eta;
  double p;
  if (eta >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-eta));
  } else {
    const double e = std::exp(eta);
    p = e / (1.0 + e);
  }
  // Keep probabilities strictly inside (0,1) even where the sigmoid
  // saturates in double precision.
  constexpr double kEps = 1e-15;
  return std::clamp(p, kEps, 1.0 - kEps);
}

Eigen::VectorXd invert_link(Link link, const Eigen::VectorXd& eta) {
  if (link == Link::kIdentity) return eta;
  Eigen::VectorXd out(eta.size());
  for (long i = 0; i < eta.size(); ++i) out[i] = invert_link(link, eta[i]);
  return out;
}

namespace {

// softplus(z) = log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double empirical_loss(Link link, const Eigen::VectorXd& response,
                      const Eigen::VectorXd& eta) {
  if (response.size() != eta.size())
    throw ValidationError("loss: response/eta length mismatch");
  const double n = static_cast<double>(eta.size());
  if (link == Link::kIdentity) return (eta - response).squaredNorm() / n;
  double total = 0.0;
  for (long i = 0; i < eta.size(); ++i)
    total += softplus(eta[i]) - response[i] * eta[i];
  return total / n;
}

Eigen::VectorXd loss_grad_eta(Link link, const Eigen::VectorXd& response,
                              const Eigen::VectorXd& eta) {
  const double n = static_cast<double>(eta.size());
  if (link == Link::kIdentity) return 2.0 * (eta - response) / n;
  Eigen::VectorXd grad(eta.size());
  for (long i = 0; i < eta.size(); ++i)
    grad[i] = (invert_link(Link::kLogit, eta[i]) - response[i]) / n;
  return grad;
}

void center_effects(GamiNetModel& model, const Eigen::MatrixXd& train_features) {
  for (auto& [j, effect] : model.main_effects) {
    const double mean =
        eval_effect(model, EffectId::main(j), train_features).mean();
    if (auto* cat = std::get_if<CategoricalEffect>(&effect))
      cat->offset += mean;
    else
      std::get<Subnetwork>(effect).output_offset += mean;
    model.intercept += mean;
  }
  for (auto& [jk, net] : model.interactions) {
    const double mean =
        eval_effect(model, EffectId::pair(jk.first, jk.second), train_features).mean();
    net.output_offset += mean;
    model.intercept += mean;
  }
}

EffectVarianceTable effect_variance(const GamiNetModel& model,
                                    const Eigen::MatrixXd& train_features) {
  const long n = train_features.rows();
  if (n < 2) throw ValidationError("effect variance needs at least 2 rows");
  EffectVarianceTable table;
  for (const EffectId& id : model.effect_order()) {
    const Eigen::VectorXd values = eval_effect(model, id, train_features);
    const double d = values.squaredNorm() / static_cast<double>(n - 1);
    table.d_values.emplace_back(id, d);
    table.total += d;
  }
  return table;
}

ClarityReport clarity_loss(const GamiNetModel& model,
                           const Eigen::MatrixXd& train_features) {
  ClarityReport report;
  const double n = static_cast<double>(train_features.rows());
  for (const auto& [jk, net] : model.interactions) {
    const EffectId child = EffectId::pair(jk.first, jk.second);
    const Eigen::VectorXd f = eval_effect(model, child, train_features);
    for (int parent : {jk.first, jk.second}) {
      if (!model.main_effects.count(parent)) continue;
      const Eigen::VectorXd h =
          eval_effect(model, EffectId::main(parent), train_features);
      const double omega = std::abs(h.dot(f) / n);
      report.pairs.push_back({{EffectId::main(parent), child}, omega});
      report.total += omega;
    }
  }
  return report;
}

}  // namespace gaminet
