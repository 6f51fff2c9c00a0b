#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gaminet/data.hpp"
#include "gaminet/nn.hpp"

namespace gaminet {

enum class Link { kIdentity, kLogit };

Link link_for_task(Task task);
std::string to_string(Link link);
Link link_from_string(const std::string& name);

// Main effect of a categorical feature: one bias per level, centered via a
// shared offset instead of a network.
struct CategoricalEffect {
  Eigen::VectorXd level_biases;
  double offset = 0.0;
};

using MainEffect = std::variant<Subnetwork, CategoricalEffect>;

// Identifies one additive term: a main effect (k < 0) or a pair (j < k).
struct EffectId {
  int j = -1;
  int k = -1;

  bool is_main() const { return k < 0; }
  static EffectId main(int j) { return {j, -1}; }
  static EffectId pair(int j, int k) { return {std::min(j, k), std::max(j, k)}; }
  auto operator<=>(const EffectId&) const = default;
};

struct EffectVarianceTable {
  std::vector<std::pair<EffectId, double>> d_values;  // mains first, then pairs
  double total = 0.0;
};

// Additive model: intercept plus active main-effect and interaction
// subnetworks behind a link. Prediction is read-only; only the trainer
// mutates a model.
struct GamiNetModel {
  double intercept = 0.0;
  Link link = Link::kIdentity;
  Task task = Task::kRegression;
  std::map<int, MainEffect> main_effects;               // by feature index
  std::map<std::pair<int, int>, Subnetwork> interactions;  // keys j < k
  std::vector<FeatureMeta> meta;
  EffectVarianceTable variance_table;

  std::vector<EffectId> effect_order() const;  // mains asc, then pairs lex
  std::string effect_label(const EffectId& id) const;
};

/// Input block for one effect: rows are the (one-hot expanded) feature
/// values, one column per sample.
Eigen::MatrixXd build_effect_input(const std::vector<FeatureMeta>& meta,
                                   const EffectId& id,
                                   const Eigen::MatrixXd& features);

/// Centered values of one effect over a feature matrix.
Eigen::VectorXd eval_effect(const GamiNetModel& model, const EffectId& id,
                            const Eigen::MatrixXd& features);

struct Prediction {
  Eigen::VectorXd eta;                  // linear predictor per row
  Eigen::MatrixXd contributions;        // n x n_effects, effect_order columns
  std::vector<EffectId> effect_order;
};

Prediction predict(const GamiNetModel& model, const Eigen::MatrixXd& features);
Eigen::VectorXd predict_eta(const GamiNetModel& model,
                            const Eigen::MatrixXd& features);

/// g(mean) = eta.
double apply_link(Link link, double mean);
/// g^{-1}(eta) = mean, numerically stable for large |eta|.
double invert_link(Link link, double eta);
Eigen::VectorXd invert_link(Link link, const Eigen::VectorXd& eta);

/// Empirical loss on the link scale: mean squared error for the identity
/// link, mean log-loss (stable softplus form) for logit.
double empirical_loss(Link link, const Eigen::VectorXd& response,
                      const Eigen::VectorXd& eta);

/// Loss gradient with respect to eta, already divided by the sample count.
Eigen::VectorXd loss_grad_eta(Link link, const Eigen::VectorXd& response,
                              const Eigen::VectorXd& eta);

/// Absorbs each active effect's empirical mean over the training rows into
/// its output offset and the intercept. Predictions are unchanged.
void center_effects(GamiNetModel& model, const Eigen::MatrixXd& train_features);

/// Sample variance D of every active effect and their total T.
EffectVarianceTable effect_variance(const GamiNetModel& model,
                                    const Eigen::MatrixXd& train_features);

struct ClarityReport {
  // One entry per (parent main effect, interaction) pair with both active.
  std::vector<std::pair<std::pair<EffectId, EffectId>, double>> pairs;
  double total = 0.0;
};

/// Degree of non-orthogonality between each interaction and its active
/// parent main effects: |mean(h_j * f_jk)| summed over all such pairs.
ClarityReport clarity_loss(const GamiNetModel& model,
                           const Eigen::MatrixXd& train_features);

}  // namespace gaminet
