#include "gaminet/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "gaminet/errors.hpp"
#include "gaminet/rng.hpp"

namespace gaminet {

void TrainConfig::validate() const {
  if (subnet_layers.empty())
    throw ValidationError("subnet_layers must name at least one hidden layer");
  for (int w : subnet_layers)
    if (w < 1) throw ValidationError("subnet layer widths must be positive");
  if (learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
  if (epochs_stage1 < 0 || epochs_stage2 < 0 || epochs_stage3 < 0)
    throw ValidationError("epoch budgets must be >= 0");
  if (batch_size < 0) throw ValidationError("batch_size must be >= 0 (0 = auto)");
  if (early_stop_patience < 1)
    throw ValidationError("early_stop_patience must be >= 1");
  if (tolerance_eta < 0.0) throw ValidationError("tolerance_eta must be >= 0");
  if (max_interactions < 0) throw ValidationError("max_interactions must be >= 0");
  if (clarity_lambda < 0.0) throw ValidationError("clarity_lambda must be >= 0");
  if (screen_bins < 2) throw ValidationError("screen_bins must be >= 2");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

int TrainConfig::resolve_batch_size(int n_train) const {
  if (batch_size > 0) {
    if (batch_size > n_train)
      throw ValidationError("batch_size exceeds the training sample count");
    return batch_size;
  }
  return std::min({1000, std::max(32, n_train / 20), n_train});
}

TrainConfig TrainConfig::from_toml(const TomlTable& table) {
  TrainConfig cfg;
  if (table.has("subnet_layers")) {
    cfg.subnet_layers.clear();
    for (long long w : table.get_int_array("subnet_layers"))
      cfg.subnet_layers.push_back(static_cast<int>(w));
  }
  cfg.activation = activation_from_string(
      table.get_string("activation", to_string(cfg.activation)));
  cfg.learning_rate = table.get_double("learning_rate", cfg.learning_rate);
  cfg.epochs_stage1 = static_cast<int>(table.get_int("epochs_stage1", cfg.epochs_stage1));
  cfg.epochs_stage2 = static_cast<int>(table.get_int("epochs_stage2", cfg.epochs_stage2));
  cfg.epochs_stage3 = static_cast<int>(table.get_int("epochs_stage3", cfg.epochs_stage3));
  cfg.batch_size = static_cast<int>(table.get_int("batch_size", cfg.batch_size));
  cfg.early_stop_patience =
      static_cast<int>(table.get_int("early_stop_patience", cfg.early_stop_patience));
  cfg.tolerance_eta = table.get_double("tolerance_eta", cfg.tolerance_eta);
  cfg.max_interactions =
      static_cast<int>(table.get_int("max_interactions", cfg.max_interactions));
  cfg.clarity_lambda = table.get_double("clarity_lambda", cfg.clarity_lambda);
  cfg.heredity = heredity_from_string(table.get_string("heredity", to_string(cfg.heredity)));
  cfg.seed = static_cast<std::uint64_t>(table.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.screen_bins = static_cast<int>(table.get_int("screen_bins", cfg.screen_bins));
  cfg.threads = static_cast<int>(table.get_int("threads", cfg.threads));
  cfg.validate();
  return cfg;
}

int TrainingTrace::executed_epochs(int stage) const {
  int count = 0;
  for (const auto& r : epochs)
    if (r.stage == stage) ++count;
  return count;
}

double TrainingTrace::min_val_loss(int stage) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : epochs)
    if (r.stage == stage) best = std::min(best, r.val_loss);
  return best;
}

void TrainingTrace::append(TrainingTrace&& other) {
  epochs.insert(epochs.end(), other.epochs.begin(), other.epochs.end());
  events.insert(events.end(), other.events.begin(), other.events.end());
}

std::string TrainingTrace::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,stage,train_loss,val_loss\n";
  for (const auto& r : epochs)
    out << r.epoch << ',' << r.stage << ',' << r.train_loss << ',' << r.val_loss
        << '\n';
  return out.str();
}

PruneResult prune(const std::vector<EffectId>& ordered_candidates,
                  const std::function<double(int)>& cumulative_val_loss,
                  double tolerance_eta) {
  if (tolerance_eta < 0.0) throw ValidationError("tolerance_eta must be >= 0");
  PruneResult result;
  result.ordered_effect_ids = ordered_candidates;
  const int m = static_cast<int>(ordered_candidates.size());
  result.cumulative_val_losses.resize(m + 1);
  for (int i = 0; i <= m; ++i) result.cumulative_val_losses[i] = cumulative_val_loss(i);
  const double min_loss = *std::min_element(result.cumulative_val_losses.begin(),
                                            result.cumulative_val_losses.end());
  result.threshold = (1.0 + tolerance_eta) * min_loss;
  result.selected_count = m;
  for (int i = 0; i <= m; ++i) {
    if (result.cumulative_val_losses[i] <= result.threshold) {
      result.selected_count = i;
      break;
    }
  }
  return result;
}

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int n_threads = std::min(threads, count);
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& src, const std::vector<int>& idx) {
  Eigen::MatrixXd out(src.rows(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(i) = src.col(idx[i]);
  return out;
}

// One effect being optimized in the current stage, with its gathered
// inputs and optimizer state. Parameters stay canonical inside the model;
// they are flattened only around each Adam step.
struct Trainable {
  EffectId id;
  Subnetwork* net = nullptr;
  CategoricalEffect* cat = nullptr;
  std::string name;
  Eigen::MatrixXd train_input;  // in_dim x n_train (subnetworks)
  Eigen::MatrixXd val_input;
  std::vector<int> train_levels;  // categorical effects
  std::vector<int> val_levels;
  AdamState adam;
  // Per-batch scratch, owned by exactly one worker at a time.
  ForwardCache cache;
  Eigen::VectorXd out;
  Eigen::VectorXd upstream;
  Eigen::VectorXd val_out;

  Eigen::VectorXd flat_params() const {
    return net ? flatten_params(*net) : cat->level_biases;
  }
  void set_flat_params(const Eigen::VectorXd& flat) {
    if (net)
      unflatten_params(flat, *net);
    else
      cat->level_biases = flat;
  }
  double offset() const { return net ? net->output_offset : cat->offset; }
};

struct ClarityPair {
  int parent_slot = -1;  // index into trainables, -1 when the parent is frozen
  int child_slot = -1;
  Eigen::VectorXd frozen_parent_train;  // full training column when frozen
};

struct StageSpec {
  int stage = 1;
  int max_epochs = 0;
  bool train_intercept = true;
  bool clarity = false;
  std::vector<EffectId> trainable_ids;
};

Eigen::VectorXd frozen_contributions(const GamiNetModel& model,
                                     const std::vector<EffectId>& trainable_ids,
                                     const Eigen::MatrixXd& features) {
  Eigen::VectorXd frozen = Eigen::VectorXd::Zero(features.rows());
  for (const EffectId& id : model.effect_order()) {
    if (std::find(trainable_ids.begin(), trainable_ids.end(), id) !=
        trainable_ids.end())
      continue;
    frozen += eval_effect(model, id, features);
  }
  return frozen;
}

TrainingTrace run_stage(GamiNetModel& model, const Dataset& train,
                        const Dataset& validation, const TrainConfig& cfg,
                        const StageSpec& spec) {
  TrainingTrace trace;
  if (spec.max_epochs <= 0 || spec.trainable_ids.empty()) return trace;

  const int n = train.n();
  const int n_val = validation.n();
  const int batch_size = cfg.resolve_batch_size(n);

  std::vector<Trainable> trainables;
  trainables.reserve(spec.trainable_ids.size());
  for (const EffectId& id : spec.trainable_ids) {
    Trainable t;
    t.id = id;
    t.name = (id.is_main() ? "main effect " : "interaction ") + model.effect_label(id);
    if (id.is_main()) {
      MainEffect& effect = model.main_effects.at(id.j);
      if (auto* cat = std::get_if<CategoricalEffect>(&effect)) {
        t.cat = cat;
        t.train_levels.resize(n);
        t.val_levels.resize(n_val);
        for (int i = 0; i < n; ++i)
          t.train_levels[i] = static_cast<int>(train.features(i, id.j));
        for (int i = 0; i < n_val; ++i)
          t.val_levels[i] = static_cast<int>(validation.features(i, id.j));
      } else {
        t.net = &std::get<Subnetwork>(effect);
      }
    } else {
      t.net = &model.interactions.at({id.j, id.k});
    }
    if (t.net) {
      t.train_input = build_effect_input(model.meta, id, train.features).eval();
      t.val_input = build_effect_input(model.meta, id, validation.features).eval();
    }
    t.adam = AdamState::create(static_cast<int>(t.flat_params().size()),
                               cfg.learning_rate);
    trainables.push_back(std::move(t));
  }
  const int n_trainable = static_cast<int>(trainables.size());

  const Eigen::VectorXd frozen_train =
      frozen_contributions(model, spec.trainable_ids, train.features);
  const Eigen::VectorXd frozen_val =
      frozen_contributions(model, spec.trainable_ids, validation.features);

  std::vector<ClarityPair> clarity_pairs;
  if (spec.clarity && cfg.clarity_lambda > 0.0) {
    auto slot_of = [&](const EffectId& id) {
      for (int s = 0; s < n_trainable; ++s)
        if (trainables[s].id == id) return s;
      return -1;
    };
    for (const auto& [jk, net] : model.interactions) {
      const int child = slot_of(EffectId::pair(jk.first, jk.second));
      if (child < 0) continue;
      for (int parent : {jk.first, jk.second}) {
        if (!model.main_effects.count(parent)) continue;
        ClarityPair pair;
        pair.child_slot = child;
        pair.parent_slot = slot_of(EffectId::main(parent));
        if (pair.parent_slot < 0)
          pair.frozen_parent_train =
              eval_effect(model, EffectId::main(parent), train.features);
        clarity_pairs.push_back(std::move(pair));
      }
    }
  }

  AdamState intercept_adam = AdamState::create(1, cfg.learning_rate);
  Eigen::VectorXd intercept_vec(1);
  intercept_vec[0] = model.intercept;

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> best_params(n_trainable);
  double best_intercept = model.intercept;
  int epochs_since_best = 0;

  Rng batch_rng = Rng::substream(cfg.seed, "batching", spec.stage);
  std::vector<int> batch_idx;
  Eigen::VectorXd y_batch, eta, grad_eta;

  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    const std::vector<int> perm = batch_rng.permutation(n);
    double epoch_loss_sum = 0.0;

    for (int start = 0; start < n; start += batch_size) {
      const int b = std::min(batch_size, n - start);
      batch_idx.assign(perm.begin() + start, perm.begin() + start + b);

      parallel_for(n_trainable, cfg.threads, [&](int s) {
        Trainable& t = trainables[s];
        if (t.net) {
          t.out = subnet_forward(*t.net, gather_cols(t.train_input, batch_idx),
                                 &t.cache);
        } else {
          t.out.resize(b);
          for (int i = 0; i < b; ++i)
            t.out[i] = t.cat->level_biases[t.train_levels[batch_idx[i]]] - t.cat->offset;
        }
      });

      eta.resize(b);
      y_batch.resize(b);
      for (int i = 0; i < b; ++i) {
        eta[i] = intercept_vec[0] + frozen_train[batch_idx[i]];
        y_batch[i] = train.response[batch_idx[i]];
      }
      for (int s = 0; s < n_trainable; ++s) eta += trainables[s].out;

      const double batch_loss = empirical_loss(model.link, y_batch, eta);
      if (!std::isfinite(batch_loss))
        throw DivergenceError("stage " + std::to_string(spec.stage) +
                              " diverged at epoch " + std::to_string(epoch) +
                              ": non-finite loss");
      epoch_loss_sum += batch_loss * b;

      grad_eta = loss_grad_eta(model.link, y_batch, eta);
      for (int s = 0; s < n_trainable; ++s) trainables[s].upstream = grad_eta;

      // Clarity penalty lambda * |mean(h f)| estimated on the batch; its
      // subgradient feeds the child and any trainable parent.
      for (const ClarityPair& pair : clarity_pairs) {
        const Trainable& child = trainables[pair.child_slot];
        Eigen::VectorXd h(b);
        if (pair.parent_slot >= 0) {
          h = trainables[pair.parent_slot].out;
        } else {
          for (int i = 0; i < b; ++i) h[i] = pair.frozen_parent_train[batch_idx[i]];
        }
        const double ip = h.dot(child.out) / b;
        const double sign = ip > 0.0 ? 1.0 : (ip < 0.0 ? -1.0 : 0.0);
        if (sign == 0.0) continue;
        const double scale = cfg.clarity_lambda * sign / b;
        trainables[pair.child_slot].upstream += scale * h;
        if (pair.parent_slot >= 0)
          trainables[pair.parent_slot].upstream += scale * child.out;
      }

      parallel_for(n_trainable, cfg.threads, [&](int s) {
        Trainable& t = trainables[s];
        Eigen::VectorXd grads;
        if (t.net) {
          grads = flatten_grads(subnet_backward(*t.net, t.cache, t.upstream));
        } else {
          grads = Eigen::VectorXd::Zero(t.cat->level_biases.size());
          for (int i = 0; i < b; ++i)
            grads[t.train_levels[batch_idx[i]]] += t.upstream[i];
        }
        Eigen::VectorXd flat = t.flat_params();
        adam_step(t.adam, flat, grads, t.name);
        t.set_flat_params(flat);
      });

      if (spec.train_intercept) {
        Eigen::VectorXd g(1);
        g[0] = grad_eta.sum();
        adam_step(intercept_adam, intercept_vec, g, "intercept");
        model.intercept = intercept_vec[0];
      }
    }

    parallel_for(n_trainable, cfg.threads, [&](int s) {
      Trainable& t = trainables[s];
      if (t.net) {
        t.val_out = subnet_forward(*t.net, t.val_input);
      } else {
        t.val_out.resize(n_val);
        for (int i = 0; i < n_val; ++i)
          t.val_out[i] = t.cat->level_biases[t.val_levels[i]] - t.cat->offset;
      }
    });
    Eigen::VectorXd eta_val =
        (frozen_val.array() + intercept_vec[0]).matrix();
    for (int s = 0; s < n_trainable; ++s) eta_val += trainables[s].val_out;
    const double val_loss = empirical_loss(model.link, validation.response, eta_val);
    if (!std::isfinite(val_loss))
      throw DivergenceError("stage " + std::to_string(spec.stage) +
                            " diverged at epoch " + std::to_string(epoch) +
                            ": non-finite validation loss");

    trace.epochs.push_back({epoch, spec.stage, epoch_loss_sum / n, val_loss});

    if (val_loss < best_val) {
      best_val = val_loss;
      for (int s = 0; s < n_trainable; ++s) best_params[s] = trainables[s].flat_params();
      best_intercept = intercept_vec[0];
      epochs_since_best = 0;
    } else if (++epochs_since_best >= cfg.early_stop_patience) {
      break;
    }
  }

  // Restore the best validation checkpoint.
  for (int s = 0; s < n_trainable; ++s)
    trainables[s].set_flat_params(best_params[s]);
  model.intercept = best_intercept;
  return trace;
}

void center_interactions_only(GamiNetModel& model, const Eigen::MatrixXd& train_features) {
  for (auto& [jk, net] : model.interactions) {
    const double mean =
        eval_effect(model, EffectId::pair(jk.first, jk.second), train_features).mean();
    net.output_offset += mean;
    model.intercept += mean;
  }
}

double initial_intercept(const Dataset& train) {
  const double mean = train.response.mean();
  if (train.task == Task::kRegression) return mean;
  const double p = std::clamp(mean, 1e-6, 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}

void check_datasets(const Dataset& train, const Dataset& validation) {
  if (train.task != validation.task)
    throw ValidationError("train and validation tasks differ");
  if (train.meta.size() != validation.meta.size())
    throw ValidationError("train and validation feature metadata differ");
  for (std::size_t j = 0; j < train.meta.size(); ++j)
    if (train.meta[j].name != validation.meta[j].name ||
        train.meta[j].kind != validation.meta[j].kind)
      throw ValidationError("train and validation feature metadata differ at column " +
                            train.meta[j].name);
  if (train.response.size() != train.n() || validation.response.size() != validation.n())
    throw ValidationError("datasets are missing responses");
  if (train.n() < 2) throw ValidationError("training set needs at least 2 rows");
}

// Descending D with deterministic tie-breaking (lower index first).
std::vector<EffectId> order_by_variance(const std::vector<std::pair<EffectId, double>>& d_values) {
  std::vector<std::pair<EffectId, double>> sorted = d_values;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<EffectId> out;
  out.reserve(sorted.size());
  for (const auto& [id, d] : sorted) out.push_back(id);
  return out;
}

}  // namespace

TrainingTrace train_main_effects(GamiNetModel& model, const Dataset& train,
                                 const Dataset& validation, const TrainConfig& config) {
  if (!model.interactions.empty())
    throw ValidationError("stage 1 expects a model without interactions");
  StageSpec spec;
  spec.stage = 1;
  spec.max_epochs = config.epochs_stage1;
  spec.train_intercept = true;
  spec.clarity = false;
  for (const auto& [j, effect] : model.main_effects)
    spec.trainable_ids.push_back(EffectId::main(j));
  TrainingTrace trace = run_stage(model, train, validation, config, spec);
  if (!trace.epochs.empty()) center_effects(model, train.features);
  return trace;
}

TrainingTrace train_interactions(GamiNetModel& model,
                                 const std::vector<std::pair<int, int>>& candidates,
                                 const Dataset& train, const Dataset& validation,
                                 const TrainConfig& config) {
  if (candidates.empty()) return {};
  StageSpec spec;
  spec.stage = 2;
  spec.max_epochs = config.epochs_stage2;
  spec.train_intercept = false;  // main effects and intercept stay frozen
  spec.clarity = true;
  for (const auto& [j, k] : candidates) {
    if (!model.interactions.count({j, k}))
      throw ValidationError("interaction candidate (" + std::to_string(j) + "," +
                            std::to_string(k) + ") is not in the model");
    spec.trainable_ids.push_back(EffectId::pair(j, k));
  }
  TrainingTrace trace = run_stage(model, train, validation, config, spec);
  if (!trace.epochs.empty()) center_interactions_only(model, train.features);
  return trace;
}

TrainingTrace fine_tune(GamiNetModel& model, const Dataset& train,
                        const Dataset& validation, const TrainConfig& config) {
  StageSpec spec;
  spec.stage = 3;
  spec.max_epochs = config.epochs_stage3;
  spec.train_intercept = true;
  spec.clarity = true;
  spec.trainable_ids = model.effect_order();
  if (spec.trainable_ids.empty()) return {};
  TrainingTrace trace = run_stage(model, train, validation, config, spec);
  if (!trace.epochs.empty()) center_effects(model, train.features);
  return trace;
}

FitResult fit(const Dataset& train, const Dataset& validation,
              const TrainConfig& config) {
  config.validate();
  check_datasets(train, validation);
  config.resolve_batch_size(train.n());

  FitResult result;
  GamiNetModel& model = result.model;
  model.task = train.task;
  model.link = link_for_task(train.task);
  model.meta = train.meta;
  model.intercept = initial_intercept(train);

  const int p = train.p();
  for (int j = 0; j < p; ++j) {
    if (train.meta[j].kind == FeatureKind::kCategorical) {
      CategoricalEffect cat;
      cat.level_biases =
          Eigen::VectorXd::Zero(static_cast<long>(train.meta[j].levels.size()));
      model.main_effects.emplace(j, std::move(cat));
    } else {
      Rng rng = Rng::substream(config.seed, "init-main", static_cast<std::uint64_t>(j));
      model.main_effects.emplace(
          j, make_subnetwork(1, 1, config.subnet_layers, config.activation, rng));
    }
  }

  // Stage 1: train and center all candidate main effects.
  result.trace.append(train_main_effects(model, train, validation, config));
  result.trace.events.push_back(
      "stage1 epochs=" + std::to_string(result.trace.executed_epochs(1)));

  // Prune mains: cumulative models add centered effects in descending-D
  // order on top of the overall-mean intercept.
  {
    const EffectVarianceTable var = effect_variance(model, train.features);
    const std::vector<EffectId> ordered = order_by_variance(var.d_values);
    std::vector<double> losses(ordered.size() + 1);
    Eigen::VectorXd eta =
        Eigen::VectorXd::Constant(validation.n(), model.intercept);
    losses[0] = empirical_loss(model.link, validation.response, eta);
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      eta += eval_effect(model, ordered[i], validation.features);
      losses[i + 1] = empirical_loss(model.link, validation.response, eta);
    }
    result.prune_mains = prune(
        ordered, [&losses](int i) { return losses[i]; }, config.tolerance_eta);
    for (std::size_t i = result.prune_mains.selected_count; i < ordered.size(); ++i)
      model.main_effects.erase(ordered[i].j);
    result.trace.events.push_back(
        "prune_mains kept=" + std::to_string(result.prune_mains.selected_count) +
        " of " + std::to_string(ordered.size()));
  }

  // Stage 2: screen, train and prune pairwise interactions.
  std::set<int> s1;
  for (const auto& [j, effect] : model.main_effects) s1.insert(j);
  const bool screen_possible =
      config.max_interactions > 0 &&
      (config.heredity == Heredity::kNone || !s1.empty());
  if (screen_possible) {
    const Eigen::VectorXd residuals = compute_residuals(model, train);
    const std::vector<InteractionCandidate> ranked =
        rank_interactions(s1, residuals, train, config.max_interactions,
                          config.heredity, config.screen_bins);
    result.trace.events.push_back("screen candidates=" + std::to_string(ranked.size()));

    if (!ranked.empty()) {
      // Stage-1 validation predictions, captured before any interaction
      // subnetwork exists; interaction pruning is measured against them.
      const Eigen::VectorXd stage1_eta_val = predict_eta(model, validation.features);
      const double stage1_val_loss =
          empirical_loss(model.link, validation.response, stage1_eta_val);

      std::vector<std::pair<int, int>> candidates;
      for (const InteractionCandidate& c : ranked) {
        const int in_dim =
            train.meta[c.j].one_hot_width() + train.meta[c.k].one_hot_width();
        Rng rng = Rng::substream(config.seed, "init-interaction",
                                 static_cast<std::uint64_t>(c.j) * p + c.k);
        model.interactions.emplace(
            std::make_pair(c.j, c.k),
            make_subnetwork(in_dim, 2, config.subnet_layers, config.activation, rng));
        candidates.emplace_back(c.j, c.k);
      }

      result.trace.append(
          train_interactions(model, candidates, train, validation, config));
      result.trace.events.push_back(
          "stage2 epochs=" + std::to_string(result.trace.executed_epochs(2)));

      // Prune interactions: cumulative models add raw (uncentered)
      // interaction contributions on top of the stage-1 model, so l_0 is
      // exactly the stage-1 validation loss.
      EffectVarianceTable var;
      for (const auto& [jk, net] : model.interactions) {
        const EffectId id = EffectId::pair(jk.first, jk.second);
        const Eigen::VectorXd values = eval_effect(model, id, train.features);
        var.d_values.emplace_back(id, values.squaredNorm() / (train.n() - 1));
      }
      const std::vector<EffectId> ordered = order_by_variance(var.d_values);
      std::vector<double> losses(ordered.size() + 1);
      Eigen::VectorXd eta = stage1_eta_val;
      losses[0] = stage1_val_loss;
      for (std::size_t i = 0; i < ordered.size(); ++i) {
        const Subnetwork& net = model.interactions.at({ordered[i].j, ordered[i].k});
        eta.array() += eval_effect(model, ordered[i], validation.features).array() +
                       net.output_offset;
        losses[i + 1] = empirical_loss(model.link, validation.response, eta);
      }
      result.prune_interactions = prune(
          ordered, [&losses](int i) { return losses[i]; }, config.tolerance_eta);
      for (std::size_t i = result.prune_interactions.selected_count;
           i < ordered.size(); ++i) {
        auto it = model.interactions.find({ordered[i].j, ordered[i].k});
        model.intercept -= it->second.output_offset;
        model.interactions.erase(it);
      }
      result.trace.events.push_back(
          "prune_interactions kept=" +
          std::to_string(result.prune_interactions.selected_count) + " of " +
          std::to_string(ordered.size()));
    }
  }

  // Stage 3: joint fine-tuning of all surviving effects.
  if (!model.main_effects.empty() || !model.interactions.empty()) {
    result.trace.append(fine_tune(model, train, validation, config));
    result.trace.events.push_back(
        "stage3 epochs=" + std::to_string(result.trace.executed_epochs(3)));
  }

  if (!model.main_effects.empty() || !model.interactions.empty())
    model.variance_table = effect_variance(model, train.features);
  result.final_val_loss = empirical_loss(model.link, validation.response,
                                         predict_eta(model, validation.features));
  return result;
}

}  // namespace gaminet
