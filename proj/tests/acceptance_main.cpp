// Acceptance suite: one pass/fail line per criterion.
//
//   1  synthetic test RMSE at the reduced desk budget
//   2  effect recovery (S1 and S2) across repetitions
//   3  clarity ablation, lambda = 1 vs lambda = 1e-4, paired seeds
//   4  prune-rule oracle on random loss sequences
//   5  finite-difference gradient suite
//   6  identifiability invariants after completed training runs
//   7  screening oracle and planted-interaction ranking
//   8  centering invariance on random models
//   9  byte-identical model documents under one seed
//
// Usage: acceptance [--criteria 1,2,3] [--reps N] [--threads N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "gaminet/interpret.hpp"
#include "gaminet/model_io.hpp"
#include "gaminet/screen.hpp"
#include "gaminet/synth.hpp"
#include "gaminet/trainer.hpp"

using namespace gaminet;

namespace {

struct Outcome {
  int id = 0;
  bool pass = false;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void record(int id, bool pass, const std::string& detail) {
  g_outcomes.push_back({id, pass, detail});
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail
            << std::endl;
}

// ---------------------------------------------------------------------------
// Shared desk-budget benchmark runs (criteria 1, 2, 3 and part of 6).
// ---------------------------------------------------------------------------

struct HeavyRuns {
  std::vector<BenchReport> lambda1;
  std::vector<BenchReport> lambda4;  // lambda = 1e-4, paired seeds
  std::vector<RepetitionCapture> captures;  // lambda = 1 models
  double wall_seconds = 0.0;
};

TrainConfig desk_config(double lambda, int threads) {
  TrainConfig cfg;
  cfg.epochs_stage1 = 1000;
  cfg.epochs_stage2 = 1000;
  cfg.epochs_stage3 = 200;
  cfg.clarity_lambda = lambda;
  cfg.threads = threads;
  return cfg;
}

HeavyRuns run_heavy(int reps, int threads) {
  HeavyRuns runs;
  SynthConfig synth;
  synth.n = 10000;
  synth.distribution = SynthDistribution::kUniform;
  synth.seed = 2026;

  const auto t0 = std::chrono::steady_clock::now();
  for (int rep = 0; rep < reps; ++rep) {
    RepetitionCapture capture;
    BenchReport report =
        run_repetition(synth, desk_config(1.0, threads), rep, "", &capture);
    std::cerr << "[heavy] lambda=1 rep " << (rep + 1) << "/" << reps
              << ": test rmse " << report.test_rmse << ", |s1|="
              << report.s1.size() << ", |s2|=" << report.s2.size()
              << ", clarity " << report.clarity_total << " ("
              << static_cast<int>(report.wall_seconds) << "s)" << std::endl;
    runs.lambda1.push_back(std::move(report));
    runs.captures.push_back(std::move(capture));
  }
  for (int rep = 0; rep < reps; ++rep) {
    BenchReport report = run_repetition(synth, desk_config(1e-4, threads), rep, "");
    std::cerr << "[heavy] lambda=1e-4 rep " << (rep + 1) << "/" << reps
              << ": test rmse " << report.test_rmse << ", clarity "
              << report.clarity_total << " ("
              << static_cast<int>(report.wall_seconds) << "s)" << std::endl;
    runs.lambda4.push_back(std::move(report));
  }
  runs.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return runs;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void criterion_1(const HeavyRuns& runs) {
  std::vector<double> test_rmse, oracle_rmse;
  for (const auto& r : runs.lambda1) {
    test_rmse.push_back(r.test_rmse);
    oracle_rmse.push_back(r.oracle_test_rmse);
  }
  const double mean_rmse = mean_of(test_rmse);
  const double mean_oracle = mean_of(oracle_rmse);
  const bool rmse_ok = mean_rmse <= 1.30;
  const bool floor_ok = std::abs(mean_oracle - 1.0) < 0.05;
  std::ostringstream detail;
  detail.precision(4);
  detail << std::fixed << "synthetic RMSE: mean test RMSE " << mean_rmse
         << " (threshold 1.30, desk budget 1000/1000/200), oracle noise floor "
         << mean_oracle << ", total " << static_cast<int>(runs.wall_seconds)
         << "s for " << runs.lambda1.size() << "+" << runs.lambda4.size()
         << " runs";
  record(1, rmse_ok && floor_ok, detail.str());
}

void criterion_2(const HeavyRuns& runs) {
  int good = 0;
  for (const auto& r : runs.lambda1) {
    if (r.mains_recovered && r.spurious_mains <= 2 && r.interactions_exact) ++good;
  }
  std::ostringstream detail;
  detail << "effect recovery: " << good << "/" << runs.lambda1.size()
         << " repetitions recovered x1..x6 (<=2 spurious) and exactly "
            "{(x3,x4),(x5,x6)} (need >= 8/10)";
  record(2, good >= 8, detail.str());
}

void criterion_3(const HeavyRuns& runs) {
  std::vector<double> c1, c4;
  for (const auto& r : runs.lambda1) c1.push_back(r.clarity_total);
  for (const auto& r : runs.lambda4) c4.push_back(r.clarity_total);
  const double m1 = mean_of(c1), m4 = mean_of(c4);
  std::ostringstream detail;
  detail.precision(6);
  detail << "clarity ablation: mean clarity loss " << m1 << " at lambda=1 vs "
         << m4 << " at lambda=1e-4 (paired seeds, must be strictly smaller)";
  record(3, m1 < m4, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: prune-rule oracle.
// ---------------------------------------------------------------------------

void criterion_4() {
  int failures = 0;
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    Rng rng = Rng::substream(404, "prune-acceptance", trial);
    const int m = 1 + static_cast<int>(rng.uniform_int(20));
    std::vector<double> losses(m + 1);
    for (double& l : losses) l = rng.uniform(0.25, 4.0);
    std::vector<EffectId> ids;
    for (int i = 0; i < m; ++i) ids.push_back(EffectId::main(i));
    for (double eta : {0.0, 0.01, 0.05}) {
      const PruneResult got = prune(ids, [&](int i) { return losses[i]; }, eta);
      // Brute force: scan every candidate count and keep the first admissible.
      double min_loss = losses[0];
      for (double l : losses) min_loss = std::min(min_loss, l);
      int expect = m;
      for (int i = 0; i <= m; ++i) {
        if (losses[i] <= (1.0 + eta) * min_loss) {
          expect = i;
          break;
        }
      }
      if (got.selected_count != expect) ++failures;
    }
  }
  std::ostringstream detail;
  detail << "prune-rule oracle: 500 random loss sequences x eta in {0, 0.01, "
            "0.05}, "
         << failures << " mismatches (exact equality required)";
  record(4, failures == 0, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: finite-difference gradient suite.
// ---------------------------------------------------------------------------

bool gradient_check(Subnetwork& net, const Eigen::MatrixXd& inputs,
                    const Eigen::VectorXd& upstream, double* worst) {
  ForwardCache cache;
  subnet_forward(net, inputs, &cache);
  const Eigen::VectorXd grads = flatten_grads(subnet_backward(net, cache, upstream));
  Eigen::VectorXd params = flatten_params(net);
  const double step = 1e-5;
  bool ok = true;
  for (int p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + step;
    unflatten_params(params, net);
    const double up = upstream.dot(subnet_forward(net, inputs));
    params[p] = saved - step;
    unflatten_params(params, net);
    const double down = upstream.dot(subnet_forward(net, inputs));
    params[p] = saved;
    unflatten_params(params, net);
    const double fd = (up - down) / (2.0 * step);
    const double abs_diff = std::abs(grads[p] - fd);
    if (abs_diff < 1e-7) continue;  // near zero the absolute bound applies
    const double rel =
        abs_diff / std::max({std::abs(fd), std::abs(grads[p]), 1e-12});
    *worst = std::max(*worst, rel);
    if (rel >= 1e-4) ok = false;
  }
  return ok;
}

void criterion_5() {
  bool all_ok = true;
  double worst = 0.0;
  const std::vector<int> widths(5, 40);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (int arity : {1, 2}) {
      Rng rng = Rng::substream(505, "grad-acceptance", seed * 2 + arity);
      Subnetwork net = make_subnetwork(arity, arity, widths, Activation::kTanh, rng);
      for (auto& layer : net.layers) {
        for (long i = 0; i < layer.weights.size(); ++i)
          layer.weights.data()[i] = rng.uniform(-0.5, 0.5);
        for (long i = 0; i < layer.biases.size(); ++i)
          layer.biases[i] = rng.uniform(-0.5, 0.5);
      }
      Eigen::MatrixXd inputs(arity, 4);
      for (long i = 0; i < inputs.size(); ++i)
        inputs.data()[i] = rng.uniform(-1.0, 1.0);
      Eigen::VectorXd upstream(4);
      for (int i = 0; i < 4; ++i) upstream[i] = rng.uniform(-1.0, 1.0);
      if (!gradient_check(net, inputs, upstream, &worst)) all_ok = false;
    }
  }
  std::ostringstream detail;
  detail << "gradient suite: tanh subnetworks (arity 1 and 2, widths 40x5), 20 "
            "seeds, worst relative error "
         << worst << " (threshold 1e-4)";
  record(5, all_ok, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: identifiability invariants after completed training runs.
// ---------------------------------------------------------------------------

bool check_identifiability(const GamiNetModel& model,
                           const Eigen::MatrixXd& train_features,
                           std::ostream& why) {
  bool ok = true;
  for (const EffectId& id : model.effect_order()) {
    const double mean = eval_effect(model, id, train_features).mean();
    if (std::abs(mean) >= 1e-6) {
      why << " effect mean " << mean << ";";
      ok = false;
    }
  }
  if (!model.effect_order().empty()) {
    Dataset train;
    train.meta = model.meta;
    train.features = train_features;
    train.response = Eigen::VectorXd::Zero(train_features.rows());
    const ImportanceTable table = importance_ratios(model, train);
    double sum = 0.0;
    for (const auto& r : table.rows) sum += r.ir;
    if (!table.empty_model && std::abs(sum - 1.0) >= 1e-9) {
      why << " sum IR " << sum << ";";
      ok = false;
    }
  }
  for (const auto& [jk, net] : model.interactions) {
    if (!model.main_effects.count(jk.first) && !model.main_effects.count(jk.second)) {
      why << " heredity violated by (" << jk.first << "," << jk.second << ");";
      ok = false;
    }
  }
  Rng rng(606);
  int bad_rows = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::RowVectorXd row(model.meta.size());
    for (std::size_t j = 0; j < model.meta.size(); ++j) {
      row[j] = model.meta[j].kind == FeatureKind::kNumerical
                   ? rng.uniform()
                   : static_cast<double>(rng.uniform_int(model.meta[j].levels.size()));
    }
    const LocalExplanation e = local_explain(model, row);
    double sum = e.intercept;
    for (double c : e.contributions) sum += c;
    if (std::abs(sum - e.eta) >= 1e-9) ++bad_rows;
  }
  if (bad_rows > 0) {
    why << " " << bad_rows << " reconstruction failures;";
    ok = false;
  }
  return ok;
}

void criterion_6(const HeavyRuns* runs, int threads) {
  std::ostringstream why;
  bool ok = true;
  int models_checked = 0;

  // A standalone completed run keeps this criterion meaningful even when
  // the heavy benchmark repetitions are filtered out.
  {
    SynthConfig synth;
    synth.n = 2000;
    synth.p_total = 20;
    synth.seed = 606;
    const Dataset data = generate(synth);
    const SplitResult parts = split(data, 0.2, 0.2, 606);
    TrainConfig cfg = desk_config(1.0, threads);
    cfg.epochs_stage1 = 300;
    cfg.epochs_stage2 = 300;
    cfg.epochs_stage3 = 100;
    const FitResult fitted = fit(parts.train, parts.validation, cfg);
    ok &= check_identifiability(fitted.model, parts.train.features, why);
    ++models_checked;
  }
  if (runs) {
    for (const auto& capture : runs->captures) {
      ok &= check_identifiability(capture.model, capture.train_features, why);
      ++models_checked;
    }
  }
  std::ostringstream detail;
  detail << "identifiability: effect means < 1e-6, sum IR = 1 +- 1e-9, weak "
            "heredity, local reconstruction < 1e-9 on 1000 rows, across "
         << models_checked << " completed runs";
  if (!ok) detail << " —" << why.str();
  record(6, ok, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 7: screening oracle.
// ---------------------------------------------------------------------------

double oracle_score(const BinnedFeature& fj, const BinnedFeature& fk,
                    const Eigen::VectorXd& r) {
  const long n = r.size();
  std::vector<std::vector<double>> sum(fj.n_bins,
                                       std::vector<double>(fk.n_bins, 0.0));
  std::vector<std::vector<long>> cnt(fj.n_bins, std::vector<long>(fk.n_bins, 0));
  double total_sq = 0.0;
  long occupied = 0;
  for (long i = 0; i < n; ++i) {
    if (cnt[fj.bins[i]][fk.bins[i]] == 0) ++occupied;
    sum[fj.bins[i]][fk.bins[i]] += r[i];
    cnt[fj.bins[i]][fk.bins[i]] += 1;
    total_sq += r[i] * r[i];
  }
  auto region = [&](int alo, int ahi, int blo, int bhi) {
    double s = 0.0;
    long c = 0;
    for (int a = alo; a < ahi; ++a)
      for (int b = blo; b < bhi; ++b) {
        s += sum[a][b];
        c += cnt[a][b];
      }
    return c > 0 ? s * s / static_cast<double>(c) : 0.0;
  };
  if (fj.n_bins < 2 || fk.n_bins < 2 || occupied < 4)
    return (total_sq - region(0, fj.n_bins, 0, fk.n_bins)) / static_cast<double>(n);
  double best = std::numeric_limits<double>::infinity();
  for (int cj = 0; cj + 1 < fj.n_bins; ++cj)
    for (int ck = 0; ck + 1 < fk.n_bins; ++ck) {
      const double fit = region(0, cj + 1, 0, ck + 1) +
                         region(0, cj + 1, ck + 1, fk.n_bins) +
                         region(cj + 1, fj.n_bins, 0, ck + 1) +
                         region(cj + 1, fj.n_bins, ck + 1, fk.n_bins);
      best = std::min(best, total_sq - fit);
    }
  return best / static_cast<double>(n);
}

void criterion_7() {
  int mismatches = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng = Rng::substream(707, "screen-acceptance", trial);
    const int n = 20 + static_cast<int>(rng.uniform_int(181));  // n <= 200
    const int bins = 2 + static_cast<int>(rng.uniform_int(4));  // B <= 5
    const bool cat_a = rng.uniform() < 0.25;
    const bool cat_b = rng.uniform() < 0.25;
    Dataset data;
    FeatureMeta ma, mb;
    ma.name = "a";
    mb.name = "b";
    ma.kind = cat_a ? FeatureKind::kCategorical : FeatureKind::kNumerical;
    mb.kind = cat_b ? FeatureKind::kCategorical : FeatureKind::kNumerical;
    if (cat_a) ma.levels = {"0", "1", "2"};
    if (cat_b) mb.levels = {"0", "1", "2", "3"};
    data.meta = {ma, mb};
    data.features.resize(n, 2);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      data.features(i, 0) =
          cat_a ? static_cast<double>(rng.uniform_int(3)) : rng.uniform();
      data.features(i, 1) =
          cat_b ? static_cast<double>(rng.uniform_int(4)) : rng.uniform();
      r[i] = rng.normal();
    }
    data.response = Eigen::VectorXd::Zero(n);
    const double got = score_pair(0, 1, r, data, bins);
    const BinnedFeature fa = bin_feature(data.features.col(0), ma.kind, bins);
    const BinnedFeature fb = bin_feature(data.features.col(1), mb.kind, bins);
    if (got != oracle_score(fa, fb, r)) ++mismatches;
  }

  int xor_first = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng = Rng::substream(708, "xor-acceptance", trial);
    const int n = 400;
    Dataset data;
    for (int j = 0; j < 8; ++j) {
      FeatureMeta m;
      m.name = "f" + std::to_string(j);
      m.kind = FeatureKind::kNumerical;
      data.meta.push_back(m);
    }
    data.features.resize(n, 8);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 8; ++j) data.features(i, j) = rng.uniform();
      const bool hi = (data.features(i, 4) > 0.5) != (data.features(i, 5) > 0.5);
      r[i] = (hi ? 1.0 : -1.0) + 0.1 * rng.normal();
    }
    data.response = Eigen::VectorXd::Zero(n);
    const auto ranked = rank_interactions({0, 1, 2, 3, 4, 5, 6, 7}, r, data, 10,
                                          Heredity::kWeak, 5);
    if (!ranked.empty() && ranked[0].j == 4 && ranked[0].k == 5) ++xor_first;
  }

  std::ostringstream detail;
  detail << "screening oracle: " << mismatches
         << " mismatches over 100 brute-force instances (exact); planted XOR "
            "ranked first in "
         << xor_first << "/20 trials";
  record(7, mismatches == 0 && xor_first == 20, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 8: centering invariance.
// ---------------------------------------------------------------------------

void criterion_8() {
  int failures = 0;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng = Rng::substream(808, "center-acceptance", trial);
    GamiNetModel model;
    FeatureMeta m1, m2, m3;
    m1.name = "a";
    m1.kind = FeatureKind::kNumerical;
    m2.name = "b";
    m2.kind = FeatureKind::kNumerical;
    m3.name = "c";
    m3.kind = FeatureKind::kCategorical;
    m3.levels = {"u", "v", "w"};
    model.meta = {m1, m2, m3};
    model.intercept = rng.uniform(-2.0, 2.0);
    model.main_effects.emplace(
        0, make_subnetwork(1, 1, {12, 12}, Activation::kTanh, rng));
    CategoricalEffect cat;
    cat.level_biases.resize(3);
    for (int l = 0; l < 3; ++l) cat.level_biases[l] = rng.uniform(-1.0, 1.0);
    model.main_effects.emplace(2, cat);
    model.interactions.emplace(std::make_pair(0, 1),
                               make_subnetwork(2, 2, {12}, Activation::kTanh, rng));

    auto draw_rows = [&](int count) {
      Eigen::MatrixXd rows(count, 3);
      for (int i = 0; i < count; ++i) {
        rows(i, 0) = rng.uniform();
        rows(i, 1) = rng.uniform();
        rows(i, 2) = static_cast<double>(rng.uniform_int(3));
      }
      return rows;
    };
    const Eigen::MatrixXd train = draw_rows(50);
    const Eigen::MatrixXd fresh = draw_rows(20);
    const Eigen::VectorXd before = predict_eta(model, fresh);
    center_effects(model, train);
    const Eigen::VectorXd after = predict_eta(model, fresh);
    const double diff = (before - after).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    if (diff >= 1e-9) ++failures;
  }
  std::ostringstream detail;
  detail << "centering invariance: 100 random models, worst prediction shift "
         << worst << " (threshold 1e-9)";
  record(8, failures == 0, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism.
// ---------------------------------------------------------------------------

void criterion_9() {
  SynthConfig synth;
  synth.n = 600;
  synth.p_total = 8;
  synth.seed = 909;
  const Dataset data = generate(synth);
  const SplitResult parts = split(data, 0.2, 0.2, 909);
  TrainConfig cfg;
  cfg.subnet_layers = {16, 16};
  cfg.learning_rate = 0.005;
  cfg.epochs_stage1 = 80;
  cfg.epochs_stage2 = 50;
  cfg.epochs_stage3 = 20;
  cfg.max_interactions = 5;
  cfg.clarity_lambda = 1.0;
  cfg.threads = 1;
  cfg.seed = 909;
  const FitResult a = fit(parts.train, parts.validation, cfg);
  const FitResult b = fit(parts.train, parts.validation, cfg);
  const bool ok = model_to_json(a.model) == model_to_json(b.model);
  record(9, ok,
         "determinism: two sequential runs with one seed produce byte-identical "
         "model documents");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  int reps = 10;
  int threads = 2;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criteria") == 0 && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) wanted.insert(std::stoi(item));
    } else if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) {
      reps = std::stoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      threads = std::stoi(argv[++i]);
    }
  }
  auto enabled = [&wanted](int id) { return wanted.empty() || wanted.count(id); };

  // Fast criteria first; the heavy benchmark arms run last.
  if (enabled(4)) criterion_4();
  if (enabled(5)) criterion_5();
  if (enabled(7)) criterion_7();
  if (enabled(8)) criterion_8();
  if (enabled(9)) criterion_9();

  HeavyRuns runs;
  const bool need_heavy = enabled(1) || enabled(2) || enabled(3);
  if (need_heavy) runs = run_heavy(reps, threads);
  if (enabled(6)) criterion_6(need_heavy ? &runs : nullptr, threads);
  if (enabled(1)) criterion_1(runs);
  if (enabled(2)) criterion_2(runs);
  if (enabled(3)) criterion_3(runs);

  std::sort(g_outcomes.begin(), g_outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
  bool all = true;
  std::cout << "\n=== acceptance summary ===\n";
  for (const Outcome& o : g_outcomes) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << o.id << "\n";
    all &= o.pass;
  }
  std::cout << (all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << std::endl;
  return all ? 0 : 1;
}
