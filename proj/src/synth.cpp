#include "gaminet/synth.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include "gaminet/errors.hpp"
#include "gaminet/model_io.hpp"
#include "gaminet/rng.hpp"
#include "gaminet/svg.hpp"

namespace gaminet {

SynthDistribution synth_distribution_from_string(const std::string& name) {
  if (name == "uniform") return SynthDistribution::kUniform;
  if (name == "normal") return SynthDistribution::kTruncatedNormal;
  if (name == "exponential") return SynthDistribution::kTruncatedExponential;
  throw ValidationError("unknown distribution: " + name +
                        " (expected uniform, normal or exponential)");
}

std::string to_string(SynthDistribution d) {
  switch (d) {
    case SynthDistribution::kUniform: return "uniform";
    case SynthDistribution::kTruncatedNormal: return "normal";
    case SynthDistribution::kTruncatedExponential: return "exponential";
  }
  return "uniform";
}

void SynthConfig::validate() const {
  if (n < 10) throw ValidationError("synthetic n must be at least 10");
  if (p_total < 6) throw ValidationError("synthetic p_total must be at least 6");
  if (noise_sd < 0.0) throw ValidationError("noise_sd must be >= 0");
}

double synthetic_response(const double* x) {
  const double ridge = 2.0 * x[4] - 1.0;
  const double bent = 15.0 * x[5] + 12.0 * ridge * ridge - 13.0;
  return 8.0 * (x[0] - 0.5) * (x[0] - 0.5) +
         0.1 * std::exp(-8.0 * x[1] + 4.0) +
         3.0 * std::sin(2.0 * std::numbers::pi * x[2] * x[3]) +
         5.0 * std::exp(-2.0 * ridge * ridge - 0.5 * bent * bent);
}

namespace {

// One coordinate draw, truncated to [0,1] by rejection.
double draw_coordinate(Rng& rng, SynthDistribution dist) {
  switch (dist) {
    case SynthDistribution::kUniform:
      return rng.uniform();
    case SynthDistribution::kTruncatedNormal: {
      double v;
      do {
        v = rng.normal(0.5, 0.2);
      } while (v < 0.0 || v > 1.0);
      return v;
    }
    case SynthDistribution::kTruncatedExponential: {
      double v;
      do {
        v = -std::log(1.0 - rng.uniform()) / 0.5;
      } while (v > 1.0);
      return v;
    }
  }
  return 0.0;
}

// Copies the six active coordinates out of the (column-major) matrix.
double response_at_row(const Eigen::MatrixXd& x, long i) {
  double v[6];
  for (int j = 0; j < 6; ++j) v[j] = x(i, j);
  return synthetic_response(v);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double rmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  return std::sqrt((truth - pred).squaredNorm() / static_cast<double>(truth.size()));
}

}  // namespace

Dataset generate(const SynthConfig& config) {
  config.validate();
  Rng rng = Rng::substream(config.seed, "data");

  Dataset data;
  data.task = Task::kRegression;
  data.features.resize(config.n, config.p_total);
  data.response.resize(config.n);
  for (int j = 0; j < config.p_total; ++j) {
    FeatureMeta meta;
    meta.name = "x" + std::to_string(j + 1);
    meta.kind = FeatureKind::kNumerical;
    meta.scale_min = 0.0;
    meta.scale_max = 1.0;
    data.meta.push_back(std::move(meta));
  }
  for (int i = 0; i < config.n; ++i) {
    for (int j = 0; j < config.p_total; ++j)
      data.features(i, j) = draw_coordinate(rng, config.distribution);
    data.response[i] = response_at_row(data.features, i) +
                       (config.noise_sd > 0.0 ? rng.normal(0.0, config.noise_sd) : 0.0);
  }
  return data;
}

BenchReport run_repetition(const SynthConfig& base, const TrainConfig& train_config,
                           int repetition, const std::string& artifact_dir,
                           RepetitionCapture* capture) {
  SynthConfig data_config = base;
  data_config.seed = Rng::substream(base.seed, "bench-rep",
                                    static_cast<std::uint64_t>(repetition))
                         .next_u64();
  const Dataset data = generate(data_config);

  TrainConfig cfg = train_config;
  cfg.seed = data_config.seed;
  const SplitResult parts = split(data, 0.2, 0.2, data_config.seed);

  const auto t0 = std::chrono::steady_clock::now();
  FitResult fitted = fit(parts.train, parts.validation, cfg);
  const auto t1 = std::chrono::steady_clock::now();

  BenchReport report;
  report.data_seed = data_config.seed;
  report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.train_rmse = rmse(parts.train.response,
                           predict_eta(fitted.model, parts.train.features));
  report.val_rmse = rmse(parts.validation.response,
                         predict_eta(fitted.model, parts.validation.features));
  report.test_rmse = rmse(parts.test.response,
                          predict_eta(fitted.model, parts.test.features));

  Eigen::VectorXd oracle(parts.test.n());
  for (int i = 0; i < parts.test.n(); ++i)
    oracle[i] = response_at_row(parts.test.features, i);
  report.oracle_test_rmse = rmse(parts.test.response, oracle);

  for (const auto& [j, effect] : fitted.model.main_effects)
    report.s1.push_back(fitted.model.meta[j].name);
  for (const auto& [jk, net] : fitted.model.interactions)
    report.s2.emplace_back(fitted.model.meta[jk.first].name,
                           fitted.model.meta[jk.second].name);

  int true_mains = 0;
  for (const auto& name : report.s1) {
    if (name == "x1" || name == "x2" || name == "x3" || name == "x4" ||
        name == "x5" || name == "x6")
      ++true_mains;
  }
  report.mains_recovered = true_mains == 6;
  report.spurious_mains = static_cast<int>(report.s1.size()) - true_mains;
  report.interactions_exact =
      report.s2.size() == 2 && report.s2[0] == std::make_pair(std::string("x3"), std::string("x4")) &&
      report.s2[1] == std::make_pair(std::string("x5"), std::string("x6"));
  report.clarity_total = clarity_loss(fitted.model, parts.train.features).total;

  if (!artifact_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(artifact_dir) / ("rep_" + std::to_string(repetition));
    fs::create_directories(dir);
    save_model(fitted.model, (dir / "model.json").string());
    write_text_file((dir / "trace.csv").string(), fitted.trace.to_csv());
  }
  if (capture) {
    capture->model = std::move(fitted.model);
    capture->train_features = parts.train.features;
    capture->final_val_loss = fitted.final_val_loss;
  }
  return report;
}

BenchSummary summarize(std::vector<BenchReport> reports) {
  BenchSummary summary;
  std::vector<double> test, train, val, clarity;
  for (const BenchReport& r : reports) {
    test.push_back(r.test_rmse);
    train.push_back(r.train_rmse);
    val.push_back(r.val_rmse);
    clarity.push_back(r.clarity_total);
    summary.mains_recovered_count += r.mains_recovered ? 1 : 0;
    summary.interactions_exact_count += r.interactions_exact ? 1 : 0;
  }
  summary.reports = std::move(reports);
  summary.test_rmse_mean = mean_of(test);
  summary.test_rmse_sd = sd_of(test);
  summary.train_rmse_mean = mean_of(train);
  summary.train_rmse_sd = sd_of(train);
  summary.val_rmse_mean = mean_of(val);
  summary.val_rmse_sd = sd_of(val);
  summary.clarity_mean = mean_of(clarity);
  summary.clarity_sd = sd_of(clarity);
  return summary;
}

BenchSummary run_benchmark(const SynthConfig& base, const TrainConfig& train_config,
                           int repetitions, const std::string& artifact_dir) {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  std::vector<BenchReport> reports;
  for (int rep = 0; rep < repetitions; ++rep) {
    BenchReport report = run_repetition(base, train_config, rep, artifact_dir);
    std::cerr << "rep " << (rep + 1) << "/" << repetitions
              << ": test rmse " << report.test_rmse
              << ", s1=" << report.s1.size() << " mains"
              << ", s2=" << report.s2.size() << " pairs"
              << ", clarity " << report.clarity_total
              << " (" << static_cast<int>(report.wall_seconds) << "s)\n";
    reports.push_back(std::move(report));
  }
  return summarize(std::move(reports));
}

std::string BenchSummary::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "rep,data_seed,train_rmse,val_rmse,test_rmse,oracle_test_rmse,"
         "n_mains,n_interactions,mains_recovered,spurious_mains,"
         "interactions_exact,clarity_total,wall_seconds\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const BenchReport& r = reports[i];
    out << i << ',' << r.data_seed << ',' << r.train_rmse << ',' << r.val_rmse
        << ',' << r.test_rmse << ',' << r.oracle_test_rmse << ',' << r.s1.size()
        << ',' << r.s2.size() << ',' << (r.mains_recovered ? 1 : 0) << ','
        << r.spurious_mains << ',' << (r.interactions_exact ? 1 : 0) << ','
        << r.clarity_total << ',' << r.wall_seconds << '\n';
  }
  return out.str();
}

std::string BenchSummary::summary_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "metric,mean,sd\n"
      << "train_rmse," << train_rmse_mean << ',' << train_rmse_sd << '\n'
      << "val_rmse," << val_rmse_mean << ',' << val_rmse_sd << '\n'
      << "test_rmse," << test_rmse_mean << ',' << test_rmse_sd << '\n'
      << "clarity_loss," << clarity_mean << ',' << clarity_sd << '\n'
      << "mains_recovered," << mains_recovered_count << ",\n"
      << "interactions_exact," << interactions_exact_count << ",\n";
  return out.str();
}

std::string BenchSummary::table_row() const {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed;
  out << "GAMI-Net  test RMSE " << test_rmse_mean << "+-" << test_rmse_sd
      << "  clarity " << clarity_mean << "+-" << clarity_sd
      << "  recovery " << interactions_exact_count << "/" << reports.size();
  return out.str();
}

}  // namespace gaminet
