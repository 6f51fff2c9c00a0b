#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaminet/data.hpp"
#include "gaminet/trainer.hpp"

namespace gaminet {

enum class SynthDistribution { kUniform, kTruncatedNormal, kTruncatedExponential };

SynthDistribution synth_distribution_from_string(const std::string& name);
std::string to_string(SynthDistribution d);

struct SynthConfig {
  int n = 10000;
  SynthDistribution distribution = SynthDistribution::kUniform;
  std::uint64_t seed = 0;
  double noise_sd = 1.0;
  int p_total = 100;

  void validate() const;
};

/// Noise-free regression surface on [0,1]^6: a centered quadratic in x1, a
/// decaying exponential in x2, a sine ridge in (x3, x4) and a bent Gaussian
/// ridge in (x5, x6).
double synthetic_response(const double* x);

/// Draws features from the configured distribution (truncation to [0,1] by
/// rejection) and adds N(0, noise_sd^2) noise to the response. Only the
/// first six features influence the response.
Dataset generate(const SynthConfig& config);

struct BenchReport {
  std::uint64_t data_seed = 0;
  double train_rmse = 0.0;
  double val_rmse = 0.0;
  double test_rmse = 0.0;
  double oracle_test_rmse = 0.0;  // noise-free surface as the predictor
  std::vector<std::string> s1;    // selected main effects, by feature name
  std::vector<std::pair<std::string, std::string>> s2;  // selected pairs
  bool mains_recovered = false;       // S1 contains x1..x6
  int spurious_mains = 0;             // |S1| minus true mains found
  bool interactions_exact = false;    // S2 == {(x3,x4),(x5,x6)}
  double clarity_total = 0.0;
  double wall_seconds = 0.0;
};

struct BenchSummary {
  std::vector<BenchReport> reports;
  double test_rmse_mean = 0.0;
  double test_rmse_sd = 0.0;
  double train_rmse_mean = 0.0;
  double train_rmse_sd = 0.0;
  double val_rmse_mean = 0.0;
  double val_rmse_sd = 0.0;
  double clarity_mean = 0.0;
  double clarity_sd = 0.0;
  int mains_recovered_count = 0;
  int interactions_exact_count = 0;

  std::string to_csv() const;
  std::string summary_csv() const;
  std::string table_row() const;  // "rmse mean+-sd, clarity mean+-sd"
};

// Optional capture of the fitted model and split for callers that inspect
// more than the report (identifiability checks, explanations).
struct RepetitionCapture {
  GamiNetModel model;
  Eigen::MatrixXd train_features;
  double final_val_loss = 0.0;
};

/// One full experiment repetition: fresh data, 80/20 test split, a 20%
/// validation carve-out, fit, and evaluation of the held-out RMSE.
BenchReport run_repetition(const SynthConfig& base, const TrainConfig& train_config,
                           int repetition, const std::string& artifact_dir = "",
                           RepetitionCapture* capture = nullptr);

BenchSummary summarize(std::vector<BenchReport> reports);

BenchSummary run_benchmark(const SynthConfig& base, const TrainConfig& train_config,
                           int repetitions, const std::string& artifact_dir = "");

}  // namespace gaminet
