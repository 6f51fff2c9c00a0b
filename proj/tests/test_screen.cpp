#include <doctest.h>

#include <cmath>
#include <limits>

#include "gaminet/screen.hpp"

using namespace gaminet;

namespace {

FeatureMeta numerical_meta(const std::string& name) {
  FeatureMeta m;
  m.name = name;
  m.kind = FeatureKind::kNumerical;
  return m;
}

FeatureMeta categorical_meta(const std::string& name, int levels) {
  FeatureMeta m;
  m.name = name;
  m.kind = FeatureKind::kCategorical;
  for (int l = 0; l < levels; ++l) m.levels.push_back("l" + std::to_string(l));
  return m;
}

// Independent screening oracle. It shares the canonical arithmetic order
// (cell statistics in sample order, quadrant aggregation row-major) but is
// written from the definition, without the library's cut loop.
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

Dataset two_feature_data(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Dataset data;
  data.meta = {numerical_meta("a"), numerical_meta("b")};
  data.features.resize(a.size(), 2);
  data.features.col(0) = a;
  data.features.col(1) = b;
  data.response = Eigen::VectorXd::Zero(a.size());
  return data;
}

GamiNetModel intercept_model(double mu, Link link, int p) {
  GamiNetModel model;
  model.intercept = mu;
  model.link = link;
  for (int j = 0; j < p; ++j) model.meta.push_back(numerical_meta("f" + std::to_string(j)));
  return model;
}

}  // namespace

TEST_SUITE("screen") {

TEST_CASE("residuals of a perfect model are zero") {
  Dataset data;
  data.meta = {numerical_meta("a")};
  data.features = Eigen::MatrixXd::Random(5, 1);
  data.response = Eigen::VectorXd::Constant(5, 1.25);
  const GamiNetModel model = intercept_model(1.25, Link::kIdentity, 1);
  CHECK(compute_residuals(model, data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("intercept-only residuals are y minus the mean") {
  Dataset data;
  data.meta = {numerical_meta("a")};
  data.features = Eigen::MatrixXd::Random(4, 1);
  data.response.resize(4);
  data.response << 1.0, 2.0, 3.0, 6.0;
  const GamiNetModel model = intercept_model(3.0, Link::kIdentity, 1);
  const Eigen::VectorXd r = compute_residuals(model, data);
  CHECK(r[0] == doctest::Approx(-2.0));
  CHECK(r[3] == doctest::Approx(3.0));
}

TEST_CASE("logit residuals live on the probability scale") {
  Dataset data;
  data.meta = {numerical_meta("a")};
  data.features = Eigen::MatrixXd::Random(2, 1);
  data.response.resize(2);
  data.response << 0.0, 1.0;
  const GamiNetModel model = intercept_model(0.0, Link::kLogit, 1);
  const Eigen::VectorXd r = compute_residuals(model, data);
  CHECK(r[0] == doctest::Approx(-0.5));
  CHECK(r[1] == doctest::Approx(0.5));
}

TEST_CASE("quantile bins respect the requested maximum and merge duplicates") {
  Eigen::VectorXd skewed(10);
  skewed << 0, 0, 0, 0, 0, 0, 0, 1, 2, 3;
  const BinnedFeature bins = bin_feature(skewed, FeatureKind::kNumerical, 4);
  CHECK(bins.n_bins <= 4);
  CHECK(bins.n_bins >= 2);
  for (int b : bins.bins) CHECK(b < bins.n_bins);
}

TEST_CASE("an xor pattern scores near zero while its variance is one") {
  Rng rng(3);
  const int n = 400;
  Eigen::VectorXd a(n), b(n), r(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
    r[i] = ((a[i] > 0.5) != (b[i] > 0.5)) ? 1.0 : -1.0;
  }
  const Dataset data = two_feature_data(a, b);
  const double score = score_pair(0, 1, r, data, 8);
  const double variance = r.squaredNorm() / n;
  CHECK(score < 0.05 * variance);
}

TEST_CASE("independent residuals score near their variance") {
  Rng rng(11);
  const int n = 2000;
  Eigen::VectorXd a(n), b(n), r(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
    r[i] = rng.normal();
  }
  const Dataset data = two_feature_data(a, b);
  const double score = score_pair(0, 1, r, data, 8);
  const double variance = (r.array() - r.mean()).square().sum() / n;
  CHECK(score > 0.8 * variance);
  CHECK(score < 1.05 * variance);
}

TEST_CASE("constant residuals score exactly zero") {
  Rng rng(5);
  const int n = 64;
  Eigen::VectorXd a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  const Dataset data = two_feature_data(a, b);
  CHECK(score_pair(0, 1, Eigen::VectorXd::Ones(n), data, 5) == 0.0);
}

TEST_CASE("score_pair equals the brute-force oracle exactly") {
  int checked = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng = Rng::substream(99, "screen-oracle", trial);
    const int n = 20 + static_cast<int>(rng.uniform_int(181));
    const int bins = 2 + static_cast<int>(rng.uniform_int(4));
    const bool cat_a = rng.uniform() < 0.3;
    const bool cat_b = rng.uniform() < 0.3;

    Dataset data;
    data.meta = {cat_a ? categorical_meta("a", 3) : numerical_meta("a"),
                 cat_b ? categorical_meta("b", 4) : numerical_meta("b")};
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
    const BinnedFeature fa = bin_feature(data.features.col(0), data.meta[0].kind, bins);
    const BinnedFeature fb = bin_feature(data.features.col(1), data.meta[1].kind, bins);
    const double want = oracle_score(fa, fb, r);
    CHECK(got == want);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("weak heredity restricts the evaluated pair set") {
  const int n = 50;
  Rng rng(7);
  Dataset data;
  data.meta = {numerical_meta("f0"), numerical_meta("f1"), numerical_meta("f2"),
               numerical_meta("f3")};
  data.features.resize(n, 4);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) data.features(i, j) = rng.uniform();
    r[i] = rng.normal();
  }
  data.response = Eigen::VectorXd::Zero(n);

  const auto all = rank_interactions({0, 2}, r, data, 100, Heredity::kWeak, 4);
  std::set<std::pair<int, int>> pairs;
  for (const auto& c : all) pairs.insert({c.j, c.k});
  const std::set<std::pair<int, int>> expected = {
      {0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}};
  CHECK(pairs == expected);

  CHECK(rank_interactions({}, r, data, 100, Heredity::kWeak, 4).empty());
  CHECK(rank_interactions({}, r, data, 100, Heredity::kNone, 4).size() == 6);
}

TEST_CASE("candidates come back sorted with the requested length") {
  const int n = 120;
  Rng rng(13);
  Dataset data;
  for (int j = 0; j < 5; ++j) data.meta.push_back(numerical_meta("f" + std::to_string(j)));
  data.features.resize(n, 5);
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) data.features(i, j) = rng.uniform();
    r[i] = rng.normal();
  }
  data.response = Eigen::VectorXd::Zero(n);

  const auto top3 = rank_interactions({0, 1, 2, 3, 4}, r, data, 3, Heredity::kWeak, 4);
  CHECK(top3.size() == 3);
  CHECK(top3[0].score <= top3[1].score);
  CHECK(top3[1].score <= top3[2].score);
  CHECK(rank_interactions({0, 1, 2, 3, 4}, r, data, 0, Heredity::kWeak, 4).empty());

  const auto again = rank_interactions({0, 1, 2, 3, 4}, r, data, 3, Heredity::kWeak, 4);
  CHECK(again[0].j == top3[0].j);
  CHECK(again[0].k == top3[0].k);
  CHECK(again[0].score == top3[0].score);
}

TEST_CASE("a planted xor interaction ranks first in every trial") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng = Rng::substream(55, "xor-rank", trial);
    const int n = 300;
    Dataset data;
    for (int j = 0; j < 6; ++j)
      data.meta.push_back(numerical_meta("f" + std::to_string(j)));
    data.features.resize(n, 6);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 6; ++j) data.features(i, j) = rng.uniform();
      const bool hi = (data.features(i, 2) > 0.5) != (data.features(i, 3) > 0.5);
      r[i] = (hi ? 1.0 : -1.0) + 0.1 * rng.normal();
    }
    data.response = Eigen::VectorXd::Zero(n);
    const auto ranked =
        rank_interactions({0, 1, 2, 3, 4, 5}, r, data, 15, Heredity::kWeak, 5);
    REQUIRE(!ranked.empty());
    CHECK(ranked[0].j == 2);
    CHECK(ranked[0].k == 3);
  }
}

}  // TEST_SUITE
