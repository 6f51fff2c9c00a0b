#include "gaminet/screen.hpp"

#include <algorithm>
#include <cmath>

#include "gaminet/errors.hpp"

namespace gaminet {

Heredity heredity_from_string(const std::string& name) {
  if (name == "weak") return Heredity::kWeak;
  if (name == "none") return Heredity::kNone;
  throw ValidationError("unknown heredity mode: " + name + " (expected weak or none)");
}

std::string to_string(Heredity h) {
  return h == Heredity::kWeak ? "weak" : "none";
}

Eigen::VectorXd compute_residuals(const GamiNetModel& model, const Dataset& train) {
  const Eigen::VectorXd eta = predict_eta(model, train.features);
  if (model.link == Link::kIdentity) return train.response - eta;
  return train.response - invert_link(Link::kLogit, eta);
}

BinnedFeature bin_feature(const Eigen::VectorXd& values, FeatureKind kind,
                          int max_bins) {
  if (max_bins < 2) throw ValidationError("bin count must be at least 2");
  const long n = values.size();
  BinnedFeature out;
  out.bins.resize(n);

  std::vector<int> raw(n);
  int raw_bins = 0;
  if (kind == FeatureKind::kCategorical) {
    for (long i = 0; i < n; ++i) {
      raw[i] = static_cast<int>(values[i]);
      raw_bins = std::max(raw_bins, raw[i] + 1);
    }
  } else {
    std::vector<double> sorted(values.data(), values.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (int b = 1; b < max_bins; ++b) {
      const long pos = std::min<long>(n - 1, (n * b) / max_bins);
      const double e = sorted[pos];
      if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    for (long i = 0; i < n; ++i) {
      // bin = index of the first edge >= value
      raw[i] = static_cast<int>(
          std::lower_bound(edges.begin(), edges.end(), values[i]) - edges.begin());
    }
    raw_bins = static_cast<int>(edges.size()) + 1;
  }

  // Merge away empty bins so cut enumeration only sees occupied ones.
  std::vector<int> remap(raw_bins, -1);
  for (long i = 0; i < n; ++i) remap[raw[i]] = 0;
  int next = 0;
  for (int b = 0; b < raw_bins; ++b)
    if (remap[b] == 0) remap[b] = next++;
  for (long i = 0; i < n; ++i) out.bins[i] = remap[raw[i]];
  out.n_bins = next;
  return out;
}

namespace {

// Canonical arithmetic shared with the screening oracle: cell statistics
// accumulate in sample order, quadrant sums aggregate cells row-major
// (first axis outer), and RSS = sum r^2 - sum_q S_q^2 / N_q.
double quadrant_min_rss(const BinnedFeature& fj, const BinnedFeature& fk,
                        const Eigen::VectorXd& r) {
  const long n = r.size();
  const int bj = fj.n_bins, bk = fk.n_bins;
  std::vector<double> cell_sum(static_cast<size_t>(bj) * bk, 0.0);
  std::vector<long> cell_count(static_cast<size_t>(bj) * bk, 0);
  double total_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    const size_t cell = static_cast<size_t>(fj.bins[i]) * bk + fk.bins[i];
    cell_sum[cell] += r[i];
    cell_count[cell] += 1;
    total_sq += r[i] * r[i];
  }

  long occupied = 0;
  for (long c : cell_count)
    if (c > 0) ++occupied;

  auto block_fit = [&](int j_lo, int j_hi, int k_lo, int k_hi) {
    double s = 0.0;
    long c = 0;
    for (int a = j_lo; a < j_hi; ++a)
      for (int b = k_lo; b < k_hi; ++b) {
        const size_t cell = static_cast<size_t>(a) * bk + b;
        s += cell_sum[cell];
        c += cell_count[cell];
      }
    return c > 0 ? s * s / static_cast<double>(c) : 0.0;
  };

  if (bj < 2 || bk < 2 || occupied < 4)
    return total_sq - block_fit(0, bj, 0, bk);

  double best = std::numeric_limits<double>::infinity();
  for (int cj = 0; cj + 1 < bj; ++cj) {
    for (int ck = 0; ck + 1 < bk; ++ck) {
      double fit = block_fit(0, cj + 1, 0, ck + 1);
      fit += block_fit(0, cj + 1, ck + 1, bk);
      fit += block_fit(cj + 1, bj, 0, ck + 1);
      fit += block_fit(cj + 1, bj, ck + 1, bk);
      best = std::min(best, total_sq - fit);
    }
  }
  return best;
}

}  // namespace

double score_pair(int j, int k, const Eigen::VectorXd& residuals,
                  const Dataset& train, int bins) {
  if (j == k) throw ValidationError("score_pair requires two distinct features");
  if (residuals.size() != train.n())
    throw ValidationError("residual vector does not match the training data");
  const BinnedFeature fj = bin_feature(train.features.col(j), train.meta[j].kind, bins);
  const BinnedFeature fk = bin_feature(train.features.col(k), train.meta[k].kind, bins);
  return quadrant_min_rss(fj, fk, residuals) / static_cast<double>(train.n());
}

std::vector<InteractionCandidate> rank_interactions(
    const std::set<int>& s1, const Eigen::VectorXd& residuals,
    const Dataset& train, int k_max, Heredity heredity, int bins) {
  if (k_max < 0) throw ValidationError("k_max must be non-negative");
  const int p = train.p();

  std::vector<BinnedFeature> binned(p);
  std::vector<bool> have(p, false);
  auto binned_for = [&](int j) -> const BinnedFeature& {
    if (!have[j]) {
      binned[j] = bin_feature(train.features.col(j), train.meta[j].kind, bins);
      have[j] = true;
    }
    return binned[j];
  };

  std::vector<InteractionCandidate> scored;
  for (int j = 0; j < p; ++j) {
    for (int k = j + 1; k < p; ++k) {
      if (heredity == Heredity::kWeak && !s1.count(j) && !s1.count(k)) continue;
      InteractionCandidate c;
      c.j = j;
      c.k = k;
      c.score = quadrant_min_rss(binned_for(j), binned_for(k), residuals) /
                static_cast<double>(train.n());
      scored.push_back(c);
    }
  }
  std::sort(scored.begin(), scored.end(),
            [](const InteractionCandidate& a, const InteractionCandidate& b) {
              if (a.score != b.score) return a.score < b.score;
              if (a.j != b.j) return a.j < b.j;
              return a.k < b.k;
            });
  if (static_cast<int>(scored.size()) > k_max) scored.resize(k_max);
  return scored;
}

}  // namespace gaminet
