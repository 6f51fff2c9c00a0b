#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "gaminet/data.hpp"
#include "gaminet/model.hpp"

namespace gaminet {

enum class Heredity { kWeak, kNone };

Heredity heredity_from_string(const std::string& name);
std::string to_string(Heredity h);

struct InteractionCandidate {
  int j = 0;
  int k = 0;
  double score = 0.0;  // lower = stronger interaction evidence
};

/// Working-scale residuals of a fitted model: y - eta for the identity
/// link, y - g^{-1}(eta) (probability scale) for logit.
Eigen::VectorXd compute_residuals(const GamiNetModel& model, const Dataset& train);

// Feature discretization used by the pair screen: numerical features fall
// into at most `max_bins` quantile bins (edges from training data, empty
// bins merged), categorical features use their level indices.
struct BinnedFeature {
  std::vector<int> bins;
  int n_bins = 0;
};

BinnedFeature bin_feature(const Eigen::VectorXd& values, FeatureKind kind,
                          int max_bins);

/// Interaction strength of the pair (j, k): the sample is discretized on
/// both axes, every cut pair splits it into four quadrants predicted by
/// their residual means, and the score is the minimal residual sum of
/// squares over all cut pairs, divided by n. When no four-quadrant split
/// exists (under 2 bins on an axis or fewer than 4 occupied cells) the
/// single-cell RSS is returned instead.
double score_pair(int j, int k, const Eigen::VectorXd& residuals,
                  const Dataset& train, int bins);

/// Scores every admissible pair (all (j,k) with j in S1 or k in S1 under
/// weak heredity; all pairs otherwise) and returns the k_max lowest-score
/// candidates sorted ascending, ties broken lexicographically.
std::vector<InteractionCandidate> rank_interactions(
    const std::set<int>& s1, const Eigen::VectorXd& residuals,
    const Dataset& train, int k_max, Heredity heredity, int bins);

}  // namespace gaminet
