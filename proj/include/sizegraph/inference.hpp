#pragma once

#include "sizegraph/model.hpp"
#include "sizegraph/observations.hpp"

namespace sizegraph {

// Standard normal CDF, accurate to well under 1e-7 everywhere, clamped to
// [0, 1]. Throws DataError on non-finite input.
double std_normal_cdf(double x);

enum class Winner { A, B, Tie };

struct ComparisonResult {
    double p_bigger = 0.0;           // P(size(a) > size(b))
    Winner decision = Winner::Tie;   // A iff p > 0.5, B iff p < 0.5
    double confidence = 0.0;         // |p - 0.5|
};

// P(size(a) > size(b)) under independent log-normal sizes:
// 1 - Phi((mu_b - mu_a) / sqrt(sigma_a^2 + sigma_b^2)).
ComparisonResult compare(const LogNormalModel& model, int a, int b);

// How surprising an observed relative size is under the model, as a z-score:
// (y_obs - (mu_i - mu_j)) / sqrt(sigma_i^2 + sigma_j^2). Large |z| flags an
// atypical pair (tiny elephant, giant cup). A rejected detection propagates
// as DataError.
double abnormality_score(const LogNormalModel& model, const ObjectVocab& vocab,
                         const DetectionPair& rec, SizeScale scale);

}  // namespace sizegraph
