#include "sizegraph/inference.hpp"

#include <cmath>

#include "sizegraph/error.hpp"

namespace sizegraph {

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw DataError("std_normal_cdf needs a finite argument");
    // erfc form is numerically solid in both tails, unlike 0.5*(1+erf(...)).
    const double p = 0.5 * std::erfc(-x / std::sqrt(2.0));
    return std::min(1.0, std::max(0.0, p));
}

ComparisonResult compare(const LogNormalModel& model, int a, int b) {
    if (a < 0 || a >= model.n() || b < 0 || b >= model.n())
        throw DataError("compare: object id out of range");
    if (a == b) throw DataError("compare: cannot compare an object with itself");

    const auto& pa = model.params[a];
    const auto& pb = model.params[b];
    const double denom = std::sqrt(pa.sigma * pa.sigma + pb.sigma * pb.sigma);

    ComparisonResult r;
    r.p_bigger = 1.0 - std_normal_cdf((pb.mu - pa.mu) / denom);
    if (r.p_bigger > 0.5)
        r.decision = Winner::A;
    else if (r.p_bigger < 0.5)
        r.decision = Winner::B;
    else
        r.decision = Winner::Tie;
    r.confidence = std::abs(r.p_bigger - 0.5);
    return r;
}

double abnormality_score(const LogNormalModel& model, const ObjectVocab& vocab,
                         const DetectionPair& rec, SizeScale scale) {
    if (vocab.size() != model.n())
        throw DataError("model and vocabulary disagree on object count");
    auto conv = visual_observation(rec, vocab, scale);
    if (!conv.accepted())
        throw DataError("cannot score rejected detection: " + conv.reject_reason);

    const auto& pi = model.params[conv.value->i];
    const auto& pj = model.params[conv.value->j];
    const double denom = std::sqrt(pi.sigma * pi.sigma + pj.sigma * pj.sigma);
    return (conv.value->log_ratio - (pi.mu - pj.mu)) / denom;
}

}  // namespace sizegraph
