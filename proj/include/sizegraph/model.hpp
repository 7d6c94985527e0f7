#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sizegraph/observations.hpp"

namespace sizegraph {

// Smallest sigma we allow anywhere; keeps densities finite and gradient
// steps out of the degenerate zero-variance corner.
inline constexpr double kSigmaMin = 1e-3;

// Per-object log-normal size: mu and sigma describe ln(size in meters).
struct LogNormalParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct LogNormalModel {
    std::vector<LogNormalParams> params;  // by node id
    std::vector<char> anchored;           // nonzero = frozen during fitting

    int n() const { return static_cast<int>(params.size()); }
};

struct FitConfig {
    double eta = 1e-2;       // initial sigma step size
    int max_sweeps = 500;
    double rel_tol = 1e-9;   // stop when relative likelihood gain drops below
    int max_backtracks = 30; // halvings of eta before giving up on a step
};

// Joint log-likelihood: pairwise y on edge (i, j) is modeled as
// N(mu_i - mu_j, sigma_i^2 + sigma_j^2), unary y on node i as
// N(mu_i, sigma_i^2). Empty observation sets score 0.
double log_likelihood(const LogNormalModel& model, const ObservationSet& obs,
                      const SizeGraph& graph);

// Closed-form maximizer of the likelihood in mu_i with everything else held
// fixed: a precision-weighted mean of unary values and neighbor-shifted
// pairwise values. Throws DataError("unconstrained node ...") if nothing
// touches node i.
double update_mu(int i, const LogNormalModel& model, const ObservationSet& obs);

// Analytic d(log-likelihood)/d(sigma_i), everything else fixed.
double sigma_gradient(int i, const LogNormalModel& model, const ObservationSet& obs);

// Starting point for the fit: nodes with unary evidence take its mean/std;
// uncovered nodes inherit a neighbor's mu shifted by the edge's median log
// ratio (breadth-first from covered nodes), sigma 1. All-uncovered models
// root node 0 at mu = 0.
LogNormalModel initialize(const ObservationSet& obs, const SizeGraph& graph);

struct FitResult {
    LogNormalModel model;
    std::vector<double> trace;  // likelihood after init, then after each sweep
    int sweeps = 0;
    double loglik = 0.0;
};

// Coordinate ascent over nodes in ascending id: exact mu update, then one
// backtracked gradient step on sigma (eta halves until the likelihood stops
// decreasing; sigma projected to >= kSigmaMin). Anchored nodes are frozen at
// their given values; nodes with no touching observations keep their
// initialization. The trace is non-decreasing by construction.
FitResult fit(const SizeGraph& graph, const ObservationSet& obs,
              const FitConfig& config = {},
              const std::map<int, LogNormalParams>& anchors = {});

// ---------------------------------------------------------------------------
// Model file I/O

struct ModelMeta {
    int sweeps = 0;
    double loglik = 0.0;
    SizeScale scale = SizeScale::linear;
};

// A fitted model bound to its vocabulary, as stored on disk.
struct NamedModel {
    ObjectVocab vocab;
    LogNormalModel model;
    ModelMeta meta;
};

std::string model_to_json(const NamedModel& m);
NamedModel model_from_json(const std::string& text);
void save_model(const NamedModel& m, const std::string& path);
NamedModel load_model(const std::string& path);

// Anchors file: {"name": {"mu": f, "sigma": f}} entries; "size_m" may stand
// in for "mu" and is converted by ln. Sigmas are floored at kSigmaMin.
std::map<int, LogNormalParams> load_anchors(const std::string& path,
                                            const ObjectVocab& vocab);

}  // namespace sizegraph
