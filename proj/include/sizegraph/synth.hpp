#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sizegraph/evaluation.hpp"
#include "sizegraph/graph.hpp"
#include "sizegraph/model.hpp"
#include "sizegraph/observations.hpp"

namespace sizegraph {

// ---------------------------------------------------------------------------
// Oracles: slow, simple, independent implementations used to validate the
// production code paths at small scale.

// Phi(x) by composite Simpson integration of the normal density from 0 to x,
// absolute error well under 1e-10 for |x| <= 8; beyond that the tail mass is
// below double resolution and the result saturates to 0 or 1.
double reference_cdf(double x);

struct BruteForceResult {
    double cost = 0.0;
    std::vector<std::pair<int, int>> edges;  // sorted (lo, hi)
};

// Exact minimum-cost subgraph with edge connectivity >= k, by exhaustive
// edge-subset search with branch-and-bound pruning. Ties broken by
// lexicographically smallest edge set. Only for n <= 7.
BruteForceResult brute_force_optimal_subgraph(const WeightedGraph& weighted, int k);

// Likelihood maximizer by coordinate-wise exhaustive grid sweeps:
// mu on [-5, 5] step 1e-2, sigma on [kSigmaMin, 3] step 1e-2, per node,
// repeated until no grid move improves the likelihood. Anchored nodes stay
// fixed. At most 3 free nodes.
std::map<int, LogNormalParams> grid_mle(const ObservationSet& obs, const SizeGraph& graph,
                                        const std::map<int, LogNormalParams>& anchors = {});

// ---------------------------------------------------------------------------
// Synthetic worlds

struct SynthConfig {
    int n = 40;
    int k = 2;
    int obs_per_edge = 50;        // pairwise samples per size-graph edge
    double unary_fraction = 0.6;  // fraction of nodes that get unary samples
    int unary_per_node = 10;
    double mu_lo = -2.0, mu_hi = 4.0;        // true mu range (ln meters)
    double sigma_lo = 0.1, sigma_hi = 0.6;   // true sigma range
    bool zero_noise = false;   // emit exact means, sigma* = kSigmaMin
    double pair_margin = 0.0;  // keep ground-truth pairs with |dmu| > margin
};

struct SynthWorld {
    SynthConfig config;
    std::uint64_t seed = 0;
    ObjectVocab vocab;
    TagCorpus corpus;                   // synthetic tag lists behind the costs
    std::vector<LogNormalParams> truth; // by node id
    WeightedGraph weighted;
    SizeGraph graph;
    ObservationSet obs;
    ComparisonDataset dataset;  // ground-truth pairs, margin-filtered
};

// Deterministic world for a given (config, seed): true parameters, a tag
// corpus whose co-occurrence costs define the weighted graph, the built size
// graph, observations drawn from the model the fitter assumes, and the
// ground-truth comparison dataset.
SynthWorld generate_world(const SynthConfig& config, std::uint64_t seed);

// All ordered pairs (i, j) with mu*_i - mu*_j > margin.
ComparisonDataset ground_truth_pairs(const std::vector<LogNormalParams>& truth,
                                     double margin);

std::map<int, LogNormalParams> truth_as_anchors(const SynthWorld& world);

// truth file: {"name": {"mu": f, "sigma": f}}, loadable as anchors.
void save_truth(const std::vector<LogNormalParams>& truth, const ObjectVocab& vocab,
                const std::string& path);

// Writes vocab.txt, tags.tsv, graph.json, obs.jsonl, pairs.csv, truth.json
// into dir (created if needed).
void write_world(const SynthWorld& world, const std::string& dir);

}  // namespace sizegraph
