#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sizegraph/corpus.hpp"

namespace sizegraph {

// Undirected weighted edge with i < j and a finite positive cost. Object
// pairs that never co-occur simply have no edge.
struct WeightedEdge {
    int i = 0;
    int j = 0;
    double cost = 0.0;
};

struct WeightedGraph {
    int n = 0;
    std::vector<WeightedEdge> edges;  // unique pairs, sorted by (i, j)

    // nullptr if the pair has no edge.
    const WeightedEdge* find_edge(int i, int j) const;
};

// Edge of the built size graph: member of exactly one of the k edge-disjoint
// spanning trees (tree is 1-based).
struct SizeGraphEdge {
    int i = 0;
    int j = 0;
    double cost = 0.0;
    int tree = 0;
};

// Union of k edge-disjoint spanning trees over the vocabulary. Guaranteed
// k-edge-connected with exactly k*(n-1) edges.
struct SizeGraph {
    ObjectVocab vocab;
    int k = 0;
    std::vector<SizeGraphEdge> edges;

    int n() const { return vocab.size(); }
    bool has_edge(int i, int j) const;  // order-insensitive
    std::vector<std::pair<int, int>> edge_pairs() const;  // (lo, hi), sorted
};

// Pair affinity from tag co-occurrence: each shared list contributes
// 1/list_length, and the edge cost is the inverse of that sum, so cheap
// edges connect objects that co-occur often in short (descriptive) lists.
WeightedGraph cooccurrence_costs(const TagCorpus& corpus, const ObjectVocab& vocab);

// Extracts k edge-disjoint spanning trees by iterated minimum spanning
// trees: build an MST, remove its edges, repeat. Deterministic for a given
// input. Throws DisconnectedError (with the violating cut) if the input is
// not k-edge-connected or some residual round cannot span.
SizeGraph build_size_graph(const WeightedGraph& weighted, const ObjectVocab& vocab, int k);

// Exact edge connectivity via unit-capacity max-flow, minimized over
// (0, t) pairs. Parallel edges between a pair are not expected and count
// once. Throws DataError for n < 2.
int edge_connectivity(int n, const std::vector<std::pair<int, int>>& edges);
int edge_connectivity(const WeightedGraph& g);
int edge_connectivity(const SizeGraph& g);

// Certificate that the greedy construction stayed within its worst-case
// bound: cost(H) <= k * M * (n-1) where M is the costliest edge of the
// source graph. Violation would be a bug, hence logic_error.
struct ApproximationReport {
    double cost = 0.0;      // total cost of the built subgraph
    double min_cost = 0.0;  // cheapest edge cost in the source graph
    double max_cost = 0.0;  // costliest edge cost in the source graph
    double bound = 0.0;     // k * max_cost * (n - 1)
};

ApproximationReport approximation_report(const WeightedGraph& weighted, const SizeGraph& graph);

// Lossless JSON round trip. Edges are serialized sorted by
// (tree, name_i, name_j); loading re-validates structure and connectivity.
std::string size_graph_to_json(const SizeGraph& g);
SizeGraph size_graph_from_json(const std::string& text);
void save_size_graph(const SizeGraph& g, const std::string& path);
SizeGraph load_size_graph(const std::string& path);

}  // namespace sizegraph
