#include "sizegraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sizegraph/error.hpp"

namespace sizegraph {

using nlohmann::json;

// ---------------------------------------------------------------------------
// reference_cdf

namespace {

double normal_density(double t) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * t * t);
}

}  // namespace

double reference_cdf(double x) {
    if (!std::isfinite(x)) throw DataError("reference_cdf needs a finite argument");
    // Past |x| = 8 the remaining tail is ~6e-16, already below the accuracy
    // we promise, so saturate instead of integrating further out.
    if (x > 8.0) return 1.0;
    if (x < -8.0) return 0.0;
    if (x == 0.0) return 0.5;

    // Composite Simpson from 0 to x. Step ~1/512 keeps the h^4 error term
    // orders of magnitude below 1e-10 over the whole admissible range.
    const int intervals = 2 * std::max(256, static_cast<int>(std::ceil(std::abs(x) * 256.0)));
    const double h = x / intervals;
    double sum = normal_density(0.0) + normal_density(x);
    for (int t = 1; t < intervals; ++t)
        sum += normal_density(t * h) * (t % 2 ? 4.0 : 2.0);
    return 0.5 + sum * h / 3.0;
}

// ---------------------------------------------------------------------------
// Brute-force optimal k-edge-connected subgraph

namespace {

struct BruteForceSearch {
    const std::vector<WeightedEdge>& edges;  // ascending (cost, i, j)
    int n;
    int k;
    std::vector<std::vector<int>> suffix_deg;   // [idx][v]: incident edges in edges[idx..)
    std::vector<std::vector<double>> suffix_sum;  // [idx][t]: cost of t cheapest in edges[idx..)

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> best_edges;

    BruteForceSearch(const std::vector<WeightedEdge>& e, int n_, int k_)
        : edges(e), n(n_), k(k_) {
        const int m = static_cast<int>(edges.size());
        suffix_deg.assign(m + 1, std::vector<int>(n, 0));
        suffix_sum.assign(m + 1, {});
        suffix_sum[m] = {0.0};
        for (int idx = m - 1; idx >= 0; --idx) {
            suffix_deg[idx] = suffix_deg[idx + 1];
            ++suffix_deg[idx][edges[idx].i];
            ++suffix_deg[idx][edges[idx].j];
            // edges are globally sorted, so the suffix's cheapest t edges are
            // simply its first t
            suffix_sum[idx].resize(m - idx + 1);
            suffix_sum[idx][0] = 0.0;
            for (int t = 1; t <= m - idx; ++t)
                suffix_sum[idx][t] = suffix_sum[idx][t - 1] + edges[idx + t - 1].cost;
        }
    }

    bool connected_enough(const std::vector<std::pair<int, int>>& chosen) const {
        return edge_connectivity(n, chosen) >= k;
    }

    void consider(double cost, const std::vector<std::pair<int, int>>& chosen) {
        std::vector<std::pair<int, int>> sorted = chosen;
        std::sort(sorted.begin(), sorted.end());
        if (cost < best_cost || (cost == best_cost && sorted < best_edges)) {
            best_cost = cost;
            best_edges = std::move(sorted);
        }
    }

    void search(std::size_t idx, double cost, std::vector<int>& deg,
                std::vector<std::pair<int, int>>& chosen) {
        // Degree demand still open; each further edge covers at most 2.
        int deficit = 0;
        for (int v = 0; v < n; ++v) deficit += std::max(0, k - deg[v]);
        if (deficit == 0 && connected_enough(chosen)) {
            // Extending a feasible subset only adds cost.
            consider(cost, chosen);
            return;
        }
        // Degrees can be satisfied by disjoint cycles, so running out of
        // edges with zero deficit is still a dead end.
        if (idx == edges.size()) return;

        const int remaining = static_cast<int>(edges.size() - idx);
        const int need = (deficit + 1) / 2;
        if (need > remaining) return;
        for (int v = 0; v < n; ++v)
            if (deg[v] + suffix_deg[idx][v] < k) return;
        if (cost + suffix_sum[idx][need] > best_cost) return;

        // include edges[idx]
        const auto& e = edges[idx];
        chosen.emplace_back(e.i, e.j);
        ++deg[e.i];
        ++deg[e.j];
        search(idx + 1, cost + e.cost, deg, chosen);
        chosen.pop_back();
        --deg[e.i];
        --deg[e.j];

        // exclude edges[idx]
        search(idx + 1, cost, deg, chosen);
    }
};

}  // namespace

BruteForceResult brute_force_optimal_subgraph(const WeightedGraph& weighted, int k) {
    if (weighted.n > 7) throw DataError("oracle scale exceeded: brute force is capped at 7 nodes");
    if (weighted.n < 2) throw DataError("brute force needs at least two nodes");
    if (k < 1) throw DataError("k must be at least 1");
    for (const auto& e : weighted.edges)
        if (!(std::isfinite(e.cost) && e.cost > 0.0) || e.i < 0 || e.j >= weighted.n || e.i >= e.j)
            throw DataError("brute force: malformed weighted edge");

    std::vector<WeightedEdge> sorted = weighted.edges;
    std::sort(sorted.begin(), sorted.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return std::tie(a.cost, a.i, a.j) < std::tie(b.cost, b.i, b.j);
    });

    {
        std::vector<std::pair<int, int>> all;
        for (const auto& e : sorted) all.emplace_back(e.i, e.j);
        if (edge_connectivity(weighted.n, all) < k)
            throw DataError("no " + std::to_string(k) + "-edge-connected subgraph exists");
    }

    BruteForceSearch s(sorted, weighted.n, k);
    std::vector<int> deg(weighted.n, 0);
    std::vector<std::pair<int, int>> chosen;
    s.search(0, 0.0, deg, chosen);

    return {s.best_cost, s.best_edges};
}

// ---------------------------------------------------------------------------
// Grid-search likelihood oracle

namespace {

// Independent of the production likelihood code on purpose: plain density
// sums, restricted to the terms node i participates in.
double oracle_local_loglik(int i, const std::vector<LogNormalParams>& params,
                           const ObservationSet& obs) {
    static const double log_2pi = 1.8378770664093454836;
    double ll = 0.0;
    for (const auto& [key, ys] : obs.pairwise) {
        if (key.first != i && key.second != i) continue;
        const auto& a = params[key.first];
        const auto& b = params[key.second];
        const double var = a.sigma * a.sigma + b.sigma * b.sigma;
        const double mean = a.mu - b.mu;
        for (double y : ys)
            ll += -0.5 * (log_2pi + std::log(var)) - (y - mean) * (y - mean) / (2.0 * var);
    }
    const auto& p = params[i];
    for (double y : obs.unary[i])
        ll += -0.5 * (log_2pi + std::log(p.sigma * p.sigma)) -
              (y - p.mu) * (y - p.mu) / (2.0 * p.sigma * p.sigma);
    return ll;
}

}  // namespace

std::map<int, LogNormalParams> grid_mle(const ObservationSet& obs, const SizeGraph& graph,
                                        const std::map<int, LogNormalParams>& anchors) {
    const int n = graph.n();
    if (obs.n != n) throw DataError("observation set and size graph disagree on object count");
    for (const auto& [id, p] : anchors) {
        (void)p;
        if (id < 0 || id >= n) throw DataError("anchor id out of range");
    }
    const int free_nodes = n - static_cast<int>(anchors.size());
    if (free_nodes > 3)
        throw DataError("too many free nodes for the grid oracle (max 3)");
    if (obs.unary_count() == 0 && anchors.empty())
        throw DataError("grid oracle needs unary observations or an anchor for identifiability");

    std::vector<LogNormalParams> params(n, {0.0, 1.0});
    std::vector<char> frozen(n, 0);
    for (const auto& [id, p] : anchors) {
        params[id] = p;
        frozen[id] = 1;
    }

    // Coordinate sweeps, each an exhaustive scan of the (mu, sigma) grid for
    // one node. Repeats until a full sweep moves nothing. Grid points are
    // computed from integer indices so the same cell always means the same
    // double.
    bool moved = true;
    for (int round = 0; round < 100 && moved; ++round) {
        moved = false;
        for (int i = 0; i < n; ++i) {
            if (frozen[i]) continue;
            const LogNormalParams before = params[i];
            LogNormalParams best = before;
            double best_ll = -std::numeric_limits<double>::infinity();
            for (int t = 0; t <= 1000; ++t) {
                const double mu = (t - 500) / 100.0;
                for (int u = 0; u <= 299; ++u) {
                    const double sigma = (1 + 10 * u) / 1000.0;
                    params[i] = {mu, sigma};
                    const double ll = oracle_local_loglik(i, params, obs);
                    // strict > keeps the first (lowest mu, then sigma) of ties
                    if (ll > best_ll) {
                        best_ll = ll;
                        best = {mu, sigma};
                    }
                }
            }
            params[i] = best;
            if (best.mu != before.mu || best.sigma != before.sigma) moved = true;
        }
    }

    std::map<int, LogNormalParams> out;
    for (int i = 0; i < n; ++i) out[i] = params[i];
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic worlds

ComparisonDataset ground_truth_pairs(const std::vector<LogNormalParams>& truth,
                                     double margin) {
    if (margin < 0.0) throw DataError("pair margin must be non-negative");
    ComparisonDataset out;
    const int n = static_cast<int>(truth.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && truth[i].mu - truth[j].mu > margin)
                out.pairs.push_back({i, j, PairProvenance::annotated});
    return out;
}

SynthWorld generate_world(const SynthConfig& config, std::uint64_t seed) {
    if (config.n < 3) throw DataError("synthetic world needs at least 3 objects");
    if (config.k < 1) throw DataError("k must be at least 1");
    if (config.obs_per_edge < 0 || config.unary_per_node < 0)
        throw DataError("observation counts must be non-negative");
    if (!(config.unary_fraction >= 0.0 && config.unary_fraction <= 1.0))
        throw DataError("unary fraction must lie in [0, 1]");
    if (!(config.mu_lo <= config.mu_hi) || !(config.sigma_lo <= config.sigma_hi) ||
        !(config.sigma_lo > 0.0))
        throw DataError("invalid parameter ranges");

    SynthWorld world;
    world.config = config;
    world.seed = seed;
    std::mt19937_64 rng(seed);

    const int n = config.n;
    int width = 2;
    for (int v = n - 1; v >= 100; v /= 10) ++width;
    std::vector<std::string> names;
    names.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::ostringstream name;
        name << "obj";
        name.width(width);
        name.fill('0');
        name << i;
        names.push_back(name.str());
    }
    world.vocab = ObjectVocab::from_names(names);

    // True sizes. Draw order is part of the determinism contract with
    // ourselves: mus first, then sigmas, node by node.
    std::uniform_real_distribution<double> mu_dist(config.mu_lo, config.mu_hi);
    std::uniform_real_distribution<double> sigma_dist(config.sigma_lo, config.sigma_hi);
    world.truth.resize(n);
    for (int i = 0; i < n; ++i) world.truth[i].mu = mu_dist(rng);
    for (int i = 0; i < n; ++i)
        world.truth[i].sigma = config.zero_noise ? kSigmaMin : sigma_dist(rng);

    // A tag corpus that mentions every pair, so the weighted graph is
    // complete and `graph` run on the emitted files reproduces ours exactly.
    // Random filler tags (globally unique) vary each list's length and hence
    // each pair's cost.
    std::uniform_int_distribution<int> lists_dist(1, 3);
    std::uniform_int_distribution<int> filler_dist(0, 6);
    long long filler_id = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const int lists = lists_dist(rng);
            for (int l = 0; l < lists; ++l) {
                std::vector<std::string> tags{world.vocab.names[i], world.vocab.names[j]};
                const int fillers = filler_dist(rng);
                for (int f = 0; f < fillers; ++f)
                    tags.push_back("filler" + std::to_string(filler_id++));
                world.corpus.lists.push_back(std::move(tags));
            }
        }
    }
    std::shuffle(world.corpus.lists.begin(), world.corpus.lists.end(), rng);

    world.weighted = cooccurrence_costs(world.corpus, world.vocab);
    world.graph = build_size_graph(world.weighted, world.vocab, config.k);

    // Observations drawn from exactly the generative story the fitter
    // assumes. Edge order is the sorted edge list; node order ascending.
    world.obs.n = n;
    world.obs.unary.assign(n, {});
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const auto& [lo, hi] : world.graph.edge_pairs()) {
        auto& bucket = world.obs.pairwise[{lo, hi}];
        const double mean = world.truth[lo].mu - world.truth[hi].mu;
        const double sd = std::sqrt(world.truth[lo].sigma * world.truth[lo].sigma +
                                    world.truth[hi].sigma * world.truth[hi].sigma);
        for (int r = 0; r < config.obs_per_edge; ++r)
            bucket.push_back(config.zero_noise ? mean : mean + sd * gauss(rng));
    }

    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int covered = static_cast<int>(
        std::ceil(config.unary_fraction * static_cast<double>(n) - 1e-12));
    ids.resize(std::min(covered, n));
    std::sort(ids.begin(), ids.end());
    for (int i : ids) {
        for (int r = 0; r < config.unary_per_node; ++r)
            world.obs.unary[i].push_back(
                config.zero_noise ? world.truth[i].mu
                                  : world.truth[i].mu + world.truth[i].sigma * gauss(rng));
    }

    world.dataset = ground_truth_pairs(world.truth, config.pair_margin);
    return world;
}

std::map<int, LogNormalParams> truth_as_anchors(const SynthWorld& world) {
    std::map<int, LogNormalParams> anchors;
    for (int i = 0; i < static_cast<int>(world.truth.size()); ++i)
        anchors[i] = {world.truth[i].mu, std::max(kSigmaMin, world.truth[i].sigma)};
    return anchors;
}

void save_truth(const std::vector<LogNormalParams>& truth, const ObjectVocab& vocab,
                const std::string& path) {
    if (static_cast<int>(truth.size()) != vocab.size())
        throw DataError("truth table and vocabulary disagree on object count");
    json doc = json::object();
    for (int i = 0; i < vocab.size(); ++i)
        doc[vocab.names[i]] = {{"mu", truth[i].mu}, {"sigma", truth[i].sigma}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw DataError("failed while writing: " + path);
}

void write_world(const SynthWorld& world, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
    const auto at = [&dir](const std::string& name) {
        return (std::filesystem::path(dir) / name).string();
    };

    {
        std::ofstream out(at("vocab.txt"));
        if (!out) throw DataError("cannot write file: " + at("vocab.txt"));
        for (const auto& name : world.vocab.names) out << name << "\n";
    }
    {
        std::ofstream out(at("tags.tsv"));
        if (!out) throw DataError("cannot write file: " + at("tags.tsv"));
        for (const auto& list : world.corpus.lists) {
            for (std::size_t t = 0; t < list.size(); ++t)
                out << (t ? "\t" : "") << list[t];
            out << "\n";
        }
    }
    save_size_graph(world.graph, at("graph.json"));
    save_observations(world.obs, world.vocab, at("obs.jsonl"));
    save_pairs(world.dataset, world.vocab, at("pairs.csv"));
    save_truth(world.truth, world.vocab, at("truth.json"));
}

}  // namespace sizegraph
