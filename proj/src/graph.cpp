#include "sizegraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sizegraph/error.hpp"

namespace sizegraph {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Basic structure queries

const WeightedEdge* WeightedGraph::find_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(i, j),
                               [](const WeightedEdge& e, const std::pair<int, int>& key) {
                                   return std::make_pair(e.i, e.j) < key;
                               });
    if (it != edges.end() && it->i == i && it->j == j) return &*it;
    return nullptr;
}

bool SizeGraph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    for (const auto& e : edges)
        if (e.i == i && e.j == j) return true;
    return false;
}

std::vector<std::pair<int, int>> SizeGraph::edge_pairs() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.emplace_back(e.i, e.j);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Co-occurrence costs

WeightedGraph cooccurrence_costs(const TagCorpus& corpus, const ObjectVocab& vocab) {
    // Accumulate, per object pair, how many shared lists of each length were
    // seen. Summing count/length in ascending length order afterwards makes
    // the result bit-identical no matter how the corpus lines are ordered.
    std::map<std::pair<int, int>, std::map<int, long long>> shared;
    for (const auto& list : corpus.lists) {
        std::vector<int> ids;
        for (const auto& tag : list) {
            if (auto id = vocab.find(tag)) ids.push_back(*id);
        }
        if (ids.size() < 2) continue;
        std::sort(ids.begin(), ids.end());
        const int len = static_cast<int>(list.size());  // all tags dilute the signal
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b)
                shared[{ids[a], ids[b]}][len] += 1;
    }

    WeightedGraph g;
    g.n = vocab.size();
    g.edges.reserve(shared.size());
    for (const auto& [pair, by_len] : shared) {
        double affinity = 0.0;
        for (const auto& [len, count] : by_len)
            affinity += static_cast<double>(count) / static_cast<double>(len);
        g.edges.push_back({pair.first, pair.second, 1.0 / affinity});
    }
    return g;
}

// ---------------------------------------------------------------------------
// Edge connectivity (unit-capacity Dinic, minimized over (0, t))

namespace {

struct Dinic {
    struct Arc {
        int to;
        int cap;
        int rev;
    };

    explicit Dinic(int n) : adj(n), level(n), iter(n) {}

    // One undirected unit edge is a single arc pair with capacity 1 each way.
    void add_undirected(int u, int v) {
        adj[u].push_back({v, 1, static_cast<int>(adj[v].size())});
        adj[v].push_back({u, 1, static_cast<int>(adj[u].size()) - 1});
    }

    bool bfs(int s, int t) {
        std::fill(level.begin(), level.end(), -1);
        std::queue<int> q;
        level[s] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const auto& a : adj[u]) {
                if (a.cap > 0 && level[a.to] < 0) {
                    level[a.to] = level[u] + 1;
                    q.push(a.to);
                }
            }
        }
        return level[t] >= 0;
    }

    int dfs(int u, int t, int f) {
        if (u == t) return f;
        for (int& i = iter[u]; i < static_cast<int>(adj[u].size()); ++i) {
            Arc& a = adj[u][i];
            if (a.cap > 0 && level[a.to] == level[u] + 1) {
                int d = dfs(a.to, t, std::min(f, a.cap));
                if (d > 0) {
                    a.cap -= d;
                    adj[a.to][a.rev].cap += d;
                    return d;
                }
            }
        }
        return 0;
    }

    int max_flow(int s, int t) {
        int flow = 0;
        while (bfs(s, t)) {
            std::fill(iter.begin(), iter.end(), 0);
            while (int f = dfs(s, t, 1 << 30)) flow += f;
        }
        return flow;
    }

    // After max_flow: the s-side of a minimum cut.
    std::vector<int> source_side(int s) const {
        std::vector<char> vis(adj.size(), 0);
        std::vector<int> side;
        std::queue<int> q;
        q.push(s);
        vis[s] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            side.push_back(u);
            for (const auto& a : adj[u]) {
                if (a.cap > 0 && !vis[a.to]) {
                    vis[a.to] = 1;
                    q.push(a.to);
                }
            }
        }
        std::sort(side.begin(), side.end());
        return side;
    }

    std::vector<std::vector<Arc>> adj;
    std::vector<int> level;
    std::vector<int> iter;
};

// Connectivity plus one side of a minimum cut (empty side when the graph is
// disconnected from node 0's perspective would still be correct: source_side
// returns node 0's component).
std::pair<int, std::vector<int>> connectivity_with_cut(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 2) throw DataError("edge connectivity needs at least two nodes");
    int best = std::numeric_limits<int>::max();
    std::vector<int> best_side{0};
    for (int t = 1; t < n; ++t) {
        Dinic d(n);
        for (auto [u, v] : edges) d.add_undirected(u, v);
        int f = d.max_flow(0, t);
        if (f < best) {
            best = f;
            best_side = d.source_side(0);
            if (best == 0) break;
        }
    }
    return {best, best_side};
}

}  // namespace

int edge_connectivity(int n, const std::vector<std::pair<int, int>>& edges) {
    return connectivity_with_cut(n, edges).first;
}

int edge_connectivity(const WeightedGraph& g) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(g.edges.size());
    for (const auto& e : g.edges) pairs.emplace_back(e.i, e.j);
    return edge_connectivity(g.n, pairs);
}

int edge_connectivity(const SizeGraph& g) {
    return edge_connectivity(g.n(), g.edge_pairs());
}

// ---------------------------------------------------------------------------
// Size graph construction

namespace {

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

std::string join_names(const ObjectVocab& vocab, const std::vector<int>& ids, std::size_t cap = 8) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < cap; ++i) {
        if (i) out += ", ";
        out += vocab.names[ids[i]];
    }
    if (ids.size() > cap) out += ", ...";
    return out;
}

void validate_weighted(const WeightedGraph& weighted, const ObjectVocab& vocab) {
    if (weighted.n != vocab.size())
        throw DataError("weighted graph node count does not match vocabulary size");
    std::pair<int, int> prev{-1, -1};
    for (const auto& e : weighted.edges) {
        if (e.i < 0 || e.j >= weighted.n || e.i >= e.j)
            throw DataError("weighted graph edge endpoints out of order or range");
        if (!(std::isfinite(e.cost) && e.cost > 0.0))
            throw DataError("weighted graph edge cost must be finite and positive");
        std::pair<int, int> cur{e.i, e.j};
        if (!(prev < cur)) throw DataError("weighted graph edges must be sorted and unique");
        prev = cur;
    }
}

}  // namespace

SizeGraph build_size_graph(const WeightedGraph& weighted, const ObjectVocab& vocab, int k) {
    if (k < 1) throw DataError("k must be at least 1");
    if (vocab.size() < 2) throw DataError("size graph needs at least two objects");
    validate_weighted(weighted, vocab);

    {
        std::vector<std::pair<int, int>> pairs;
        pairs.reserve(weighted.edges.size());
        for (const auto& e : weighted.edges) pairs.emplace_back(e.i, e.j);
        auto [conn, side] = connectivity_with_cut(weighted.n, pairs);
        if (conn < k) {
            std::ostringstream msg;
            msg << "co-occurrence graph is only " << conn << "-edge-connected but k=" << k
                << "; thin cut around {" << join_names(vocab, side) << "}";
            throw DisconnectedError(msg.str(), side, 0);
        }
    }

    const int n = weighted.n;
    std::vector<WeightedEdge> pool = weighted.edges;
    std::stable_sort(pool.begin(), pool.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return std::tie(a.cost, a.i, a.j) < std::tie(b.cost, b.i, b.j);
    });

    SizeGraph out;
    out.vocab = vocab;
    out.k = k;

    for (int tree = 1; tree <= k; ++tree) {
        Dsu dsu(n);
        std::vector<int> degree(n, 0);  // degree within the tree under construction
        std::vector<char> taken(pool.size(), 0);
        int accepted = 0;

        // Kruskal over equal-cost groups. Within a group we repeatedly take
        // the admissible edge whose endpoints have the lowest combined degree
        // in the current forest (ids break remaining ties). Any order gives
        // an MST; spreading degree keeps later rounds from being starved by
        // an early star, which matters a lot for tie-heavy cost tables.
        std::size_t g = 0;
        while (g < pool.size() && accepted < n - 1) {
            std::size_t h = g;
            while (h < pool.size() && pool[h].cost == pool[g].cost) ++h;
            while (accepted < n - 1) {
                std::size_t best = pool.size();
                int best_deg = 0;
                for (std::size_t e = g; e < h; ++e) {
                    if (taken[e]) continue;
                    if (dsu.find(pool[e].i) == dsu.find(pool[e].j)) continue;
                    int deg = degree[pool[e].i] + degree[pool[e].j];
                    if (best == pool.size() || deg < best_deg)
                        best = e, best_deg = deg;
                    // ties on degree fall to the smaller (i, j), i.e. pool order
                }
                if (best == pool.size()) break;
                taken[best] = 1;
                dsu.unite(pool[best].i, pool[best].j);
                ++degree[pool[best].i];
                ++degree[pool[best].j];
                out.edges.push_back({pool[best].i, pool[best].j, pool[best].cost, tree});
                ++accepted;
            }
            g = h;
        }

        if (accepted < n - 1) {
            // Residual graph fell apart: report node 0's surviving component.
            Dsu comp(n);
            for (std::size_t e = 0; e < pool.size(); ++e)
                if (!taken[e]) comp.unite(pool[e].i, pool[e].j);
            for (const auto& ed : out.edges)
                if (ed.tree == tree) comp.unite(ed.i, ed.j);  // partial tree still connects
            std::vector<int> side;
            for (int v = 0; v < n; ++v)
                if (comp.find(v) == comp.find(0)) side.push_back(v);
            std::ostringstream msg;
            msg << "cannot extract spanning tree " << tree << " of " << k
                << ": residual co-occurrence graph is disconnected; one side of the cut is {"
                << join_names(vocab, side) << "}";
            throw DisconnectedError(msg.str(), side, tree);
        }

        // Remove accepted edges from the pool for the next round.
        std::vector<WeightedEdge> rest;
        rest.reserve(pool.size() - (n - 1));
        for (std::size_t e = 0; e < pool.size(); ++e)
            if (!taken[e]) rest.push_back(pool[e]);
        pool.swap(rest);
    }

    return out;
}

ApproximationReport approximation_report(const WeightedGraph& weighted, const SizeGraph& graph) {
    if (weighted.edges.empty()) throw DataError("approximation report needs a non-empty source graph");
    if (weighted.n != graph.n())
        throw DataError("source graph and size graph disagree on node count");

    ApproximationReport r;
    r.min_cost = std::numeric_limits<double>::infinity();
    r.max_cost = 0.0;
    for (const auto& e : weighted.edges) {
        r.min_cost = std::min(r.min_cost, e.cost);
        r.max_cost = std::max(r.max_cost, e.cost);
    }
    for (const auto& e : graph.edges) {
        const WeightedEdge* src = weighted.find_edge(e.i, e.j);
        if (!src || src->cost != e.cost)
            throw DataError("size graph contains an edge missing from the source graph");
        r.cost += e.cost;
    }
    r.bound = static_cast<double>(graph.k) * r.max_cost * (graph.n() - 1);
    // Each tree is a spanning tree of n-1 edges costing at most M each, so
    // exceeding the bound means the construction itself is broken.
    if (r.cost > r.bound * (1.0 + 1e-12) + 1e-12)
        throw std::logic_error("size graph cost exceeds its approximation bound");
    return r;
}

// ---------------------------------------------------------------------------
// Serialization

std::string size_graph_to_json(const SizeGraph& g) {
    json edges = json::array();
    std::vector<SizeGraphEdge> sorted = g.edges;
    std::sort(sorted.begin(), sorted.end(), [&](const SizeGraphEdge& a, const SizeGraphEdge& b) {
        return std::tie(a.tree, g.vocab.names[a.i], g.vocab.names[a.j]) <
               std::tie(b.tree, g.vocab.names[b.i], g.vocab.names[b.j]);
    });
    for (const auto& e : sorted) {
        edges.push_back({{"i", g.vocab.names[e.i]},
                         {"j", g.vocab.names[e.j]},
                         {"cost", e.cost},
                         {"tree", e.tree}});
    }
    json doc{{"k", g.k}, {"objects", g.vocab.names}, {"edges", edges}};
    return doc.dump(2) + "\n";
}

SizeGraph size_graph_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid size graph JSON: ") + e.what());
    }

    SizeGraph g;
    try {
        g.k = doc.at("k").get<int>();
        g.vocab = ObjectVocab::from_names(doc.at("objects").get<std::vector<std::string>>());
        for (const auto& je : doc.at("edges")) {
            SizeGraphEdge e;
            e.i = g.vocab.id_of(je.at("i").get<std::string>());
            e.j = g.vocab.id_of(je.at("j").get<std::string>());
            e.cost = je.at("cost").get<double>();
            e.tree = je.at("tree").get<int>();
            if (e.i > e.j) std::swap(e.i, e.j);
            g.edges.push_back(e);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid size graph JSON: ") + e.what());
    }

    const int n = g.n();
    if (g.k < 1) throw DataError("size graph JSON: k must be at least 1");
    if (n < 2) throw DataError("size graph JSON: needs at least two objects");
    if (static_cast<int>(g.edges.size()) != g.k * (n - 1))
        throw DataError("size graph JSON: expected k*(n-1) edges");

    std::set<std::pair<int, int>> seen;
    for (const auto& e : g.edges) {
        if (e.i == e.j) throw DataError("size graph JSON: self-loop edge");
        if (!(std::isfinite(e.cost) && e.cost > 0.0))
            throw DataError("size graph JSON: edge cost must be finite and positive");
        if (e.tree < 1 || e.tree > g.k) throw DataError("size graph JSON: tree index out of range");
        if (!seen.insert({e.i, e.j}).second)
            throw DataError("size graph JSON: duplicate edge");
    }

    // Each tree must individually be a spanning tree.
    for (int t = 1; t <= g.k; ++t) {
        Dsu dsu(n);
        int joined = 0;
        for (const auto& e : g.edges) {
            if (e.tree != t) continue;
            if (!dsu.unite(e.i, e.j)) throw DataError("size graph JSON: tree contains a cycle");
            ++joined;
        }
        if (joined != n - 1) throw DataError("size graph JSON: tree does not span all objects");
    }

    return g;
}

void save_size_graph(const SizeGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << size_graph_to_json(g);
    if (!out) throw DataError("failed while writing: " + path);
}

SizeGraph load_size_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return size_graph_from_json(ss.str());
}

}  // namespace sizegraph
