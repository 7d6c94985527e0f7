#include "sizegraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "sizegraph/error.hpp"

namespace sizegraph {

namespace {

std::string node_label(int id, const std::vector<std::string>* names) {
    if (names && id >= 0 && id < static_cast<int>(names->size())) return (*names)[id];
    return std::to_string(id);
}

}  // namespace

ComparisonDataset close_transitively(const std::vector<std::pair<int, int>>& annotated,
                                     const std::vector<std::string>* names) {
    int n = 0;
    for (const auto& [b, s] : annotated) {
        if (b < 0 || s < 0) throw DataError("comparison pair has a negative id");
        if (b == s)
            throw DataError("comparison pair relates " + node_label(b, names) + " to itself");
        n = std::max(n, std::max(b, s) + 1);
    }

    std::vector<std::set<int>> succ(n);
    for (const auto& [b, s] : annotated) succ[b].insert(s);

    // Depth-first search with an explicit color array; a back edge both
    // proves the cycle and lets us read it off the recursion stack.
    std::vector<int> color(n, 0);  // 0 white, 1 on stack, 2 done
    std::vector<int> stack, order;
    for (int root = 0; root < n; ++root) {
        if (color[root] != 0) continue;
        std::vector<std::pair<int, std::set<int>::iterator>> dfs;
        dfs.push_back({root, succ[root].begin()});
        color[root] = 1;
        stack.push_back(root);
        while (!dfs.empty()) {
            auto& [u, it] = dfs.back();
            if (it == succ[u].end()) {
                color[u] = 2;
                order.push_back(u);
                stack.pop_back();
                dfs.pop_back();
                continue;
            }
            const int v = *it;
            ++it;
            if (color[v] == 1) {
                std::ostringstream msg;
                msg << "comparison pairs contain a cycle: ";
                auto at = std::find(stack.begin(), stack.end(), v);
                for (auto w = at; w != stack.end(); ++w)
                    msg << node_label(*w, names) << " > ";
                msg << node_label(v, names);
                throw DataError(msg.str());
            }
            if (color[v] == 0) {
                color[v] = 1;
                stack.push_back(v);
                dfs.push_back({v, succ[v].begin()});
            }
        }
    }

    // Reachability in reverse topological order: each node's descendant set
    // is the union of its successors' sets plus the successors themselves.
    std::vector<std::set<int>> reach(n);
    for (int u : order) {
        for (int v : succ[u]) {
            reach[u].insert(v);
            reach[u].insert(reach[v].begin(), reach[v].end());
        }
    }

    std::set<std::pair<int, int>> annotated_set(annotated.begin(), annotated.end());
    ComparisonDataset out;
    for (const auto& [b, s] : annotated_set)
        out.pairs.push_back({b, s, PairProvenance::annotated});
    for (int u = 0; u < n; ++u) {
        for (int v : reach[u]) {
            if (!annotated_set.count({u, v}))
                out.pairs.push_back({u, v, PairProvenance::closure});
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const ComparisonPair& a, const ComparisonPair& b) {
        return std::tie(a.bigger, a.smaller) < std::tie(b.bigger, b.smaller);
    });
    return out;
}

double AccuracyReport::per_object_accuracy(int id) const {
    auto it = per_object.find(id);
    if (it == per_object.end() || it->second.second == 0) return 0.0;
    return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
}

AccuracyReport accuracy(const LogNormalModel& model, const ComparisonDataset& dataset) {
    AccuracyReport rep;
    for (const auto& pair : dataset.pairs) {
        const auto r = compare(model, pair.bigger, pair.smaller);
        const bool ok = r.decision == Winner::A;
        rep.correct += ok;
        ++rep.total;
        auto& pb = rep.per_object[pair.bigger];
        auto& ps = rep.per_object[pair.smaller];
        pb.first += ok;
        ++pb.second;
        ps.first += ok;
        ++ps.second;
    }
    rep.overall = rep.total ? static_cast<double>(rep.correct) / static_cast<double>(rep.total) : 0.0;
    return rep;
}

std::vector<std::pair<double, double>> declaration_curve(const LogNormalModel& model,
                                                         const ComparisonDataset& dataset,
                                                         const std::vector<double>& grid) {
    if (dataset.pairs.empty()) throw DataError("declaration curve needs a non-empty dataset");
    for (double dr : grid)
        if (!(dr > 0.0 && dr <= 1.0))
            throw DataError("declaration rates must lie in (0, 1]");

    struct Scored {
        double confidence;
        bool correct;
    };
    std::vector<Scored> scored;
    scored.reserve(dataset.pairs.size());
    for (const auto& pair : dataset.pairs) {
        const auto r = compare(model, pair.bigger, pair.smaller);
        scored.push_back({r.confidence, r.decision == Winner::A});
    }
    // Most confident first; stable so dataset order breaks exact ties.
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });

    std::vector<std::size_t> cum(scored.size() + 1, 0);
    for (std::size_t i = 0; i < scored.size(); ++i)
        cum[i + 1] = cum[i] + (scored[i].correct ? 1 : 0);

    std::vector<std::pair<double, double>> curve;
    curve.reserve(grid.size());
    for (double dr : grid) {
        const auto take = static_cast<std::size_t>(
            std::ceil(dr * static_cast<double>(scored.size()) - 1e-12));
        const std::size_t m = std::max<std::size_t>(1, std::min(take, scored.size()));
        curve.emplace_back(dr, static_cast<double>(cum[m]) / static_cast<double>(m));
    }
    return curve;
}

std::vector<std::pair<int, double>> anchor_injection_curve(
    const SizeGraph& graph, const ObservationSet& obs,
    const std::map<int, LogNormalParams>& truth, const ComparisonDataset& dataset,
    const std::vector<int>& counts, const FitConfig& config) {
    const int n = graph.n();
    for (int c : counts)
        if (c < 0 || c > n) throw DataError("anchor count out of range");

    std::vector<std::size_t> appearances(n, 0);
    for (const auto& pair : dataset.pairs) {
        if (pair.bigger >= n || pair.smaller >= n)
            throw DataError("dataset mentions an object outside the graph");
        ++appearances[pair.bigger];
        ++appearances[pair.smaller];
    }
    std::vector<int> by_mentions(n);
    std::iota(by_mentions.begin(), by_mentions.end(), 0);
    std::stable_sort(by_mentions.begin(), by_mentions.end(), [&](int a, int b) {
        return appearances[a] > appearances[b];  // ties keep ascending id
    });

    std::vector<std::pair<int, double>> curve;
    for (int c : counts) {
        std::map<int, LogNormalParams> anchors;
        for (int r = 0; r < c; ++r) {
            const int id = by_mentions[r];
            auto it = truth.find(id);
            if (it == truth.end())
                throw DataError("no true parameters for object id " + std::to_string(id));
            anchors[id] = it->second;
        }
        const auto result = fit(graph, obs, config, anchors);
        curve.emplace_back(c, accuracy(result.model, dataset).overall);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// pairs file

void save_pairs(const ComparisonDataset& dataset, const ObjectVocab& vocab,
                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "bigger,smaller\n";
    for (const auto& pair : dataset.pairs) {
        if (pair.bigger >= vocab.size() || pair.smaller >= vocab.size())
            throw DataError("pair references an object outside the vocabulary");
        out << vocab.names[pair.bigger] << "," << vocab.names[pair.smaller] << "\n";
    }
    if (!out) throw DataError("failed while writing: " + path);
}

std::vector<std::pair<std::string, std::string>> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (no == 1) {
            if (line != "bigger,smaller")
                throw DataError(path + ": expected header \"bigger,smaller\"");
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw DataError(path + " line " + std::to_string(no) + ": expected two fields");
        std::string bigger = canonical_name(line.substr(0, comma));
        std::string smaller = canonical_name(line.substr(comma + 1));
        if (bigger.empty() || smaller.empty())
            throw DataError(path + " line " + std::to_string(no) + ": empty object name");
        out.emplace_back(std::move(bigger), std::move(smaller));
    }
    return out;
}

ComparisonDataset bind_pairs(const std::vector<std::pair<std::string, std::string>>& named,
                             const ObjectVocab& vocab) {
    std::vector<std::pair<int, int>> ids;
    ids.reserve(named.size());
    for (const auto& [b, s] : named)
        ids.emplace_back(vocab.id_of(b), vocab.id_of(s));
    return close_transitively(ids, &vocab.names);
}

}  // namespace sizegraph
